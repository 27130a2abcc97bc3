#include "projflow/fields.hpp"

#include "projflow/state.hpp"

#include <cmath>
#include <cstdint>
#include "projflow/verification.hpp"

namespace projflow {

std::vector<std::string> known_initial_fields() {
  return {"zero", "case_a", "case_b", "gradient", "rough"};
}

std::vector<std::string> known_forcing_fields() { return {"zero", "case_a", "case_b"}; }

namespace {

// Deterministic multiscale field: sine modes up to |k| = 12 with amplitudes
// 1/|k| and pseudo-random signs. The slow spectral decay keeps a broad band
// of dissipation time scales active, which the interpolant-collapse
// diagnostics need.
std::array<double, 2> rough_field(double x, double y) {
  constexpr int kMax = 12;
  double u0 = 0.0, u1 = 0.0;
  std::uint64_t s = 0x2545F4914F6CDD1Dull;
  for (int k1 = 1; k1 <= kMax; ++k1)
    for (int k2 = 1; k2 <= kMax; ++k2) {
      s = s * 6364136223846793005ull + 1442695040888963407ull;
      const double sign0 = (s >> 62) & 1 ? 1.0 : -1.0;
      const double sign1 = (s >> 61) & 1 ? 1.0 : -1.0;
      const double amp = 1.0 / std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
      const double sk = std::sin(k1 * M_PI * x) * std::sin(k2 * M_PI * y);
      u0 += sign0 * amp * sk;
      u1 += sign1 * amp * sk;
    }
  return {u0, u1};
}

} // namespace

VectorField initial_field(const std::string& name) {
  if (name == "zero") return nullptr;
  if (name == "gradient")
    return [](double x, double y) { return std::array<double, 2>{x, y}; };
  if (name == "rough")
    return [](double x, double y) { return rough_field(x, y); };
  for (const auto& c : builtin_cases())
    if (c.name == name) {
      const auto u = c.u;
      return [u](double x, double y) { return u(0.0, x, y); };
    }
  throw ConfigError("initial", "unknown initial field '" + name + "'");
}

TimeVectorField forcing_field(const std::string& name, double mu) {
  if (name == "zero") return nullptr;
  for (const auto& c : builtin_cases())
    if (c.name == name) return c.forcing(mu);
  throw ConfigError("forcing", "unknown forcing field '" + name + "'");
}

} // namespace projflow
