#include "projflow/runio.hpp"

#include "projflow/fields.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace projflow {

using nlohmann::json;

namespace {

json load_json(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", std::string("cannot open ") + what + " file '" + path + "'");
  try {
    return json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("JSON parse error: ") + e.what());
  }
}

double require_positive(const json& j, const char* field) {
  if (!j.contains(field)) throw ConfigError(field, std::string("missing field '") + field + "'");
  if (!j[field].is_number()) throw ConfigError(field, std::string("'") + field + "' must be a number");
  const double v = j[field].get<double>();
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(field, std::string("'") + field + "' must be finite and positive");
  return v;
}

MeshSpec parse_mesh(const json& j) {
  MeshSpec m;
  if (!j.contains("mesh")) throw ConfigError("mesh", "missing field 'mesh'");
  const json& jm = j["mesh"];
  if (jm.contains("file")) {
    m.structured = false;
    m.file = jm["file"].get<std::string>();
    return m;
  }
  if (!jm.contains("nx")) throw ConfigError("mesh.nx", "structured mesh needs 'nx'");
  m.nx = jm["nx"].get<int>();
  m.ny = jm.contains("ny") ? jm["ny"].get<int>() : m.nx;
  if (m.nx < 1 || m.ny < 1) throw ConfigError("mesh.nx", "subdivision counts must be >= 1");
  if (jm.contains("rect")) {
    const auto r = jm["rect"].get<std::vector<double>>();
    if (r.size() != 4) throw ConfigError("mesh.rect", "'rect' must be [x0, y0, x1, y1]");
    m.rect = Rect{r[0], r[1], r[2], r[3]};
    if (m.rect.x1 <= m.rect.x0 || m.rect.y1 <= m.rect.y0)
      throw ConfigError("mesh.rect", "degenerate rectangle");
  }
  return m;
}

OutputSpec parse_output(const json& j) {
  OutputSpec o;
  if (!j.contains("output")) return o;
  const json& jo = j["output"];
  if (jo.contains("dir")) o.dir = jo["dir"].get<std::string>();
  if (jo.contains("ledger")) o.ledger = jo["ledger"].get<std::string>();
  if (jo.contains("checkpoint_stride")) o.checkpoint_stride = jo["checkpoint_stride"].get<int>();
  if (jo.contains("vtk_stride")) o.vtk_stride = jo["vtk_stride"].get<int>();
  if (o.checkpoint_stride < 0 || o.vtk_stride < 0)
    throw ConfigError("output", "strides must be nonnegative");
  return o;
}

} // namespace

RunSpec parse_run_config(const std::string& path) {
  const json j = load_json(path, "config");
  RunSpec spec;

  if (!j.contains("scheme")) throw ConfigError("scheme", "missing field 'scheme'");
  spec.sim.scheme = scheme_from_name(j["scheme"].get<std::string>());
  spec.sim.mu = require_positive(j, "mu");
  spec.sim.T = require_positive(j, "T");
  spec.sim.dt = require_positive(j, "dt");

  spec.sim.forcing_name = j.value("forcing", "zero");
  spec.sim.initial_name = j.value("initial", "zero");
  spec.sim.forcing = forcing_field(spec.sim.forcing_name, spec.sim.mu);
  spec.sim.initial = initial_field(spec.sim.initial_name);

  if (j.contains("solver")) {
    const json& js = j["solver"];
    if (js.contains("rel_tol")) spec.sim.solver.rel_tol = js["rel_tol"].get<double>();
    if (js.contains("abs_tol")) spec.sim.solver.abs_tol = js["abs_tol"].get<double>();
    if (js.contains("max_iter")) spec.sim.solver.max_iter = js["max_iter"].get<int>();
  }
  if (j.contains("n_time_quad")) spec.sim.n_time_quad = j["n_time_quad"].get<int>();

  spec.mesh = parse_mesh(j);
  spec.output = parse_output(j);

  validate_config(spec.sim);
  return spec;
}

StudySpec parse_study_config(const std::string& path) {
  const json j = load_json(path, "study config");
  StudySpec spec;
  spec.case_name = j.value("case", "case_a");
  builtin_case(spec.case_name);  // validates the name

  const std::string s = j.value("scheme", "both");
  if (s == "both")
    spec.schemes = {SchemeKind::chorin_darcy, SchemeKind::incremental_poisson};
  else
    spec.schemes = {scheme_from_name(s)};

  spec.schedule.nx = j.value("nx", 16);
  if (spec.schedule.nx < 1) throw ConfigError("nx", "nx must be >= 1");
  spec.schedule.mu = require_positive(j, "mu");
  spec.schedule.T = require_positive(j, "T");
  if (!j.contains("dt") || !j["dt"].is_array() || j["dt"].empty())
    throw ConfigError("dt", "'dt' must be a nonempty array of time steps");
  spec.schedule.dts = j["dt"].get<std::vector<double>>();
  for (double dt : spec.schedule.dts)
    if (!(dt > 0.0)) throw ConfigError("dt", "time steps must be positive");
  spec.output = parse_output(j);
  return spec;
}

TriMesh build_mesh(const MeshSpec& spec) {
  if (spec.structured) return generate_structured(spec.nx, spec.ny, spec.rect);
  return read_mesh(spec.file);
}

void write_vtk(const std::string& path, const Discretization& disc, const State& state) {
  const FESpace& v = disc.velocity;
  const TriMesh& mesh = *disc.mesh;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  char buf[160];

  out << "# vtk DataFile Version 2.0\n";
  out << "projflow state m=" << state.m << " t=" << state.t << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  // P2: points are the dof coordinates and each triangle is split into the
  // four midpoint children; P1 falls back to the plain triangulation.
  const bool quadratic = (v.degree == 2);
  const int npts = v.n_dofs;
  out << "POINTS " << npts << " double\n";
  for (int d = 0; d < npts; ++d) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", v.dof_coords[d][0], v.dof_coords[d][1]);
    out << buf;
  }

  std::vector<std::array<int, 3>> cells;
  if (quadratic) {
    cells.reserve(4 * mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto& cd = v.cell_dofs[t];  // v0 v1 v2 m12 m20 m01
      cells.push_back({cd[0], cd[5], cd[4]});
      cells.push_back({cd[5], cd[1], cd[3]});
      cells.push_back({cd[4], cd[3], cd[2]});
      cells.push_back({cd[5], cd[3], cd[4]});
    }
  } else {
    for (const auto& t : mesh.triangles) cells.push_back({t[0], t[1], t[2]});
  }
  out << "CELLS " << cells.size() << ' ' << 4 * cells.size() << "\n";
  for (const auto& c : cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << "\n";
  out << "CELL_TYPES " << cells.size() << "\n";
  for (std::size_t c = 0; c < cells.size(); ++c) out << "5\n";

  out << "POINT_DATA " << npts << "\n";
  out << "VECTORS velocity double\n";
  for (int d = 0; d < npts; ++d) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", state.u_tilde[d],
                  state.u_tilde[v.n_dofs + d]);
    out << buf;
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  const FESpace& ps = disc.pressure;
  for (int d = 0; d < npts; ++d) {
    double val = 0.0;
    if (d < mesh.n_vertices()) {
      val = state.p[d];
    } else {
      const auto& e = mesh.edges[d - mesh.n_vertices()];
      val = 0.5 * (state.p[e[0]] + state.p[e[1]]);
    }
    (void)ps;
    std::snprintf(buf, sizeof buf, "%.17g\n", val);
    out << buf;
  }
}

void write_checkpoint(const std::string& path, const State& state, SchemeKind scheme,
                      std::uint64_t mesh_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  char buf[64];
  out << "projflow checkpoint v1\n";
  out << "m " << state.m << "\n";
  std::snprintf(buf, sizeof buf, "t %.17g\n", state.t);
  out << buf;
  out << "scheme " << scheme_name(scheme) << "\n";
  std::snprintf(buf, sizeof buf, "mesh_hash %016llx\n", static_cast<unsigned long long>(mesh_hash));
  out << buf;
  auto dump = [&out, &buf](const char* name, const std::vector<double>& v) {
    out << name << ' ' << v.size() << "\n";
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.17g\n", x);
      out << buf;
    }
  };
  dump("u_tilde", state.u_tilde);
  dump("u_a", state.u.a);
  dump("u_c", state.u.c);
  dump("p", state.p);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "projflow checkpoint v1")
    throw std::runtime_error("checkpoint '" + path + "': bad header '" + line + "'");
  Checkpoint cp;
  std::string key;
  in >> key >> cp.m;
  in >> key >> cp.state.t;
  cp.t = cp.state.t;
  in >> key >> cp.scheme;
  in >> key >> std::hex >> cp.mesh_hash >> std::dec;
  auto read_vec = [&in, &path](std::vector<double>& v) {
    std::string name;
    std::size_t n = 0;
    in >> name >> n;
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      if (!(in >> v[i])) throw std::runtime_error("checkpoint '" + path + "': truncated data");
  };
  read_vec(cp.state.u_tilde);
  read_vec(cp.state.u.a);
  read_vec(cp.state.u.c);
  read_vec(cp.state.p);
  cp.state.m = cp.m;
  return cp;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_manifest(const std::string& path, const RunSpec& spec, const std::string& config_json,
                    const TriMesh& mesh, const PhaseTimings& timings,
                    const std::vector<std::string>& outputs) {
  json j;
  j["config"] = json::parse(config_json, nullptr, true, true);
  j["mesh"] = {{"vertices", mesh.n_vertices()},
               {"triangles", mesh.n_triangles()},
               {"h", mesh.h},
               {"refinement_level", mesh.refinement_level}};
  char hashbuf[32];
  std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config_json) ^ mesh.content_hash()));
  j["input_hash"] = hashbuf;
  j["scheme"] = scheme_name(spec.sim.scheme);
  j["timings"] = {{"setup_s", timings.setup_s},
                  {"timestepping_s", timings.timestepping_s},
                  {"output_s", timings.output_s}};
  j["outputs"] = outputs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

} // namespace projflow
