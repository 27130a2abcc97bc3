#include "projflow/fields.hpp"
#include "projflow/runio.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace projflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int worker_threads() {
  const char* env = std::getenv("PROJFLOW_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

int cmd_run(const std::string& config_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunSpec spec = parse_run_config(config_path);
  const TriMesh mesh = build_mesh(spec.mesh);
  const Discretization disc(mesh);
  PhaseTimings timings;
  timings.setup_s = seconds_since(t0);

  fs::create_directories(spec.output.dir);
  std::vector<std::string> outputs;
  const std::string ledger_path = (fs::path(spec.output.dir) / spec.output.ledger).string();

  const auto t1 = std::chrono::steady_clock::now();
  StepCallback cb;
  if (spec.output.checkpoint_stride > 0 || spec.output.vtk_stride > 0) {
    cb = [&](const State& st) {
      if (spec.output.checkpoint_stride > 0 && st.m % spec.output.checkpoint_stride == 0) {
        const std::string p =
            (fs::path(spec.output.dir) / ("state_" + std::to_string(st.m) + ".chk")).string();
        write_checkpoint(p, st, spec.sim.scheme, mesh.content_hash());
        outputs.push_back(p);
      }
      if (spec.output.vtk_stride > 0 && st.m % spec.output.vtk_stride == 0) {
        const std::string p =
            (fs::path(spec.output.dir) / ("state_" + std::to_string(st.m) + ".vtk")).string();
        write_vtk(p, disc, st);
        outputs.push_back(p);
      }
    };
  }
  const RunResult res = run(spec.sim, disc, cb);
  timings.timestepping_s = seconds_since(t1);

  const auto t2 = std::chrono::steady_clock::now();
  {
    std::ofstream out(ledger_path);
    out << res.ledger.to_csv();
  }
  outputs.push_back(ledger_path);
  const std::string manifest_path = (fs::path(spec.output.dir) / "manifest.json").string();
  timings.output_s = seconds_since(t2);
  write_manifest(manifest_path, spec, slurp(config_path), mesh, timings, outputs);

  std::printf("run complete: %d steps, ledger %s\n",
              static_cast<int>(res.ledger.rows.size()) - 1, ledger_path.c_str());
  std::printf("  max ledger residual (rel)   %.3e\n", res.checks.max_ledger_residual_rel);
  std::printf("  max ortho residual (rel)    %.3e\n", res.checks.max_ortho_residual_rel);
  std::printf("  max weak-div residual       %.3e\n", res.checks.max_div_residual);
  if (spec.sim.scheme == SchemeKind::chorin_darcy)
    std::printf("  beta_h %.6g  C_P %.6g  pressure-bound violations %d\n", res.checks.beta_h,
                res.checks.c_poincare, res.checks.pressure_bound_violations);
  return kExitOk;
}

int cmd_study(const std::string& config_path) {
  const StudySpec spec = parse_study_config(config_path);
  fs::create_directories(spec.output.dir);

  std::vector<StudyReport> reports(spec.schemes.size());
  const int threads = worker_threads();
  if (threads > 1 && spec.schemes.size() > 1) {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < spec.schemes.size(); ++i)
      pool.emplace_back([&, i] {
        reports[i] = convergence_study(builtin_case(spec.case_name), spec.schedule, spec.schemes[i]);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < spec.schemes.size(); ++i)
      reports[i] = convergence_study(builtin_case(spec.case_name), spec.schedule, spec.schemes[i]);
  }

  for (const auto& rep : reports) {
    const std::string base = "study_" + rep.case_name + "_" + scheme_name(rep.scheme);
    const std::string csv = (fs::path(spec.output.dir) / (base + ".csv")).string();
    std::ofstream out(csv);
    out << rep.to_csv();
    std::printf("%s", rep.to_text().c_str());
    std::printf("wrote %s\n", csv.c_str());
  }
  return kExitOk;
}

int cmd_lbb(const std::vector<int>& nxs, int ny, const std::string& pair) {
  for (int nx : nxs) {
    const TriMesh mesh = generate_structured(nx, ny > 0 ? ny : nx);
    const int vdeg = (pair == "p1p1") ? 1 : 2;
    const FESpace vel = build_space(mesh, vdeg, Constraint::zero_trace);
    const FESpace pre = build_space(mesh, 1, Constraint::zero_mean);
    const OperatorSet ops = make_operator_set(vel, pre);
    const double beta = estimate_lbb(ops.A_u_c, ops.B0, ops.M_p);
    std::printf("nx=%d pair=%s beta_h=%.17g\n", nx, pair.c_str(), beta);
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const RunSpec spec = parse_run_config(config_path);
  const TriMesh mesh = build_mesh(spec.mesh);
  const CouplingStatus st =
      check_coupling(mesh.h, spec.sim.dt, spec.sim.coupling_exponent, 1.0);
  std::printf("config ok: scheme=%s N=%d h=%.6g dt=%.6g\n", scheme_name(spec.sim.scheme).c_str(),
              spec.sim.n_steps(), mesh.h, spec.sim.dt);
  std::printf("coupling h^%d vs sqrt(dt): %s\n", spec.sim.coupling_exponent,
              st == CouplingStatus::ok ? "ok" : "warn");
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"projflow: finite-element projection schemes for incompressible flow"};
  app.require_subcommand(1);

  std::string run_config, study_config, validate_config_path;
  std::vector<int> lbb_nx;
  int lbb_ny = 0;
  std::string lbb_pair = "p2p1";

  CLI::App* c_run = app.add_subcommand("run", "execute a time-stepping run");
  c_run->add_option("config", run_config, "run config JSON")->required();
  CLI::App* c_study = app.add_subcommand("study", "convergence study");
  c_study->add_option("config", study_config, "study config JSON")->required();
  CLI::App* c_lbb = app.add_subcommand("lbb", "inf-sup constant estimate");
  c_lbb->add_option("--nx", lbb_nx, "structured subdivisions (repeatable)")->required();
  c_lbb->add_option("--ny", lbb_ny, "y subdivisions (default nx)");
  c_lbb->add_option("--pair", lbb_pair, "element pair: p2p1 or p1p1")
      ->check(CLI::IsMember({"p2p1", "p1p1"}));
  CLI::App* c_val = app.add_subcommand("validate", "validate a run config without running");
  c_val->add_option("config", validate_config_path, "run config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(run_config);
    if (c_study->parsed()) return cmd_study(study_config);
    if (c_lbb->parsed()) return cmd_lbb(lbb_nx, lbb_ny, lbb_pair);
    if (c_val->parsed()) return cmd_validate(validate_config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error in field '%s': %s\n", e.field.c_str(), e.what());
    return kExitConfig;
  } catch (const MeshError& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s (residual %.3e after %d iterations)\n", e.what(),
                 e.residual, e.iterations);
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
