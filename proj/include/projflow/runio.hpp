#ifndef PROJFLOW_RUNIO_HPP
#define PROJFLOW_RUNIO_HPP

#include "projflow/scheme.hpp"
#include "projflow/verification.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace projflow {

struct MeshSpec {
  bool structured = true;
  int nx = 8, ny = 8;
  Rect rect;
  std::string file;  // used when !structured
};

struct OutputSpec {
  std::string dir = ".";
  std::string ledger = "ledger.csv";
  int checkpoint_stride = 0;  // 0 disables
  int vtk_stride = 0;
};

struct RunSpec {
  SimulationConfig sim;
  MeshSpec mesh;
  OutputSpec output;
};

// Parses and validates a run config; throws ConfigError naming the field.
RunSpec parse_run_config(const std::string& path);

struct StudySpec {
  std::string case_name = "case_a";
  std::vector<SchemeKind> schemes;
  StudySchedule schedule;
  OutputSpec output;
};
StudySpec parse_study_config(const std::string& path);

TriMesh build_mesh(const MeshSpec& spec);

// Legacy VTK (version 2.0, ASCII, UNSTRUCTURED_GRID). P2 velocities are
// written on the midpoint sub-triangulation; pressure is interpolated there.
void write_vtk(const std::string& path, const Discretization& disc, const State& state);

// Versioned plain-text state dump.
void write_checkpoint(const std::string& path, const State& state, SchemeKind scheme,
                      std::uint64_t mesh_hash);
struct Checkpoint {
  int m = 0;
  double t = 0.0;
  std::string scheme;
  std::uint64_t mesh_hash = 0;
  State state;
};
Checkpoint read_checkpoint(const std::string& path);

struct PhaseTimings {
  double setup_s = 0.0;
  double timestepping_s = 0.0;
  double output_s = 0.0;
};

void write_manifest(const std::string& path, const RunSpec& spec, const std::string& config_json,
                    const TriMesh& mesh, const PhaseTimings& timings,
                    const std::vector<std::string>& outputs);

std::uint64_t fnv1a(const std::string& bytes);

} // namespace projflow

#endif
