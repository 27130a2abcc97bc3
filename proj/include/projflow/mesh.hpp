#ifndef PROJFLOW_MESH_HPP
#define PROJFLOW_MESH_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace projflow {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

// Conforming simplicial triangulation of a 2D polygonal domain. Immutable
// after construction; safe to share read-only across threads.
struct TriMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;        // CCW vertex triples
  std::vector<std::array<int, 2>> boundary_edges;   // vertex pairs
  double h = 0.0;                                   // max triangle diameter
  int refinement_level = 0;

  // Derived connectivity, built by finalize():
  std::vector<std::array<int, 2>> edges;      // unique sorted pairs, lexicographic order
  std::vector<std::array<int, 3>> tri_edges;  // per triangle: edge ids opposite v0,v1,v2

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  double triangle_area(int t) const;          // signed
  double triangle_diameter(int t) const;
  double area() const;                        // sum of triangle areas
  // max diameter / min inscribed-circle diameter over all triangles
  double quasi_uniformity_ratio() const;
  std::uint64_t content_hash() const;

  // Builds edge connectivity, re-derives boundary edges and validates all
  // invariants. Throws MeshError on a nonconforming mesh. Inverted triangles
  // are reoriented with a warning on stderr; exceeding the quasi-uniformity
  // bound warns but does not fail.
  void finalize(double quasi_uniformity_bound);
  void finalize();
};

TriMesh generate_structured(int nx, int ny, const Rect& domain = Rect{});
TriMesh refine_uniform(const TriMesh& mesh);

// Plain-text format, see README: "trimesh v1" header, counts, vertex,
// triangle and boundary-edge blocks; '#' starts a comment.
TriMesh read_mesh(const std::string& path);
void write_mesh(const TriMesh& mesh, const std::string& path);

// Warn (stderr) if the ratio exceeds the bound; never an error.
constexpr double kQuasiUniformityBound = 10.0;

} // namespace projflow

#endif
