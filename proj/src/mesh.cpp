#include "projflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace projflow {

namespace {

std::array<int, 2> sorted_pair(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

} // namespace

double TriMesh::triangle_area(int t) const {
  const auto& p0 = vertices[triangles[t][0]];
  const auto& p1 = vertices[triangles[t][1]];
  const auto& p2 = vertices[triangles[t][2]];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double TriMesh::triangle_diameter(int t) const {
  const auto& p0 = vertices[triangles[t][0]];
  const auto& p1 = vertices[triangles[t][1]];
  const auto& p2 = vertices[triangles[t][2]];
  return std::max({dist(p0, p1), dist(p1, p2), dist(p2, p0)});
}

double TriMesh::area() const {
  double s = 0.0;
  for (int t = 0; t < n_triangles(); ++t) s += triangle_area(t);
  return s;
}

double TriMesh::quasi_uniformity_ratio() const {
  double max_diam = 0.0, min_insc = 1e300;
  for (int t = 0; t < n_triangles(); ++t) {
    const auto& p0 = vertices[triangles[t][0]];
    const auto& p1 = vertices[triangles[t][1]];
    const auto& p2 = vertices[triangles[t][2]];
    const double a = dist(p1, p2), b = dist(p2, p0), c = dist(p0, p1);
    const double area = std::abs(triangle_area(t));
    const double inscribed = 4.0 * area / (a + b + c);  // 2*inradius
    max_diam = std::max(max_diam, std::max({a, b, c}));
    min_insc = std::min(min_insc, inscribed);
  }
  return max_diam / min_insc;
}

std::uint64_t TriMesh::content_hash() const {
  // FNV-1a over vertex coordinates and triangle indices
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& v : vertices) mix(v.data(), sizeof(double) * 2);
  for (const auto& t : triangles) mix(t.data(), sizeof(int) * 3);
  return h;
}

void TriMesh::finalize() { finalize(kQuasiUniformityBound); }

void TriMesh::finalize(double quasi_uniformity_bound) {
  const int nv = n_vertices();
  for (int t = 0; t < n_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = triangles[t][k];
      if (v < 0 || v >= nv) throw MeshError("triangle " + std::to_string(t) + ": vertex index out of range");
    }
    const double a = triangle_area(t);
    if (a == 0.0) throw MeshError("triangle " + std::to_string(t) + " is degenerate");
    if (a < 0.0) {
      std::fprintf(stderr, "warning: triangle %d has clockwise orientation, reorienting\n", t);
      std::swap(triangles[t][1], triangles[t][2]);
    }
  }

  // duplicate triangles (same vertex set) break conformity
  {
    std::map<std::array<int, 3>, int> seen;
    for (int t = 0; t < n_triangles(); ++t) {
      std::array<int, 3> key = triangles[t];
      std::sort(key.begin(), key.end());
      auto [it, inserted] = seen.emplace(key, t);
      if (!inserted)
        throw MeshError("triangle " + std::to_string(t) + " duplicates triangle " +
                        std::to_string(it->second));
    }
  }

  std::map<std::array<int, 2>, int> edge_id;
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k) edge_id.emplace(sorted_pair(tri[k], tri[(k + 1) % 3]), 0);
  edges.clear();
  edges.reserve(edge_id.size());
  int id = 0;
  for (auto& [e, eid] : edge_id) {
    eid = id++;
    edges.push_back(e);
  }

  std::vector<int> incidence(edges.size(), 0);
  tri_edges.assign(triangles.size(), {});
  for (int t = 0; t < n_triangles(); ++t) {
    const auto& tri = triangles[t];
    // edge opposite local vertex k
    tri_edges[t][0] = edge_id[sorted_pair(tri[1], tri[2])];
    tri_edges[t][1] = edge_id[sorted_pair(tri[2], tri[0])];
    tri_edges[t][2] = edge_id[sorted_pair(tri[0], tri[1])];
    for (int k = 0; k < 3; ++k) ++incidence[tri_edges[t][k]];
  }
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (incidence[e] > 2)
      throw MeshError("edge (" + std::to_string(edges[e][0]) + "," + std::to_string(edges[e][1]) +
                      ") is shared by more than two triangles");

  // re-derive the boundary from the incidence map and check the stored list
  std::vector<std::array<int, 2>> derived;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (incidence[e] == 1) derived.push_back(edges[e]);
  if (!boundary_edges.empty()) {
    std::vector<std::array<int, 2>> stored;
    stored.reserve(boundary_edges.size());
    for (const auto& e : boundary_edges) stored.push_back(sorted_pair(e[0], e[1]));
    std::sort(stored.begin(), stored.end());
    if (stored != derived)
      throw MeshError("stored boundary edges do not match the edge-to-triangle incidence map");
  } else {
    boundary_edges = derived;
  }

  double hmax = 0.0;
  for (int t = 0; t < n_triangles(); ++t) hmax = std::max(hmax, triangle_diameter(t));
  if (h == 0.0) h = hmax;

  const double ratio = quasi_uniformity_ratio();
  if (ratio > quasi_uniformity_bound)
    std::fprintf(stderr, "warning: quasi-uniformity ratio %.3g exceeds bound %.3g\n", ratio,
                 quasi_uniformity_bound);
}

TriMesh generate_structured(int nx, int ny, const Rect& domain) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("generate_structured: nx, ny must be >= 1");
  if (domain.x1 <= domain.x0 || domain.y1 <= domain.y0)
    throw std::invalid_argument("generate_structured: degenerate rectangle");

  TriMesh m;
  const double dx = (domain.x1 - domain.x0) / nx;
  const double dy = (domain.y1 - domain.y0) / ny;
  m.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back({domain.x0 + i * dx, domain.y0 + j * dy});

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  // each cell split along the lower-left to upper-right diagonal
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }

  for (int i = 0; i < nx; ++i) m.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0)});
  for (int j = 0; j < ny; ++j) m.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1)});
  for (int i = 0; i < nx; ++i) m.boundary_edges.push_back({vid(i, ny), vid(i + 1, ny)});
  for (int j = 0; j < ny; ++j) m.boundary_edges.push_back({vid(0, j), vid(0, j + 1)});

  m.h = std::hypot(dx, dy);
  m.finalize();
  return m;
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh fine;
  fine.vertices = mesh.vertices;
  fine.vertices.resize(mesh.vertices.size() + mesh.edges.size());
  const int nv = mesh.n_vertices();
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto& a = mesh.vertices[mesh.edges[e][0]];
    const auto& b = mesh.vertices[mesh.edges[e][1]];
    fine.vertices[nv + e] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
  }

  fine.triangles.reserve(4 * mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const int m12 = nv + mesh.tri_edges[t][0];  // midpoint of edge (v1,v2)
    const int m20 = nv + mesh.tri_edges[t][1];
    const int m01 = nv + mesh.tri_edges[t][2];
    fine.triangles.push_back({tri[0], m01, m20});
    fine.triangles.push_back({m01, tri[1], m12});
    fine.triangles.push_back({m20, m12, tri[2]});
    fine.triangles.push_back({m01, m12, m20});
  }

  std::map<std::array<int, 2>, int> edge_lookup;
  for (int e = 0; e < mesh.n_edges(); ++e) edge_lookup[mesh.edges[e]] = e;
  for (const auto& be : mesh.boundary_edges) {
    const int mid = nv + edge_lookup[sorted_pair(be[0], be[1])];
    fine.boundary_edges.push_back({be[0], mid});
    fine.boundary_edges.push_back({mid, be[1]});
  }

  fine.h = 0.5 * mesh.h;  // midpoint refinement halves the diameter exactly
  fine.refinement_level = mesh.refinement_level + 1;
  fine.finalize();
  return fine;
}

namespace {

// strips '#' comments, returns tokens with their line numbers
struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<int> lines;
  std::size_t pos = 0;

  explicit TokenStream(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        tokens.push_back(tok);
        lines.push_back(lineno);
      }
    }
  }

  std::string next(const char* what) {
    if (pos >= tokens.size())
      throw MeshError(std::string("unexpected end of file while reading ") + what);
    return tokens[pos++];
  }
  int line() const { return pos > 0 ? lines[pos - 1] : 0; }

  long long next_int(const char* what) {
    const std::string t = next(what);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw MeshError("line " + std::to_string(line()) + ": expected integer " + what + ", got '" +
                      t + "'");
    }
  }
  double next_double(const char* what) {
    const std::string t = next(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw MeshError("line " + std::to_string(line()) + ": expected number " + what + ", got '" +
                      t + "'");
    }
  }
};

} // namespace

TriMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  TokenStream ts(in);

  const std::string magic = ts.next("header");
  const std::string version = ts.next("header version");
  if (magic != "trimesh" || version != "v1")
    throw MeshError("line " + std::to_string(ts.line()) + ": expected header 'trimesh v1'");

  const long long nv = ts.next_int("vertex count");
  const long long nt = ts.next_int("triangle count");
  const long long nb = ts.next_int("boundary edge count");
  if (nv < 3 || nt < 1 || nb < 3)
    throw MeshError("line " + std::to_string(ts.line()) + ": implausible mesh counts");

  TriMesh m;
  m.vertices.resize(nv);
  for (long long i = 0; i < nv; ++i) {
    m.vertices[i][0] = ts.next_double("vertex x");
    m.vertices[i][1] = ts.next_double("vertex y");
  }
  m.triangles.resize(nt);
  for (long long t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      const long long v = ts.next_int("triangle vertex");
      if (v < 0 || v >= nv)
        throw MeshError("line " + std::to_string(ts.line()) + ": triangle vertex index " +
                        std::to_string(v) + " out of range");
      m.triangles[t][k] = static_cast<int>(v);
    }
  m.boundary_edges.resize(nb);
  for (long long b = 0; b < nb; ++b)
    for (int k = 0; k < 2; ++k) {
      const long long v = ts.next_int("boundary edge vertex");
      if (v < 0 || v >= nv)
        throw MeshError("line " + std::to_string(ts.line()) + ": boundary vertex index out of range");
      m.boundary_edges[b][k] = static_cast<int>(v);
    }
  if (ts.pos != ts.tokens.size())
    throw MeshError("line " + std::to_string(ts.lines[ts.pos]) + ": trailing data in mesh file");

  m.finalize();
  return m;
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  out << "trimesh v1\n";
  out << mesh.n_vertices() << ' ' << mesh.n_triangles() << ' ' << mesh.boundary_edges.size()
      << '\n';
  char buf[80];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v[0], v[1]);
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) out << e[0] << ' ' << e[1] << '\n';
  if (!out) throw MeshError("write failed for '" + path + "'");
}

} // namespace projflow
