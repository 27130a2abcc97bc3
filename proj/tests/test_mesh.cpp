#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projflow/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

using namespace projflow;

TEST_CASE("structured generator, minimal split") {
  const TriMesh m = generate_structured(1, 1);
  CHECK(m.n_triangles() == 2);
  CHECK(m.n_vertices() == 4);
  CHECK(m.boundary_edges.size() == 4);
  CHECK(m.n_edges() == 5);
  for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.triangle_area(t) > 0.0);
}

TEST_CASE("structured generator partitions the domain") {
  const TriMesh m = generate_structured(2, 2);
  CHECK(m.n_triangles() == 8);
  CHECK(m.n_vertices() == 9);
  CHECK(m.area() == 1.0);  // exact partition
}

TEST_CASE("mesh size and quasi-uniformity of the structured family") {
  const TriMesh m1 = generate_structured(1, 1);
  const TriMesh m4 = generate_structured(4, 4);
  CHECK(m4.h == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
  CHECK(m4.quasi_uniformity_ratio() ==
        doctest::Approx(m1.quasi_uniformity_ratio()).epsilon(1e-13));
  CHECK(m1.quasi_uniformity_ratio() == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("uniform refinement quarters triangles and halves h exactly") {
  const TriMesh coarse = generate_structured(1, 1);
  const TriMesh fine = refine_uniform(coarse);
  CHECK(fine.n_triangles() == 8);
  CHECK(fine.h == 0.5 * coarse.h);
  CHECK(fine.refinement_level == 1);

  const TriMesh finer = refine_uniform(fine);
  CHECK(finer.h == 0.25 * coarse.h);

  // conservation and shape invariance across three refinements
  TriMesh m = generate_structured(3, 2, Rect{0.0, 0.0, 2.0, 1.5});
  const double area0 = m.area();
  const double ratio0 = m.quasi_uniformity_ratio();
  for (int r = 0; r < 3; ++r) {
    m = refine_uniform(m);
    CHECK(m.area() == doctest::Approx(area0).epsilon(1e-12));
    CHECK(m.quasi_uniformity_ratio() == doctest::Approx(ratio0).epsilon(1e-12));
  }
}

TEST_CASE("edge incidence reproduces the stored boundary") {
  const TriMesh m = generate_structured(3, 3);
  TriMesh rebuilt;
  rebuilt.vertices = m.vertices;
  rebuilt.triangles = m.triangles;
  rebuilt.finalize();  // derives the boundary from scratch
  REQUIRE(rebuilt.boundary_edges.size() == m.boundary_edges.size());
  // stored list (canonicalized) must match the derived one
  auto canon = [](std::vector<std::array<int, 2>> v) {
    for (auto& e : v)
      if (e[0] > e[1]) std::swap(e[0], e[1]);
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(canon(m.boundary_edges) == canon(rebuilt.boundary_edges));
}

TEST_CASE("mesh file round trip is exact") {
  const TriMesh m = generate_structured(2, 2);
  const std::string path = "roundtrip_mesh.txt";
  write_mesh(m, path);
  const TriMesh r = read_mesh(path);
  CHECK(r.vertices == m.vertices);
  CHECK(r.triangles == m.triangles);
  CHECK(r.boundary_edges == m.boundary_edges);
  std::remove(path.c_str());
}

TEST_CASE("duplicate triangles are rejected naming the duplicate") {
  TriMesh m = generate_structured(1, 1);
  m.triangles.push_back(m.triangles[0]);
  m.boundary_edges.clear();
  bool threw = false;
  try {
    m.finalize();
  } catch (const MeshError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("duplicates") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("clockwise triangles in input are reoriented") {
  const std::string path = "cw_mesh.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "trimesh v1\n";
    out << "4 2 4\n";
    out << "0 0\n1 0\n1 1\n0 1\n";
    out << "0 2 1\n";  // clockwise
    out << "0 2 3\n";
    out << "0 1\n1 2\n2 3\n3 0\n";
  }
  const TriMesh m = read_mesh(path);
  for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.triangle_area(t) > 0.0);
  std::remove(path.c_str());
}

TEST_CASE("malformed mesh files report the line") {
  const std::string path = "bad_mesh.txt";
  {
    std::ofstream out(path);
    out << "trimesh v1\n4 2 4\n0 0\n1 0\n1 1\nnot_a_number 1\n";
  }
  bool threw = false;
  try {
    read_mesh(path);
  } catch (const MeshError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  CHECK(threw);
  std::remove(path.c_str());
}

TEST_CASE("invalid generator arguments") {
  CHECK_THROWS_AS(generate_structured(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(generate_structured(2, -1), std::invalid_argument);
  CHECK_THROWS_AS(generate_structured(2, 2, Rect{0, 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("content hash is stable and sensitive") {
  const TriMesh a = generate_structured(2, 2);
  const TriMesh b = generate_structured(2, 2);
  const TriMesh c = generate_structured(2, 3);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
}
