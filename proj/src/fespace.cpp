#include "projflow/fespace.hpp"

#include "projflow/kernels.hpp"
#include "projflow/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace projflow {

const QuadratureRule& QuadratureRule::triangle_degree6() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.exactness_degree = 6;
    // 12-point symmetric rule (Dunavant), weights normalized to area 1/2
    struct Orbit {
      double a, b, w;
      int mult;
    };
    const Orbit orbits[] = {
        {0.873821971016996, 0.063089014491502, 0.050844906370207, 3},
        {0.501426509658179, 0.249286745170910, 0.116786275726379, 3},
        {0.636502499121399, 0.310352451033785, 0.082851075618374, 6},
    };
    for (const auto& o : orbits) {
      if (o.mult == 3) {
        r.points.push_back({o.a, o.b, o.b});
        r.points.push_back({o.b, o.a, o.b});
        r.points.push_back({o.b, o.b, o.a});
        for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * o.w);
      } else {
        const double c = 1.0 - o.a - o.b;
        const double perms[6][3] = {{o.a, o.b, c}, {o.a, c, o.b}, {o.b, o.a, c},
                                    {o.b, c, o.a}, {c, o.a, o.b}, {c, o.b, o.a}};
        for (const auto& p : perms) {
          r.points.push_back({p[0], p[1], p[2]});
          r.weights.push_back(0.5 * o.w);
        }
      }
    }
    return r;
  }();
  return rule;
}

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n >= 1 required");
  x.resize(n);
  w.resize(n);
  // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1]
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      if (n == 1) p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? t : p1;
      pp = n * (t * pn - p0) / (t * t - 1.0);
      const double dt = pn / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    const double weight = 2.0 / ((1.0 - t * t) * pp * pp);
    x[i] = 0.5 * (1.0 - t);        // mirror ordering is symmetric
    x[n - 1 - i] = 0.5 * (1.0 + t);
    w[i] = 0.5 * weight;
    w[n - 1 - i] = 0.5 * weight;
  }
}

std::vector<int> FESpace::vector_boundary_dofs() const {
  std::vector<int> v;
  v.reserve(2 * boundary_dofs.size());
  for (int d : boundary_dofs) v.push_back(d);
  for (int d : boundary_dofs) v.push_back(n_dofs + d);
  return v;
}

FESpace build_space(const TriMesh& mesh, int degree, Constraint constraint) {
  if (degree != 1 && degree != 2) throw std::invalid_argument("build_space: degree must be 1 or 2");
  FESpace s;
  s.mesh = &mesh;
  s.degree = degree;
  s.constraint = constraint;
  const int nv = mesh.n_vertices();
  s.n_dofs = (degree == 1) ? nv : nv + mesh.n_edges();

  s.dof_coords.resize(s.n_dofs);
  for (int v = 0; v < nv; ++v) s.dof_coords[v] = mesh.vertices[v];
  if (degree == 2)
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const auto& a = mesh.vertices[mesh.edges[e][0]];
      const auto& b = mesh.vertices[mesh.edges[e][1]];
      s.dof_coords[nv + e] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    }

  s.cell_dofs.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    s.cell_dofs[t] = {tri[0], tri[1], tri[2], 0, 0, 0};
    if (degree == 2)
      for (int k = 0; k < 3; ++k) s.cell_dofs[t][3 + k] = nv + mesh.tri_edges[t][k];
  }

  s.is_boundary.assign(s.n_dofs, 0);
  if (constraint == Constraint::zero_trace) {
    std::vector<std::array<int, 2>> bset;
    bset.reserve(mesh.boundary_edges.size());
    for (const auto& be : mesh.boundary_edges) {
      s.is_boundary[be[0]] = 1;
      s.is_boundary[be[1]] = 1;
      bset.push_back({std::min(be[0], be[1]), std::max(be[0], be[1])});
    }
    if (degree == 2) {
      std::sort(bset.begin(), bset.end());
      for (int e = 0; e < mesh.n_edges(); ++e)
        if (std::binary_search(bset.begin(), bset.end(), mesh.edges[e])) s.is_boundary[nv + e] = 1;
    }
    for (int d = 0; d < s.n_dofs; ++d)
      if (s.is_boundary[d]) s.boundary_dofs.push_back(d);
  }
  return s;
}

FEFunction FEFunction::zero(const FESpace& s, int arity) {
  FEFunction f;
  f.space = &s;
  f.arity = arity;
  f.coeffs.assign(static_cast<std::size_t>(arity) * s.n_dofs, 0.0);
  return f;
}

void shape_values(int degree, const std::array<double, 3>& lam, double* N) {
  if (degree == 1) {
    N[0] = lam[0];
    N[1] = lam[1];
    N[2] = lam[2];
    return;
  }
  N[0] = lam[0] * (2.0 * lam[0] - 1.0);
  N[1] = lam[1] * (2.0 * lam[1] - 1.0);
  N[2] = lam[2] * (2.0 * lam[2] - 1.0);
  N[3] = 4.0 * lam[1] * lam[2];
  N[4] = 4.0 * lam[2] * lam[0];
  N[5] = 4.0 * lam[0] * lam[1];
}

void shape_grads_bary(int degree, const std::array<double, 3>& lam, double grad[6][3]) {
  for (int a = 0; a < 6; ++a)
    for (int k = 0; k < 3; ++k) grad[a][k] = 0.0;
  if (degree == 1) {
    grad[0][0] = grad[1][1] = grad[2][2] = 1.0;
    return;
  }
  for (int k = 0; k < 3; ++k) grad[k][k] = 4.0 * lam[k] - 1.0;
  grad[3][1] = 4.0 * lam[2];
  grad[3][2] = 4.0 * lam[1];
  grad[4][2] = 4.0 * lam[0];
  grad[4][0] = 4.0 * lam[2];
  grad[5][0] = 4.0 * lam[1];
  grad[5][1] = 4.0 * lam[0];
}

CellGeometry cell_geometry(const TriMesh& mesh, int t) {
  const auto& p0 = mesh.vertices[mesh.triangles[t][0]];
  const auto& p1 = mesh.vertices[mesh.triangles[t][1]];
  const auto& p2 = mesh.vertices[mesh.triangles[t][2]];
  const double twoA = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  CellGeometry g;
  g.jac = twoA;
  g.grad_lambda[0] = {(p1[1] - p2[1]) / twoA, (p2[0] - p1[0]) / twoA};
  g.grad_lambda[1] = {(p2[1] - p0[1]) / twoA, (p0[0] - p2[0]) / twoA};
  g.grad_lambda[2] = {(p0[1] - p1[1]) / twoA, (p1[0] - p0[0]) / twoA};
  return g;
}

std::array<double, 2> evaluate(const FEFunction& f, int tri_index,
                               const std::array<double, 3>& bary) {
  const FESpace& s = *f.space;
  if (tri_index < 0 || tri_index >= s.mesh->n_triangles())
    throw std::out_of_range("evaluate: triangle index out of range");
  double N[6];
  shape_values(s.degree, bary, N);
  const int nd = s.dofs_per_cell();
  std::array<double, 2> val = {0.0, 0.0};
  for (int a = 0; a < nd; ++a) {
    const int dof = s.cell_dofs[tri_index][a];
    val[0] += f.coeffs[dof] * N[a];
    if (f.arity == 2) val[1] += f.coeffs[s.n_dofs + dof] * N[a];
  }
  return val;
}

void evaluate_gradient(const FEFunction& f, int tri_index, const std::array<double, 3>& bary,
                       double g[2][2]) {
  const FESpace& s = *f.space;
  double dN[6][3];
  shape_grads_bary(s.degree, bary, dN);
  const CellGeometry geo = cell_geometry(*s.mesh, tri_index);
  const int nd = s.dofs_per_cell();
  g[0][0] = g[0][1] = g[1][0] = g[1][1] = 0.0;
  for (int a = 0; a < nd; ++a) {
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < 3; ++k) {
      gx += dN[a][k] * geo.grad_lambda[k][0];
      gy += dN[a][k] * geo.grad_lambda[k][1];
    }
    const int dof = s.cell_dofs[tri_index][a];
    g[0][0] += f.coeffs[dof] * gx;
    g[0][1] += f.coeffs[dof] * gy;
    if (f.arity == 2) {
      g[1][0] += f.coeffs[s.n_dofs + dof] * gx;
      g[1][1] += f.coeffs[s.n_dofs + dof] * gy;
    }
  }
}

namespace {

// rhs_c[i] = (target_c, phi_i) by quadrature
void project_rhs(const FESpace& s, const std::function<std::array<double, 2>(double, double)>& f,
                 int arity, std::vector<std::vector<double>>& rhs) {
  const QuadratureRule& q = QuadratureRule::triangle_degree6();
  rhs.assign(arity, std::vector<double>(s.n_dofs, 0.0));
  const int nd = s.dofs_per_cell();
  std::vector<std::array<double, 6>> basis(q.points.size());
  for (std::size_t k = 0; k < q.points.size(); ++k)
    shape_values(s.degree, q.points[k], basis[k].data());
  for (int t = 0; t < s.mesh->n_triangles(); ++t) {
    const CellGeometry geo = cell_geometry(*s.mesh, t);
    const auto& tri = s.mesh->triangles[t];
    const auto& p0 = s.mesh->vertices[tri[0]];
    const auto& p1 = s.mesh->vertices[tri[1]];
    const auto& p2 = s.mesh->vertices[tri[2]];
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const auto& lam = q.points[k];
      const double x = lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0];
      const double y = lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1];
      const auto val = f(x, y);
      const double wq = q.weights[k] * geo.jac;
      for (int a = 0; a < nd; ++a) {
        const int dof = s.cell_dofs[t][a];
        for (int c = 0; c < arity; ++c) rhs[c][dof] += wq * val[c] * basis[k][a];
      }
    }
  }
}

FEFunction project_impl(const FESpace& space, const CsrMatrix& mass, int arity,
                        const std::function<std::array<double, 2>(double, double)>& f) {
  if (mass.rows != space.n_dofs) throw std::invalid_argument("l2_project: mass matrix size mismatch");
  std::vector<std::vector<double>> rhs;
  project_rhs(space, f, arity, rhs);
  SolverConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.max_iter = 20000;
  FEFunction out;
  out.space = &space;
  out.arity = arity;
  out.coeffs.resize(static_cast<std::size_t>(arity) * space.n_dofs);
  for (int c = 0; c < arity; ++c) {
    if (space.constraint == Constraint::zero_trace)
      for (int d : space.boundary_dofs) rhs[c][d] = 0.0;
    std::vector<double> x = solve_cg(mass, rhs[c], cfg);
    std::copy(x.begin(), x.end(), out.coeffs.begin() + static_cast<std::size_t>(c) * space.n_dofs);
  }
  if (space.constraint == Constraint::zero_mean) {
    for (int c = 0; c < arity; ++c) {
      FEFunction comp;
      comp.space = &space;
      comp.arity = 1;
      comp.coeffs.assign(out.coeffs.begin() + static_cast<std::size_t>(c) * space.n_dofs,
                         out.coeffs.begin() + static_cast<std::size_t>(c + 1) * space.n_dofs);
      const double m = mean_value(comp);
      for (int d = 0; d < space.n_dofs; ++d)
        out.coeffs[static_cast<std::size_t>(c) * space.n_dofs + d] -= m;
    }
  }
  return out;
}

} // namespace

FEFunction l2_project(const VectorField& target, const FESpace& space, const CsrMatrix& mass) {
  return project_impl(space, mass, 2, target);
}

FEFunction l2_project_scalar(const ScalarField& target, const FESpace& space,
                             const CsrMatrix& mass) {
  auto wrap = [&target](double x, double y) { return std::array<double, 2>{target(x, y), 0.0}; };
  return project_impl(space, mass, 1, wrap);
}

VectorField field_from_fe(const FEFunction& f) {
  const FEFunction fn = f;  // value copy; the space/mesh must outlive the view
  return [fn](double x, double y) -> std::array<double, 2> {
    const TriMesh& mesh = *fn.space->mesh;
    int best = 0;
    double best_min = -1e300;
    std::array<double, 3> best_lam{};
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const CellGeometry geo = cell_geometry(mesh, t);
      const auto& p0 = mesh.vertices[mesh.triangles[t][0]];
      std::array<double, 3> lam;
      lam[1] = geo.grad_lambda[1][0] * (x - p0[0]) + geo.grad_lambda[1][1] * (y - p0[1]);
      lam[2] = geo.grad_lambda[2][0] * (x - p0[0]) + geo.grad_lambda[2][1] * (y - p0[1]);
      lam[0] = 1.0 - lam[1] - lam[2];
      const double lo = std::min({lam[0], lam[1], lam[2]});
      if (lo > best_min) {
        best_min = lo;
        best = t;
        best_lam = lam;
      }
      if (lo >= -1e-12) break;  // inside this triangle
    }
    return evaluate(fn, best, best_lam);
  };
}

namespace {

template <typename F>
double quad_sum(const TriMesh& mesh, F&& integrand) {
  const QuadratureRule& q = QuadratureRule::triangle_degree6();
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const CellGeometry geo = cell_geometry(mesh, t);
    for (std::size_t k = 0; k < q.points.size(); ++k)
      total += q.weights[k] * geo.jac * integrand(t, q.points[k]);
  }
  return total;
}

} // namespace

double l2_norm(const FEFunction& f) {
  const double v = quad_sum(*f.space->mesh, [&](int t, const std::array<double, 3>& lam) {
    const auto u = evaluate(f, t, lam);
    return u[0] * u[0] + (f.arity == 2 ? u[1] * u[1] : 0.0);
  });
  return std::sqrt(std::max(v, 0.0));
}

double h1_seminorm(const FEFunction& f) {
  const double v = quad_sum(*f.space->mesh, [&](int t, const std::array<double, 3>& lam) {
    double g[2][2];
    evaluate_gradient(f, t, lam, g);
    double s = g[0][0] * g[0][0] + g[0][1] * g[0][1];
    if (f.arity == 2) s += g[1][0] * g[1][0] + g[1][1] * g[1][1];
    return s;
  });
  return std::sqrt(std::max(v, 0.0));
}

double l2_inner(const FEFunction& f, const FEFunction& g) {
  if (f.space->mesh != g.space->mesh)
    throw std::invalid_argument("l2_inner: functions live on different meshes");
  if (f.arity != g.arity) throw std::invalid_argument("l2_inner: arity mismatch");
  return quad_sum(*f.space->mesh, [&](int t, const std::array<double, 3>& lam) {
    const auto a = evaluate(f, t, lam);
    const auto b = evaluate(g, t, lam);
    return a[0] * b[0] + (f.arity == 2 ? a[1] * b[1] : 0.0);
  });
}

double mean_value(const FEFunction& f) {
  const double integral = quad_sum(*f.space->mesh, [&](int t, const std::array<double, 3>& lam) {
    return evaluate(f, t, lam)[0];
  });
  return integral / f.space->mesh->area();
}

double l2_error(const FEFunction& f, const VectorField& exact) {
  const TriMesh& mesh = *f.space->mesh;
  const double v = quad_sum(mesh, [&](int t, const std::array<double, 3>& lam) {
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    const double x = lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0];
    const double y = lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1];
    const auto u = evaluate(f, t, lam);
    const auto e = exact(x, y);
    const double dx = u[0] - e[0];
    const double dy = (f.arity == 2 ? u[1] : 0.0) - e[1];
    return dx * dx + dy * dy;
  });
  return std::sqrt(std::max(v, 0.0));
}

double l2_norm_of_field(const TriMesh& mesh, const VectorField& f) {
  const double v = quad_sum(mesh, [&](int t, const std::array<double, 3>& lam) {
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    const double x = lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0];
    const double y = lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1];
    const auto e = f(x, y);
    return e[0] * e[0] + e[1] * e[1];
  });
  return std::sqrt(std::max(v, 0.0));
}

} // namespace projflow
