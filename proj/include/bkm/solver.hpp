#pragma once

// Boundary knot method for Laplace problems.
//
// The Laplacian is shifted into a Helmholtz-like operator with an artificial
// parameter delta,
//   nabla^2 u + delta^2 u = f + delta^2 u      (Helmholtz variant)
//   nabla^2 u - delta^2 u = f - delta^2 u      (modified Helmholtz variant)
// and the homogeneous part is expanded in the nonsingular zero-order general
// solution u0 centred at the boundary knots (symmetric form):
//   u_h(x) = sum_{s in D} a_s u0(|x - s|) - sum_{s in N} a_s du0(|x - s|)/dn_s
//
// Simplified mode drops the particular solution and collocates the boundary
// conditions only. Full mode adds a dual-reciprocity particular solution,
// interpolating the effective source with the order-1 general solution and
// integrating it with the order-2 one, and iterates on the unknown u until
// the nodal values settle.

#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bkm/errors.hpp"
#include "bkm/geometry.hpp"
#include "bkm/gensol.hpp"
#include "bkm/linalg.hpp"
#include "bkm/manufactured.hpp"
#include "bkm/vec.hpp"

namespace bkm {

using linalg::DenseMatrix;
using linalg::Vector;

enum class Variant { Helmholtz, ModifiedHelmholtz };
enum class Mode { Simplified, Full };
/// Symmetric is the default; Unsymmetric expands u_h in plain u0 columns for
/// every knot and is kept for comparison runs.
enum class Formulation { Symmetric, Unsymmetric };

inline std::string to_string(Variant v) {
  return v == Variant::Helmholtz ? "helmholtz" : "modified_helmholtz";
}
inline std::string to_string(Mode m) { return m == Mode::Simplified ? "simplified" : "full"; }

struct BkmProblem {
  geometry::Domain domain = geometry::Ellipse{};
  Variant variant = Variant::Helmholtz;
  double delta = 0.1;
  std::function<double(Vec3)> dirichlet_data;
  /// N(x) given the point and its outward normal.
  std::function<double(Vec3, Vec3)> neumann_data;
  /// Source term f; empty means f = 0.
  std::function<double(Vec3)> source;
  std::optional<std::function<double(Vec3)>> exact;
  Formulation formulation = Formulation::Symmetric;
  /// Tikhonov parameter; 0 solves the collocation system by plain LU.
  double regularization = 0.0;

  int dim() const { return geometry::dimension(domain); }

  gensol::OperatorFamily family() const {
    return gensol::OperatorFamily::make(variant == Variant::Helmholtz
                                            ? gensol::FamilyKind::Helmholtz
                                            : gensol::FamilyKind::ModifiedHelmholtz,
                                        delta, dim());
  }

  gensol::Kernel kernel(int order) const { return gensol::Kernel(family(), order); }

  double source_at(Vec3 x) const { return source ? source(x) : 0.0; }

  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("BkmProblem: delta must be > 0");
    if (!dirichlet_data) throw DomainError("BkmProblem: Dirichlet data missing");
    if (!(regularization >= 0.0)) throw DomainError("BkmProblem: regularization must be >= 0");
    geometry::validate(domain);
  }

  /// Problem whose boundary data come from a manufactured solution.
  static BkmProblem manufactured(geometry::Domain domain, Variant variant, double delta,
                                 const manufactured::ExactSolution& exact) {
    BkmProblem p;
    p.domain = std::move(domain);
    p.variant = variant;
    p.delta = delta;
    p.dirichlet_data = exact.value;
    p.neumann_data = [grad = exact.gradient](Vec3 x, Vec3 n) { return dot(grad(x), n); };
    p.exact = exact.value;
    return p;
  }
};

struct BkmSystem {
  DenseMatrix matrix;
  Vector rhs;
  geometry::KnotSet knots;
  Mode mode = Mode::Simplified;
  BkmProblem problem;
};

/// beta_j phi2(|x - x_j|), the particular solution built on DRM nodes.
struct ParticularSolution {
  Vector beta;
  std::vector<Vec3> nodes;
  gensol::Kernel kernel;

  double operator()(Vec3 x) const {
    double u = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) u += beta[j] * gensol::value_entry(kernel, x, nodes[j]);
    return u;
  }

  double normal_derivative(Vec3 x, Vec3 n) const {
    double d = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      d += beta[j] * gensol::normal_entry(kernel, x, nodes[j], n);
    return d;
  }
};

struct BkmSolution {
  Vector alpha;
  std::optional<Vector> beta;
  std::optional<Vector> interior_values;
  geometry::KnotSet knots;
  BkmProblem problem;
  Mode mode = Mode::Simplified;
  gensol::Kernel kernel;
  std::optional<ParticularSolution> particular;
  double condition = 1.0;
  bool near_singular = false;
  int iterations = 0;
  /// Max-norm nodal update per full-mode iteration.
  std::vector<double> history;
};

namespace detail {

// Basis function of column s evaluated at x, and its derivative along n_x.
inline double column_value(const gensol::Kernel& k, Formulation f, const geometry::BoundaryKnot& s,
                           Vec3 x) {
  if (f == Formulation::Unsymmetric || s.bc == geometry::BcKind::Dirichlet)
    return gensol::value_entry(k, x, s.position);
  return -gensol::normal_entry(k, s.position, x, s.normal);
}

inline double column_normal(const gensol::Kernel& k, Formulation f, const geometry::BoundaryKnot& s,
                            Vec3 x, Vec3 n_x) {
  if (f == Formulation::Unsymmetric || s.bc == geometry::BcKind::Dirichlet)
    return gensol::normal_entry(k, x, s.position, n_x);
  return -gensol::mixed_entry(k, x, n_x, s.position, s.normal);
}

inline void check_knots(const geometry::KnotSet& knots) {
  if (knots.dirichlet.empty()) throw DomainError("BKM: at least one Dirichlet knot is required");
}

inline Vector linear_solve(const DenseMatrix& a, const Vector& b, double regularization,
                           linalg::SolveDiagnostics* diag) {
  return regularization > 0.0 ? linalg::tikhonov_solve(a, b, regularization, diag)
                              : linalg::lu_solve(a, b, diag);
}

// Rows of the boundary collocation block, right-hand sides supplied.
inline void fill_boundary_rows(DenseMatrix& m, const gensol::Kernel& k, Formulation f,
                               const std::vector<geometry::BoundaryKnot>& boundary) {
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const auto& row = boundary[i];
    for (std::size_t s = 0; s < boundary.size(); ++s) {
      m(i, s) = row.bc == geometry::BcKind::Dirichlet
                    ? column_value(k, f, boundary[s], row.position)
                    : column_normal(k, f, boundary[s], row.position, row.normal);
    }
  }
}

}  // namespace detail

/// Collocation of the boundary conditions with u = u_h:
///   Dirichlet row i:  sum_s psi_s(x_i)          = R(x_i)
///   Neumann row j:    sum_s d psi_s(x_j)/dn_j   = N(x_j)
inline BkmSystem assemble_simplified(const BkmProblem& problem, const geometry::KnotSet& knots) {
  problem.validate();
  detail::check_knots(knots);
  if (!knots.neumann.empty() && !problem.neumann_data)
    throw DomainError("BkmProblem: Neumann knots present but no Neumann data");
  const auto kernel = problem.kernel(0);
  const auto boundary = knots.boundary();
  const std::size_t n = boundary.size();
  BkmSystem sys{DenseMatrix(n, n), Vector(n), knots, Mode::Simplified, problem};
  detail::fill_boundary_rows(sys.matrix, kernel, problem.formulation, boundary);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = boundary[i];
    sys.rhs[i] = b.bc == geometry::BcKind::Dirichlet ? problem.dirichlet_data(b.position)
                                                     : problem.neumann_data(b.position, b.normal);
  }
  return sys;
}

inline BkmSolution solve(const BkmSystem& system) {
  linalg::SolveDiagnostics diag;
  const Vector x = detail::linear_solve(system.matrix, system.rhs, system.problem.regularization, &diag);
  const std::size_t nb = system.knots.boundary_count();
  BkmSolution sol{Vector(x.begin(), x.begin() + nb),
                  std::nullopt,
                  std::nullopt,
                  system.knots,
                  system.problem,
                  system.mode,
                  system.problem.kernel(0),
                  std::nullopt,
                  diag.condition,
                  diag.near_singular,
                  0,
                  {}};
  if (system.mode == Mode::Full) sol.interior_values = Vector(x.begin() + nb, x.end());
  return sol;
}

/// Homogeneous part u_h(x).
inline double evaluate_homogeneous(const BkmSolution& s, Vec3 x) {
  const auto boundary = s.knots.boundary();
  double u = 0.0;
  for (std::size_t k = 0; k < boundary.size(); ++k)
    u += s.alpha[k] * detail::column_value(s.kernel, s.problem.formulation, boundary[k], x);
  return u;
}

/// u(x) = u_h(x) (+ u_p(x) in full mode).
inline double evaluate(const BkmSolution& s, Vec3 x) {
  double u = evaluate_homogeneous(s, x);
  if (s.particular) u += (*s.particular)(x);
  return u;
}

/// Interpolation coefficients of f on `nodes` with basis phi(|x - x_j|).
inline Vector drm_fit(std::span<const double> f_values, std::span<const Vec3> nodes,
                      const gensol::Kernel& phi, linalg::SolveDiagnostics* diag = nullptr) {
  if (f_values.size() != nodes.size()) throw DomainError("drm_fit: value/node count mismatch");
  const std::size_t n = nodes.size();
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = gensol::value_entry(phi, nodes[i], nodes[j]);
  return linalg::lu_solve(a, f_values, diag);
}

inline ParticularSolution particular_solution(Vector beta, std::vector<Vec3> nodes,
                                              gensol::Kernel varphi) {
  if (beta.size() != nodes.size()) throw DomainError("particular_solution: size mismatch");
  return {std::move(beta), std::move(nodes), std::move(varphi)};
}

/// DRM nodes: boundary knots (Dirichlet, Neumann) then interior knots.
inline std::vector<Vec3> drm_nodes(const geometry::KnotSet& knots) {
  std::vector<Vec3> nodes;
  for (const auto& k : knots.boundary()) nodes.push_back(k.position);
  nodes.insert(nodes.end(), knots.interior.begin(), knots.interior.end());
  return nodes;
}

/// Full-mode system for a given particular solution. Unknowns are the
/// expansion coefficients followed by the interior values u_l:
///   Dirichlet rows:  sum psi_s(x_i)        = R(x_i) - u_p(x_i)
///   Neumann rows:    sum dpsi_s/dn(x_j)    = N(x_j) - du_p/dn(x_j)
///   interior rows:   sum psi_s(x_l) - u_l  = -u_p(x_l)
inline BkmSystem assemble_full(const BkmProblem& problem, const geometry::KnotSet& knots,
                               const ParticularSolution& up) {
  problem.validate();
  detail::check_knots(knots);
  const auto kernel = problem.kernel(0);
  const auto boundary = knots.boundary();
  const std::size_t nb = boundary.size(), ni = knots.interior.size();
  BkmSystem sys{DenseMatrix(nb + ni, nb + ni), Vector(nb + ni), knots, Mode::Full, problem};
  detail::fill_boundary_rows(sys.matrix, kernel, problem.formulation, boundary);
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& b = boundary[i];
    sys.rhs[i] = b.bc == geometry::BcKind::Dirichlet
                     ? problem.dirichlet_data(b.position) - up(b.position)
                     : problem.neumann_data(b.position, b.normal) - up.normal_derivative(b.position, b.normal);
  }
  for (std::size_t l = 0; l < ni; ++l) {
    const Vec3 x = knots.interior[l];
    for (std::size_t s = 0; s < nb; ++s)
      sys.matrix(nb + l, s) = detail::column_value(kernel, problem.formulation, boundary[s], x);
    sys.matrix(nb + l, nb + l) = -1.0;
    sys.rhs[nb + l] = -up(x);
  }
  return sys;
}

/// Fixed-point iteration of the full method. Iteration 0 is the simplified
/// solution; each further iteration refits the effective source
/// f +- delta^2 u at every node, rebuilds u_p and re-solves. Stops when
/// ||u_new - u_old||_inf <= tol (1 + ||u_old||_inf).
inline BkmSolution solve_full(const BkmProblem& problem, const geometry::KnotSet& knots,
                              int max_iter, double tol) {
  problem.validate();
  if (max_iter < 0) throw DomainError("solve_full: max_iter must be >= 0");
  BkmSolution sol = solve(assemble_simplified(problem, knots));
  if (max_iter == 0) return sol;
  if (knots.interior.empty()) throw DomainError("solve_full: at least one interior knot is required");

  const auto nodes = drm_nodes(knots);
  const auto boundary = knots.boundary();
  const std::size_t nb = boundary.size();
  const double sign = problem.variant == Variant::Helmholtz ? 1.0 : -1.0;
  const double d2 = problem.delta * problem.delta;
  const auto phi = problem.kernel(1);
  const auto varphi = problem.kernel(2);

  Vector u(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    u[j] = (j < nb && boundary[j].bc == geometry::BcKind::Dirichlet)
               ? problem.dirichlet_data(nodes[j])
               : evaluate(sol, nodes[j]);

  std::vector<double> history;
  for (int it = 1; it <= max_iter; ++it) {
    Vector g(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) g[j] = problem.source_at(nodes[j]) + sign * d2 * u[j];
    Vector beta = drm_fit(g, nodes, phi);
    auto up = particular_solution(beta, nodes, varphi);
    const BkmSystem sys = assemble_full(problem, knots, up);
    BkmSolution next = solve(sys);
    next.beta = std::move(beta);
    next.particular = std::move(up);
    next.iterations = it;

    Vector un(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j >= nb) un[j] = (*next.interior_values)[j - nb];
      else if (boundary[j].bc == geometry::BcKind::Dirichlet) un[j] = problem.dirichlet_data(nodes[j]);
      else un[j] = evaluate(next, nodes[j]);
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) diff = std::max(diff, std::abs(un[j] - u[j]));
    const double scale = 1.0 + linalg::norm_inf(u);
    history.push_back(diff);
    u = std::move(un);
    next.history = history;
    sol = std::move(next);
    if (diff <= tol * scale) return sol;
  }
  std::ostringstream msg;
  msg << "solve_full: no convergence after " << max_iter << " iterations (last update "
      << std::scientific << std::setprecision(3) << history.back() << ")";
  throw NonConvergenceError(msg.str(), history);
}

/// Pointwise error: relative where |u_exact| >= 0.001, absolute otherwise.
inline double pointwise_error(double numeric, double exact) {
  const double abs_err = std::abs(numeric - exact);
  return std::abs(exact) < 1e-3 ? abs_err : abs_err / std::abs(exact);
}

struct ErrorStats {
  double rms = 0.0;  // root mean square of the pointwise errors
  double max = 0.0;
};

inline ErrorStats error_stats(std::span<const double> numeric, std::span<const double> exact) {
  if (numeric.size() != exact.size() || numeric.empty())
    throw DomainError("error_norm: need matching, non-empty value lists");
  ErrorStats s;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double e = pointwise_error(numeric[i], exact[i]);
    s.rms += e * e;
    s.max = std::max(s.max, e);
  }
  s.rms = std::sqrt(s.rms / numeric.size());
  return s;
}

inline ErrorStats error_stats(const BkmSolution& solution, const std::function<double(Vec3)>& exact,
                              std::span<const Vec3> samples) {
  Vector num, ex;
  for (const Vec3& p : samples) {
    num.push_back(evaluate(solution, p));
    ex.push_back(exact(p));
  }
  return error_stats(num, ex);
}

inline double error_norm(std::span<const double> numeric, std::span<const double> exact) {
  return error_stats(numeric, exact).rms;
}

inline double error_norm(const BkmSolution& solution, const std::function<double(Vec3)>& exact,
                         std::span<const Vec3> samples) {
  return error_stats(solution, exact, samples).rms;
}

}  // namespace bkm
