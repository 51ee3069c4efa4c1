#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bkm/geometry.hpp"
#include "bkm/manufactured.hpp"
#include "bkm/solver.hpp"
#include "oracles/cartesian_fd.hpp"

using namespace bkm;

namespace {

using geometry::Ellipse;

BkmProblem ellipse_problem(Variant v, double delta) {
  return BkmProblem::manufactured(Ellipse{2, 1}, v, delta, manufactured::laplace_2d());
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

}  // namespace

TEST(Solver, DirichletMatrixIsSymmetric) {
  for (auto v : {Variant::Helmholtz, Variant::ModifiedHelmholtz}) {
    const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 17);
    const auto sys = assemble_simplified(ellipse_problem(v, 0.3), knots);
    EXPECT_EQ(max_abs_diff(sys.matrix, sys.matrix.transposed()), 0.0);
  }
}

TEST(Solver, MixedMatrixIsSymmetric) {
  // Symmetric formulation on a Dirichlet/Neumann split keeps the matrix symmetric
  // up to the sign convention of the Neumann columns.
  const auto knots = geometry::place_boundary_knots(geometry::CubeWithEllipsoidCavity{}, 30);
  auto p = BkmProblem::manufactured(geometry::CubeWithEllipsoidCavity{}, Variant::Helmholtz, 0.2,
                                    manufactured::laplace_3d());
  const auto sys = assemble_simplified(p, knots);
  const std::size_t nd = knots.dirichlet.size(), n = knots.boundary_count();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double sign = ((i >= nd) != (j >= nd)) ? -1.0 : 1.0;
      worst = std::max(worst, std::abs(sys.matrix(i, j) - sign * sys.matrix(j, i)));
    }
  EXPECT_LE(worst, 1e-12 * sys.matrix.norm_inf());
}

TEST(Solver, SingleKnot) {
  geometry::KnotSet ks;
  ks.dirichlet.push_back({{2, 0, 0}, {1, 0, 0}, geometry::BcKind::Dirichlet, 0});
  auto p = ellipse_problem(Variant::ModifiedHelmholtz, 0.5);
  const auto sys = assemble_simplified(p, ks);
  ASSERT_EQ(sys.matrix.rows(), 1u);
  EXPECT_EQ(sys.matrix(0, 0), p.kernel(0).eval(0.0));
  EXPECT_EQ(sys.rhs[0], p.dirichlet_data({2, 0, 0}));
}

TEST(Solver, RepresentationConsistency) {
  const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 20);
  auto p = ellipse_problem(Variant::Helmholtz, 0.4);
  const auto sys = assemble_simplified(p, knots);
  BkmSolution s = solve(sys);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 21; ++trial) {
    Vector alpha(20, 0.0);
    if (trial < 20) alpha[trial] = 1.0;
    else
      for (double& a : alpha) a = u(rng);
    s.alpha = alpha;
    const Vector row_sums = sys.matrix * alpha;
    for (std::size_t i = 0; i < 20; ++i)
      EXPECT_NEAR(evaluate(s, knots.dirichlet[i].position), row_sums[i], 1e-13 * (1 + std::abs(row_sums[i])));
  }
}

TEST(Solver, SingleSourceDataRecoversUnitVector) {
  const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  for (auto v : {Variant::Helmholtz, Variant::ModifiedHelmholtz})
    for (double delta : {0.1, 0.5, 1.0}) {
      auto p = ellipse_problem(v, delta);
      const auto kernel = p.kernel(0);
      for (int k = 0; k < 9; ++k) {
        const Vec3 src = knots.dirichlet[k].position;
        p.dirichlet_data = [kernel, src](Vec3 x) { return kernel.eval(norm(x - src)); };
        const auto s = solve(assemble_simplified(p, knots));
        double err = 0.0;
        for (int i = 0; i < 9; ++i) err = std::max(err, std::abs(s.alpha[i] - (i == k ? 1.0 : 0.0)));
        // Forward error bound of a backward-stable solve.
        EXPECT_LE(err, 100 * 2.2e-16 * s.condition) << to_string(v) << " delta=" << delta;
        if (s.condition <= 1e6) EXPECT_LE(err, 1e-10) << to_string(v) << " delta=" << delta;
      }
    }
}

TEST(Solver, ZeroDataGivesZero) {
  auto p = ellipse_problem(Variant::Helmholtz, 0.2);
  p.dirichlet_data = [](Vec3) { return 0.0; };
  const auto s = solve(assemble_simplified(p, geometry::place_boundary_knots(Ellipse{2, 1}, 9)));
  for (double a : s.alpha) EXPECT_EQ(a, 0.0);
  EXPECT_EQ(evaluate(s, {0.3, 0.2, 0}), 0.0);
}

TEST(Solver, CollocationExactness) {
  const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  for (auto v : {Variant::Helmholtz, Variant::ModifiedHelmholtz}) {
    for (double delta : {0.1, 0.5, 1.0, 2.0}) {
      auto p = ellipse_problem(v, delta);
      const auto s = solve(assemble_simplified(p, knots));
      const auto kernel = p.kernel(0);
      for (const auto& k : knots.dirichlet) {
        // Rounding bound for the sum over columns: the coefficients grow with the
        // condition number and the terms cancel.
        double mag = 0.0;
        for (std::size_t j = 0; j < knots.dirichlet.size(); ++j)
          mag += std::abs(s.alpha[j] * gensol::value_entry(kernel, k.position, knots.dirichlet[j].position));
        const double err = std::abs(evaluate(s, k.position) - p.dirichlet_data(k.position));
        EXPECT_LE(err, 64 * 2.2e-16 * mag) << to_string(v) << " delta=" << delta;
        if (s.condition <= 1e6) EXPECT_LE(err, 1e-9) << to_string(v) << " delta=" << delta;
      }
    }
  }
}

TEST(Solver, NeumannCollocation) {
  const geometry::CubeWithEllipsoidCavity cube;
  const auto knots = geometry::place_boundary_knots(cube, 30);
  // delta = 6 keeps the condition number near 1e4 so the check is not swamped by rounding.
  auto p = BkmProblem::manufactured(cube, Variant::Helmholtz, 6.0, manufactured::laplace_3d());
  const auto s = solve(assemble_simplified(p, knots));
  ASSERT_LE(s.condition, 1e5);
  // Neumann rows reproduce the data through an independent finite-difference derivative.
  for (const auto& k : knots.neumann) {
    const double h = 1e-4;
    const double fd = (evaluate(s, k.position + h * k.normal) - evaluate(s, k.position - h * k.normal)) / (2 * h);
    EXPECT_NEAR(fd, p.neumann_data(k.position, k.normal), 1e-5 * (1 + std::abs(fd)));
  }
}

TEST(Solver, NeumannDataIsGradientDotNormal) {
  const auto ex = manufactured::laplace_2d();
  auto p = ellipse_problem(Variant::Helmholtz, 0.1);
  const Vec3 x{0.4, -0.3, 0}, n = normalized(Vec3{1, 2, 0});
  const double h = 1e-6;
  EXPECT_NEAR(p.neumann_data(x, n), (ex.value(x + h * n) - ex.value(x - h * n)) / (2 * h), 1e-6);
}

TEST(Solver, UnsymmetricFormulation) {
  const geometry::CubeWithEllipsoidCavity cube;
  const auto knots = geometry::place_boundary_knots(cube, 30);
  auto p = BkmProblem::manufactured(cube, Variant::Helmholtz, 6.0, manufactured::laplace_3d());
  p.formulation = Formulation::Unsymmetric;
  const auto s = solve(assemble_simplified(p, knots));
  for (const auto& k : knots.dirichlet)
    EXPECT_NEAR(evaluate(s, k.position), p.dirichlet_data(k.position), 1e-6 * (1 + std::abs(p.dirichlet_data(k.position))));
}

TEST(Solver, Validation) {
  auto p = ellipse_problem(Variant::Helmholtz, 0.0);
  const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  EXPECT_THROW(assemble_simplified(p, knots), DomainError);
  p.delta = 0.1;
  EXPECT_THROW(assemble_simplified(p, geometry::KnotSet{}), DomainError);
  p.regularization = -1.0;
  EXPECT_THROW(assemble_simplified(p, knots), DomainError);
  p.regularization = 0.0;
  EXPECT_THROW(solve_full(p, knots, 5, 1e-10), DomainError);  // no interior knots
  EXPECT_THROW(solve_full(p, knots, -1, 1e-10), DomainError);
}

TEST(Solver, DrmFit) {
  const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 20);
  const auto nodes = drm_nodes(knots);
  // At delta = 0.1 these 20 nodes give a numerically singular matrix (cond ~ 4e19);
  // delta = 1 keeps it near 1e14.
  const auto phi = ellipse_problem(Variant::Helmholtz, 1.0).kernel(1);

  const Vector zero = drm_fit(Vector(20, 0.0), nodes, phi);
  for (double b : zero) EXPECT_EQ(b, 0.0);

  for (int j : {0, 7, 19}) {
    Vector f(20);
    for (int i = 0; i < 20; ++i) f[i] = gensol::value_entry(phi, nodes[i], nodes[j]);
    linalg::SolveDiagnostics diag;
    const Vector beta = drm_fit(f, nodes, phi, &diag);
    // Forward error of a backward-stable solve is bounded by cond * eps.
    const double tol = std::max(1e-12, 100 * 2.2e-16 * diag.condition);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(beta[i], i == j ? 1.0 : 0.0, tol) << "cond " << diag.condition;
  }

  Vector f(20);
  for (int i = 0; i < 20; ++i) f[i] = nodes[i].x;
  const Vector beta = drm_fit(f, nodes, phi);
  double res = 0.0;
  for (int i = 0; i < 20; ++i) {
    double s = 0.0;
    for (int j = 0; j < 20; ++j) s += beta[j] * gensol::value_entry(phi, nodes[i], nodes[j]);
    res = std::max(res, std::abs(s - f[i]));
  }
  EXPECT_LE(res, 1e-10 * linalg::norm_inf(f));
  EXPECT_THROW(drm_fit(Vector(3, 0.0), nodes, phi), DomainError);
}

TEST(Solver, ParticularSolutionSatisfiesOperator) {
  for (auto v : {Variant::Helmholtz, Variant::ModifiedHelmholtz}) {
    const auto p = ellipse_problem(v, 0.3);
    const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 12);
    const auto nodes = drm_nodes(knots);
    const auto phi = p.kernel(1);
    Vector f(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) f[i] = 1.0 + nodes[i].x * nodes[i].y;
    const auto up = particular_solution(drm_fit(f, nodes, phi), nodes, p.kernel(2));
    const double sign = v == Variant::Helmholtz ? 1.0 : -1.0;
    for (Vec3 x : {Vec3{0.1, 0.2, 0}, Vec3{-0.7, 0.3, 0}, Vec3{1.1, -0.4, 0}}) {
      const oracle::Field u = [&up](Vec3 y) { return up(y); };
      const double lu = oracle::fd_laplacian(u, x, 2, 0.02) + sign * 0.09 * up(x);
      double want = 0.0;
      for (std::size_t j = 0; j < nodes.size(); ++j) want += up.beta[j] * gensol::value_entry(phi, x, nodes[j]);
      EXPECT_NEAR(lu, want, 1e-6 * (1 + std::abs(want)));
    }
  }
  const auto zero = particular_solution(Vector(3, 0.0), {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}},
                                        ellipse_problem(Variant::Helmholtz, 0.1).kernel(2));
  EXPECT_EQ(zero({0.3, 0.3, 0}), 0.0);
  EXPECT_THROW(particular_solution(Vector(2, 0.0), {{0, 0, 0}}, zero.kernel), DomainError);
}

TEST(Solver, FullModeZeroIterationsIsSimplified) {
  auto p = ellipse_problem(Variant::Helmholtz, 0.1);
  auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  knots.interior = geometry::sample_points(Ellipse{2, 1}, 5);
  const auto full = solve_full(p, knots, 0, 1e-10);
  const auto simple = solve(assemble_simplified(p, knots));
  EXPECT_EQ(full.alpha, simple.alpha);
  EXPECT_EQ(full.iterations, 0);
}

TEST(Solver, FullModeImprovesOnSimplified) {
  const auto samples = geometry::sample_points(Ellipse{2, 1}, 492);
  for (auto v : {Variant::Helmholtz, Variant::ModifiedHelmholtz}) {
    auto p = ellipse_problem(v, 0.1);
    auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
    knots.interior = geometry::sample_points(Ellipse{2, 1}, 5);
    const auto simple = solve(assemble_simplified(p, knots));
    const auto full = solve_full(p, knots, 100, 1e-10);
    EXPECT_GT(full.iterations, 0);
    ASSERT_FALSE(full.history.empty());
    EXPECT_LE(full.history.back(), 1e-10 * (1 + 40));
    const double e_simple = error_norm(simple, *p.exact, samples);
    const double e_full = error_norm(full, *p.exact, samples);
    EXPECT_LT(e_full, e_simple) << to_string(v);
  }
}

TEST(Solver, FullModeSmallDeltaAgreesWithSimplified) {
  const double delta = 0.05;
  auto p = ellipse_problem(Variant::Helmholtz, delta);
  auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  knots.interior = geometry::sample_points(Ellipse{2, 1}, 1);
  const auto simple = solve(assemble_simplified(p, knots));
  const auto full = solve_full(p, knots, 5, 1e-10);
  EXPECT_LE(full.iterations, 5);
  double diff = 0.0, unorm = 0.0;
  for (Vec3 x : geometry::sample_points(Ellipse{2, 1}, 200)) {
    diff = std::max(diff, std::abs(evaluate(full, x) - evaluate(simple, x)));
    unorm = std::max(unorm, std::abs((*p.exact)(x)));
  }
  EXPECT_LE(diff, delta * delta * unorm);
}

TEST(Solver, FullModeNonConvergenceReportsHistory) {
  auto p = ellipse_problem(Variant::Helmholtz, 0.1);
  auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  knots.interior = geometry::sample_points(Ellipse{2, 1}, 5);
  try {
    solve_full(p, knots, 2, 1e-15);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.history().size(), 2u);
  }
}

TEST(Solver, ErrorNormExamples) {
  EXPECT_NEAR(error_norm(Vector{20.02}, Vector{20.0}), 0.001, 1e-12);
  EXPECT_NEAR(error_norm(Vector{0.0015}, Vector{0.0005}), 0.001, 1e-15);
  EXPECT_NEAR(error_norm(Vector{1.1, 2.0}, Vector{1.0, 2.0}), std::sqrt(0.01 / 2), 1e-12);
  EXPECT_THROW(error_norm(Vector{}, Vector{}), DomainError);
  EXPECT_THROW(error_norm(Vector{1.0}, Vector{1.0, 2.0}), DomainError);
}

TEST(Solver, ExactSolutionsAreHarmonic) {
  const auto e2 = manufactured::laplace_2d(), e3 = manufactured::laplace_3d();
  for (Vec3 x : {Vec3{0.3, -0.2, 0.1}, Vec3{1.1, 0.5, 0.7}, Vec3{-0.6, 0.9, 0.2}}) {
    EXPECT_NEAR(oracle::fd_laplacian(e2.value, x, 2, 0.05), 0.0, 1e-6);
    EXPECT_NEAR(oracle::fd_laplacian(e3.value, x, 3, 0.05), 0.0, 1e-6);
    const double h = 1e-6;
    for (int a = 0; a < 3; ++a) {
      Vec3 e{};
      (a == 0 ? e.x : a == 1 ? e.y : e.z) = 1.0;
      const Vec3 g = e3.gradient(x);
      EXPECT_NEAR((e3.value(x + h * e) - e3.value(x - h * e)) / (2 * h), a == 0 ? g.x : a == 1 ? g.y : g.z, 1e-6);
    }
  }
}

TEST(Solver, VariantsAgree) {
  const auto samples = geometry::sample_points(Ellipse{2, 1}, 200);
  const auto knots = geometry::place_boundary_knots(Ellipse{2, 1}, 9);
  const double eh = error_norm(solve(assemble_simplified(ellipse_problem(Variant::Helmholtz, 0.1), knots)),
                               manufactured::laplace_2d().value, samples);
  const double em = error_norm(
      solve(assemble_simplified(ellipse_problem(Variant::ModifiedHelmholtz, 0.1), knots)),
      manufactured::laplace_2d().value, samples);
  EXPECT_LE(std::max(eh, em) / std::min(eh, em), 10.0);
}
