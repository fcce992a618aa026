#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floq/cell.hpp"

using namespace floq;

TEST_CASE("1d divergence form reproduces the harmonic mean") {
  auto op = preset_operator("sin_divform");
  CellSolution cell = solve_cell(op);
  CHECK(cell.alpha_zero);
  CHECK(cell.q_hom(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(cell.residual < 1e-9);
  CHECK(std::abs(cell.psi.integral() - Complex(1.0)) < 1e-12);
  // For the expanded non-divergence form the adjoint kernel is constant.
  for (int i = 0; i < cell.psi.npoints(); ++i)
    CHECK(cell.psi.at(i).real() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("correctors have zero mean and satisfy the cell equation") {
  auto op = preset_operator("checkerboard2d");
  CellSolution cell = solve_cell(op, 12);
  REQUIRE(cell.corrector.size() == 2);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(cell.corrector[static_cast<size_t>(j)].integral()) < 1e-10);
    // L Psi_j = -b_j + alpha_j pointwise.
    Field lhs = op.apply(cell.corrector[static_cast<size_t>(j)]);
    double worst = 0.0;
    for (int i = 0; i < lhs.npoints(); ++i)
      worst = std::max(worst,
                       std::abs(lhs.at(i) + op.b[static_cast<size_t>(j)].at(i) - cell.alpha[j]));
    CHECK(worst < 1e-7);
  }
  CHECK(cell.q_hom.rows() == 2);
  CHECK(std::abs(cell.q_hom(0, 1)) < 1e-8);
  CHECK(cell.q_hom(0, 0) == doctest::Approx(cell.q_hom(1, 1)).epsilon(1e-8));
  CHECK(cell.q_hom(0, 0) > 0.0);
}

TEST_CASE("drift operator has nonzero alpha and no correctors") {
  auto op = preset_operator("drift1d");
  CellSolution cell = solve_cell(op);
  CHECK_FALSE(cell.alpha_zero);
  CHECK(cell.alpha[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(cell.corrector.empty());
  auto basis = linear_growth_basis(op, cell);
  CHECK(basis.size() == 1);
  CHECK(solution_residual(op, basis[0]) < 1e-9);
}

TEST_CASE("cell solver rejects operators with nonzero c") {
  CHECK_THROWS_AS(solve_cell(preset_operator("shifted1d")), CNotZero);
}

TEST_CASE("linear growth basis solves L u = 0 with linear growth") {
  auto op = preset_operator("sin_divform");
  CellSolution cell = solve_cell(op);
  auto basis = linear_growth_basis(op, cell);
  REQUIRE(basis.size() == 2);
  for (const auto& u : basis) {
    CHECK(solution_residual(op, u) < 1e-7);
    CHECK(growth_bound_holds(u));
  }
}

TEST_CASE("quadratic solution exists exactly when the trace condition holds") {
  auto op = preset_operator("laplacian2d");
  CellSolution cell = solve_cell(op, 4);
  Mat good(2, 2), bad(2, 2);
  good << 1.0, 0.0, 0.0, -1.0;
  bad << 1.0, 0.0, 0.0, 1.0;
  PolyGrowthSolution u = quadratic_solution(op, cell, good);
  CHECK(solution_residual(op, u) < 1e-9);
  Vec x(2);
  x[0] = 1.3;
  x[1] = -0.4;
  CHECK(u.eval(x).real() == doctest::Approx(0.5 * (1.3 * 1.3 - 0.4 * 0.4)).epsilon(1e-9));
  CHECK_THROWS_AS(quadratic_solution(op, cell, bad), TraceConditionViolated);
}

TEST_CASE("two-scale recursion reproduces the homogenized matrix") {
  auto op = preset_operator("sin_divform");
  CellSolution cell = solve_cell(op);
  TwoScale ts = two_scale_correctors(op, cell, 3);
  CHECK(ts.m2_matrix(1)(0, 0) == doctest::Approx(cell.q_hom(0, 0)).epsilon(1e-9));
  // First-order compatibility constants vanish when alpha = 0.
  CHECK(std::abs(ts.m.at(MultiIndex{1})) < 1e-10);
}

TEST_CASE("higher order solutions reject non-harmonic seeds") {
  auto op = preset_operator("laplacian2d");
  CellSolution cell = solve_cell(op, 4);
  TwoScale ts = two_scale_correctors(op, cell, 4);
  GradedPolynomial bad(2);
  bad.set(MultiIndex{2, 0}, 1.0);
  bad.set(MultiIndex{0, 2}, 1.0);  // |x|^2 is not harmonic
  CHECK_THROWS_AS(higher_order_solution(op, cell, ts, bad, 4), NotQHarmonic);
  GradedPolynomial good(2);
  good.set(MultiIndex{3, 0}, 1.0);
  good.set(MultiIndex{1, 2}, -3.0);  // Re (x + iy)^3
  PolyGrowthSolution u = higher_order_solution(op, cell, ts, good, 4);
  CHECK(solution_residual(op, u) < 1e-8);
  CHECK(growth_bound_holds(u));
}

TEST_CASE("conjugation on the level set removes the zero order term") {
  auto op = preset_operator("drift1d");
  LambdaFunction lf(op, 12);
  Vec xi(1);
  xi[0] = 2.0;  // on Xi
  PeriodicOperator conj = conjugated_operator(op, xi, lf.point(xi).p);
  CHECK(conj.c.max_abs() < 1e-12);
  // Drift of the conjugated operator: b - 2(xi + (log p)') = 2 - 4 = -2.
  CHECK(conj.b[0].at(0).real() == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("Hessian of Lambda is proportional to the homogenized matrix") {
  auto op = preset_operator("sin_divform");
  LambdaFunction lf(op, 16);
  XiLevelSet level = maximize_lambda(lf);
  HomogHessianLink link = hessian_homogenization(op, lf, level, 16);
  CHECK(link.rel_err < 1e-4);
  CHECK(link.constant == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(link.q_hom(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
}
