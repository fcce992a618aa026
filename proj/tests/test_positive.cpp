#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floq/positive.hpp"

using namespace floq;

TEST_CASE("drift operator has the quadratic symbol 2 xi - xi^2") {
  auto op = preset_operator("drift1d");
  LambdaFunction lf(op, 12);
  Vec xi(1);
  for (double t : {-1.0, 0.0, 0.7, 1.0, 2.0, 2.5}) {
    xi[0] = t;
    CHECK(lf.lambda(xi) == doctest::Approx(2 * t - t * t).epsilon(1e-10));
  }
  xi[0] = 0.7;
  CHECK(lf.gradient(xi)[0] == doctest::Approx(2 - 2 * 0.7).epsilon(1e-6));
  CHECK(lf.hessian(xi)(0, 0) == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("drift level set is the pair {0, 2} with support function") {
  auto op = preset_operator("drift1d");
  LambdaFunction lf(op, 12);
  XiLevelSet level = maximize_lambda(lf);
  CHECK(level.lambda0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(level.xi_star[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(level.classification == XiClass::ConvexSurface);
  REQUIRE(level.samples.size() >= 2);
  double lo = 1e9, hi = -1e9;
  for (const auto& s : level.samples) {
    lo = std::min(lo, s[0]);
    hi = std::max(hi, s[0]);
  }
  CHECK(lo == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(hi == doctest::Approx(2.0).epsilon(1e-8));
  Vec plus(1), minus(1);
  plus[0] = 1.0;
  minus[0] = -1.0;
  CHECK(level.h(plus) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(level.h(minus) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("Laplacian has the singleton level set at the origin") {
  auto op = preset_operator("laplacian2d");
  LambdaFunction lf(op, 4);
  XiLevelSet level = maximize_lambda(lf);
  CHECK(std::abs(level.lambda0) < 1e-9);
  CHECK(level.xi_star.norm() < 1e-5);
  CHECK(level.classification == XiClass::Singleton);
}

TEST_CASE("shifted operator has Lambda0 = 1 with level set {-1, 1}") {
  auto op = preset_operator("shifted1d");
  LambdaFunction lf(op, 12);
  XiLevelSet level = maximize_lambda(lf);
  CHECK(level.lambda0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(level.classification == XiClass::ConvexSurface);
  std::vector<double> xs;
  for (const auto& s : level.samples) xs.push_back(s[0]);
  std::sort(xs.begin(), xs.end());
  REQUIRE(xs.size() >= 2);
  CHECK(xs.front() == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(xs.back() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Mathieu principal eigenfunctions are strictly positive") {
  auto op = preset_operator("mathieu");
  LambdaFunction lf(op, 16);
  Vec xi(1);
  xi[0] = 0.4;
  const LambdaPoint& pt = lf.point(xi);
  double pmin = 1e300, smin = 1e300;
  for (int i = 0; i < pt.p.npoints(); ++i) {
    pmin = std::min(pmin, pt.p.at(i).real());
    smin = std::min(smin, pt.p_star.at(i).real());
    CHECK(std::abs(pt.p.at(i).imag()) < 1e-9);
  }
  CHECK(pmin > 0.0);
  CHECK(smin > 0.0);
  CHECK(std::abs(pt.p.eval(Vec::Zero(1)) - Complex(1.0)) < 1e-9);
}

TEST_CASE("Lambda is concave along segments") {
  auto op = preset_operator("mathieu");
  LambdaFunction lf(op, 12);
  Vec a(1), b(1);
  a[0] = -1.3;
  b[0] = 1.7;
  double fa = lf.lambda(a), fb = lf.lambda(b);
  for (int s = 1; s < 200; ++s) {
    double t = s / 200.0;
    Vec x = (1 - t) * a + t * b;
    CHECK(lf.lambda(x) >= (1 - t) * fa + t * fb - 1e-9);
  }
}

TEST_CASE("alpha and gamma criteria at the drift preset") {
  auto op = preset_operator("drift1d");
  LambdaFunction lf(op, 12);
  XiLevelSet level = maximize_lambda(lf);
  Lambda0Criteria crit = lambda0_criteria(op, lf, level);
  CHECK(crit.c_is_zero);
  // alpha = integral of b psi with psi the L*-ground state: nonzero drift.
  CHECK(std::abs(crit.alpha[0]) > 1e-3);
  CHECK(crit.lambda0 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("gamma vanishes on the level set for symmetric operators") {
  auto op = preset_operator("sin_divform");
  LambdaFunction lf(op, 16);
  XiLevelSet level = maximize_lambda(lf);
  CHECK(std::abs(level.lambda0) < 1e-8);
  Lambda0Criteria crit = lambda0_criteria(op, lf, level);
  CHECK(crit.c_is_zero);
  CHECK(crit.alpha.norm() < 1e-9);
  CHECK(crit.gamma.norm() < 1e-7);
}

TEST_CASE("ground state product integrates to one") {
  auto op = preset_operator("mathieu");
  LambdaFunction lf(op, 16);
  Vec xi(1);
  xi[0] = 0.2;
  Field psi = ground_state_product(lf.point(xi));
  CHECK(std::abs(psi.integral() - Complex(1.0)) < 1e-10);
  for (int i = 0; i < psi.npoints(); ++i) CHECK(psi.at(i).real() > 0.0);
}
