#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "floq/liouville.hpp"

using namespace floq;

TEST_CASE("free 2d operator counts harmonic polynomials") {
  auto op = preset_operator("laplacian2d");
  LiouvilleReport rep = liouville_dimensions(op, 3, 4);
  CHECK(rep.exact);
  CHECK(rep.classification == LiouvilleClass::Finite);
  REQUIRE(rep.d_lower.size() == 4);
  for (int N = 0; N <= 3; ++N) {
    CHECK(rep.d_lower[static_cast<size_t>(N)] == h_dim(2, N));
    CHECK(rep.d_upper[static_cast<size_t>(N)] == rep.d_lower[static_cast<size_t>(N)]);
  }
  REQUIRE(rep.z.points.size() == 1);
  CHECK(rep.z.points[0].norm() < 1e-7);
  CHECK(rep.per_point[0].simple);
  CHECK(rep.per_point[0].l0 == 2);
}

TEST_CASE("floquet_dimension matches the kernel count of the leading term") {
  auto op = preset_operator("laplacian1d");
  BandTaylor bt = band_taylor(op, Vec::Zero(1), 4, Complex(0.0), 8);
  for (int N = 0; N <= 4; ++N) CHECK(floquet_dimension(bt, N) == h_dim(1, N));
}

TEST_CASE("strictly positive operator is vacuous") {
  auto op = preset_operator("shifted1d");
  LiouvilleReport rep = liouville_dimensions(op, 3, 12);
  CHECK(rep.classification == LiouvilleClass::Vacuous);
  for (long long d : rep.d_lower) CHECK(d == 0);
}

TEST_CASE("drift operator pins the dimension at one") {
  auto op = preset_operator("drift1d");
  LiouvilleReport rep = liouville_dimensions(op, 4, 12);
  CHECK(rep.exact);
  for (long long d : rep.d_lower) CHECK(d == 1);
  REQUIRE(rep.per_point.size() == 1);
  CHECK(rep.per_point[0].l0 == 1);
}

TEST_CASE("cross check agrees between report, basis and formulas") {
  auto op = preset_operator("sin_divform");
  LiouvilleReport rep = liouville_dimensions(op, 2, 16);
  CellSolution cell = solve_cell(op);
  auto basis = linear_growth_basis(op, cell);
  DimensionCrossCheck cc = cross_check_dimensions(op, rep, cell, basis);
  CHECK(cc.consistent);
  CHECK(cc.d1_report == 2);
  CHECK(cc.d1_basis == 2);
  CHECK(cc.d1_formula == 2);
}

TEST_CASE("floquet transform satisfies Parseval and inverts exactly") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CellFunction f;
  for (int g = -2; g <= 2; ++g) {
    Field cellf(1, 9);
    for (int i = 0; i < cellf.npoints(); ++i) cellf.at(i) = Complex(unif(rng), unif(rng));
    cellf.refresh();
    f.cells.emplace(MultiIndex{g}, cellf);
  }
  CHECK(f.support_radius() == 2);
  auto uf = floquet_transform(f, 1, 11);
  CHECK(parseval_defect(f, uf) < 1e-12);
  CellFunction back = floquet_inverse(uf, 2);
  for (const auto& [g, cellf] : f.cells) {
    const Field& b = back.cells.at(g);
    for (int i = 0; i < cellf.npoints(); ++i) CHECK(std::abs(cellf.at(i) - b.at(i)) < 1e-12);
  }
}

TEST_CASE("transform rejects under-resolved quasimomentum grids") {
  CellFunction f;
  for (int g = -2; g <= 2; ++g) f.cells.emplace(MultiIndex{g}, Field::constant(1, 5, 1.0));
  CHECK_THROWS_AS(floquet_transform(f, 1, 3), SupportTooLarge);
}

TEST_CASE("plane wave synthesis from a singleton measure") {
  auto op = preset_operator("drift1d");
  LambdaFunction lf(op, 12);
  XiLevelSet level = maximize_lambda(lf);
  Vec xi(1);
  xi[0] = 2.0;
  DiscreteMeasureSynthesis syn =
      synthesize_from_measure(op, lf, level, {xi}, {Complex(1.0)});
  CHECK(syn.residual < 1e-8);
  CHECK(syn.growth_ok);
  Vec x(1);
  x[0] = 0.75;
  CHECK(syn.eval(x).real() == doctest::Approx(std::exp(1.5)).epsilon(1e-9));
}

TEST_CASE("off-level measure points are rejected") {
  auto op = preset_operator("drift1d");
  LambdaFunction lf(op, 12);
  XiLevelSet level = maximize_lambda(lf);
  Vec xi(1);
  xi[0] = 0.5;  // Lambda = 0.75 != 0
  CHECK_THROWS_AS(synthesize_from_measure(op, lf, level, {xi}, {Complex(1.0)}),
                  XiNotOnLevelSet);
  CHECK_THROWS_AS(synthesize_from_measure(op, lf, level, {}, {}), EmptyMeasure);
}

TEST_CASE("cosh from the symmetric measure on the shifted operator") {
  auto op = preset_operator("shifted1d");
  LambdaFunction lf(op, 12);
  XiLevelSet level = maximize_lambda(lf);
  Vec xp(1), xm(1);
  xp[0] = 1.0;
  xm[0] = -1.0;
  DiscreteMeasureSynthesis syn = synthesize_from_measure(
      op, lf, level, {xp, xm}, {Complex(0.5), Complex(0.5)});
  for (double t : {-3.0, -0.5, 0.0, 1.2, 3.0}) {
    Vec x(1);
    x[0] = t;
    CHECK(syn.eval(x).real() == doctest::Approx(std::cosh(t)).epsilon(1e-9));
  }
}
