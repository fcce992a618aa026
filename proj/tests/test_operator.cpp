#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floq/eigs.hpp"
#include "floq/operator.hpp"

using namespace floq;

TEST_CASE("presets build and expose real coefficients") {
  for (const auto& name : preset_names()) {
    auto op = preset_operator(name);
    CHECK(op.n >= 1);
    CHECK(op.a_min > 0.0);
    CHECK(op.real_coefficients());
    CHECK(static_cast<int>(op.a.size()) == op.n * op.n);
  }
}

TEST_CASE("ellipticity and symmetry are enforced") {
  OperatorSpec bad;
  bad.n = 1;
  bad.grid_m = 16;
  bad.a.push_back(make_field(1, 16, [](const Vec& x) { return std::sin(kTwoPi * x[0]); }));
  CHECK_THROWS_AS(build_operator(bad), NotElliptic);

  OperatorSpec asym;
  asym.n = 2;
  asym.grid_m = 8;
  asym.a.push_back(Field::constant(2, 8, 1.0));
  asym.a.push_back(Field::constant(2, 8, 0.3));
  asym.a.push_back(Field::constant(2, 8, -0.3));
  asym.a.push_back(Field::constant(2, 8, 1.0));
  CHECK_THROWS_AS(build_operator(asym), AsymmetricA);
}

TEST_CASE("Mathieu Galerkin matrix is the classical tridiagonal form") {
  auto op = preset_operator("mathieu");
  auto shifted = assemble_shifted(op, CVec::Zero(1), 8);
  const auto& basis = shifted.basis;
  for (int i = 0; i < basis.size(); ++i) {
    int mi = basis.index(i)[0];
    CHECK(shifted.matrix(i, i).real() == doctest::Approx(kTwoPi * kTwoPi * mi * mi).epsilon(1e-12));
    for (int j = 0; j < basis.size(); ++j) {
      int d = mi - basis.index(j)[0];
      if (d == 1 || d == -1)
        CHECK(std::abs(shifted.matrix(i, j) - Complex(0.5)) < 1e-10);
      else if (d != 0)
        CHECK(std::abs(shifted.matrix(i, j)) < 1e-10);
    }
  }
}

TEST_CASE("divergence form expands with the derivative drift") {
  auto op = preset_operator("sin_divform");
  // -(a u')' = -a u'' - a' u', so b must equal -a'.
  Field da = op.aij(0, 0).derivative(0);
  double worst = 0.0;
  for (int i = 0; i < da.npoints(); ++i)
    worst = std::max(worst, std::abs(op.b[0].at(i) + da.at(i)));
  CHECK(worst < 1e-10);
}

TEST_CASE("apply reproduces plane wave symbols") {
  auto op = preset_operator("laplacian2d");
  Field u = make_field(2, 16, [](const Vec& x) {
    return std::cos(kTwoPi * x[0]) * std::cos(2 * kTwoPi * x[1]);
  });
  Field lu = op.apply(u);
  double factor = kTwoPi * kTwoPi * 5.0;  // |2 pi (1,2)|^2
  double worst = 0.0;
  for (int i = 0; i < u.npoints(); ++i)
    worst = std::max(worst, std::abs(lu.at(i) - factor * u.at(i)));
  CHECK(worst < 1e-9);
}

TEST_CASE("shifted adds a constant to c") {
  auto op = preset_operator("mathieu").shifted(2.5);
  auto base = preset_operator("mathieu");
  for (int i = 0; i < op.c.npoints(); ++i)
    CHECK(op.c.at(i).real() ==
          doctest::Approx(base.c.at(i).real() + 2.5).epsilon(1e-12));
}

TEST_CASE("field Fourier table round-trips eval and samples") {
  Field f = make_field(1, 32, [](const Vec& x) { return std::exp(std::sin(kTwoPi * x[0])); });
  for (int i = 0; i < f.npoints(); i += 5)
    CHECK(std::abs(f.eval(f.point(i)) - f.at(i)) < 1e-11);
  CHECK(f.integral().real() == doctest::Approx(1.2660658777520084).epsilon(1e-12));
}

TEST_CASE("synthesize_field inverts coefficient extraction") {
  auto op = preset_operator("mathieu");
  auto shifted = assemble_shifted(op, CVec::Zero(1), 6);
  CVec coeffs = CVec::Zero(shifted.basis.size());
  coeffs[shifted.basis.flat(MultiIndex{0})] = 1.0;
  coeffs[shifted.basis.flat(MultiIndex{2})] = Complex(0.25, 0.125);
  Field f = synthesize_field(shifted.basis, coeffs, 32);
  CHECK(std::abs(f.fourier(MultiIndex{2}) - Complex(0.25, 0.125)) < 1e-12);
  CHECK(std::abs(f.fourier(MultiIndex{0}) - Complex(1.0)) < 1e-12);
  CHECK(std::abs(f.fourier(MultiIndex{1})) < 1e-12);
}

TEST_CASE("aliasing guard flags too-small truncations") {
  auto op = preset_operator("mathieu");
  CHECK_FALSE(assemble_shifted(op, CVec::Zero(1), 8).aliasing_risk);
}
