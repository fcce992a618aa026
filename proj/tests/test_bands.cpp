#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floq/bands.hpp"
#include "floq/eigs.hpp"

using namespace floq;

TEST_CASE("serpentine grid walks between neighbours") {
  auto grid = serpentine_grid(2, 9);
  CHECK(grid.size() == 81);
  double step = kTwoPi / 8.0;
  for (size_t i = 1; i < grid.size(); ++i)
    CHECK((grid[i] - grid[i - 1]).norm() == doctest::Approx(step).epsilon(1e-10));
}

TEST_CASE("free 1d bands match folded parabolas") {
  auto op = preset_operator("laplacian1d");
  auto grid = serpentine_grid(1, 33);
  BandStructure bs = compute_bands(op, grid, 3, 8);
  for (size_t p = 0; p < grid.size(); ++p) {
    double k = grid[p][0];
    std::vector<double> exact;
    for (int m = -2; m <= 2; ++m) exact.push_back(std::pow(k + kTwoPi * m, 2));
    std::sort(exact.begin(), exact.end());
    // Branches are tracked continuously, so they leave sorted order after a
    // crossing; compare the value sets instead.
    std::vector<double> got;
    for (int j = 0; j < 3; ++j) {
      got.push_back(bs.bands[p][j].real());
      CHECK(std::abs(bs.bands[p][j].imag()) < 1e-9);
    }
    std::sort(got.begin(), got.end());
    for (int j = 0; j < 3; ++j)
      CHECK(got[static_cast<size_t>(j)] ==
            doctest::Approx(exact[static_cast<size_t>(j)]).epsilon(1e-9));
  }
}

TEST_CASE("branches track through degenerate crossings without leaving the spectrum") {
  auto op = preset_operator("laplacian2d");
  auto grid = serpentine_grid(2, 9);
  BandStructure bs = compute_bands(op, grid, 4, 4);
  for (size_t p = 0; p < grid.size(); ++p)
    for (int j = 0; j < 4; ++j) {
      // Every tracked value must lie on some folded parabola |k + 2 pi m|^2.
      double best = 1e300;
      for (int m1 = -3; m1 <= 3; ++m1)
        for (int m2 = -3; m2 <= 3; ++m2) {
          double v = std::pow(grid[p][0] + kTwoPi * m1, 2) + std::pow(grid[p][1] + kTwoPi * m2, 2);
          best = std::min(best, std::abs(bs.bands[p][j].real() - v));
        }
      CHECK(best < 1e-8);
      CHECK(std::abs(bs.bands[p][j].imag()) < 1e-9);
    }
}

TEST_CASE("duality: adjoint spectrum at k equals spectrum at -k") {
  for (const auto& name : {"mathieu", "drift1d", "sin_divform"}) {
    auto op = preset_operator(name);
    std::vector<Vec> ks;
    Vec k(1);
    k[0] = 0.73;
    ks.push_back(k);
    k[0] = -2.1;
    ks.push_back(k);
    CHECK(duality_check(op, ks, 10) < 1e-8);
  }
}

TEST_CASE("Fermi points of the free 1d operator at a positive level") {
  auto op = preset_operator("laplacian1d");
  FermiPointSet fp = real_fermi_points(op, 1.0, 10);
  REQUIRE(fp.points.size() == 2);
  CHECK_FALSE(fp.infinite);
  std::vector<double> xs = {fp.points[0][0], fp.points[1][0]};
  std::sort(xs.begin(), xs.end());
  CHECK(xs[0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(xs[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(fp.multiplicities[0] == 1);
  CHECK(fp.multiplicities[1] == 1);
}

TEST_CASE("shifted free operator has an empty real Fermi set") {
  auto op = preset_operator("shifted1d");
  FermiPointSet fp = real_fermi_points(op, 0.0, 10);
  CHECK(fp.points.empty());
  CHECK_FALSE(fp.infinite);
}

TEST_CASE("band Taylor expansion of the free band at zero") {
  auto op = preset_operator("laplacian1d");
  Vec k0 = Vec::Zero(1);
  BandTaylor bt = band_taylor(op, k0, 4, Complex(0.0), 10);
  CHECK(bt.leading_order == 2);
  CHECK(bt.terms[2].coeff(MultiIndex{2}).real() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(bt.terms[3].coeff_norm() < 1e-5);
  Vec d(1);
  d[0] = 0.05;
  CHECK(band_taylor_eval(bt, d).real() == doctest::Approx(0.0025).epsilon(1e-5));
}

TEST_CASE("drift band at its Fermi point carries a linear term") {
  auto op = preset_operator("drift1d");
  // lambda(k) = k^2 + 2ik vanishes at k = 0 with nonzero gradient.
  Vec k0 = Vec::Zero(1);
  BandTaylor bt = band_taylor(op, k0, 3, Complex(0.0), 12);
  CHECK(bt.leading_order == 1);
  CHECK(std::abs(bt.terms[1].coeff(MultiIndex{1}) - Complex(0.0, 2.0)) < 1e-6);
}

TEST_CASE("degenerate level raises the multiplicity count") {
  auto op = preset_operator("laplacian2d");
  // level 4 pi^2 is hit at k = (+-2pi, 0), (0, +-2pi) folded to... use level
  // inside the first band instead: k on the circle |k|^2 = 1, an infinite set.
  FermiPointSet fp = real_fermi_points(op, 1.0, 4);
  CHECK(fp.infinite);
}
