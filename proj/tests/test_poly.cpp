#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "floq/poly.hpp"

using namespace floq;

namespace {

GradedPolynomial laplace_symbol(int n) {
  GradedPolynomial q(n);
  for (int i = 0; i < n; ++i) {
    MultiIndex a(n, 0);
    a[i] = 2;
    q.set(a, 1.0);
  }
  return q;
}

}  // namespace

TEST_CASE("dimension formulas and the harmonic recursion") {
  CHECK(h_dim(2, 2) == 5);
  CHECK(h_dim(1, 7) == 2);
  CHECK(q_dim(2, 2) == 6);
  CHECK(q_dim(3, 4) == 35);
  for (int n = 1; n <= 5; ++n)
    for (int N = 0; N <= 10; ++N) {
      long long rhs = q_dim(n - 1, N) + (N >= 1 ? q_dim(n - 1, N - 1) : 0);
      CHECK(h_dim(n, N) == rhs);
    }
}

TEST_CASE("qharmonic_dim matches h_dim for the Laplace symbol") {
  for (int n = 1; n <= 3; ++n)
    for (int N = 0; N <= 5; ++N) CHECK(qharmonic_dim(laplace_symbol(n), N) == h_dim(n, N));
}

TEST_CASE("kernel basis elements are annihilated and independent") {
  GradedPolynomial q(2);
  q.set(MultiIndex{2, 0}, 1.0);
  q.set(MultiIndex{0, 2}, 3.0);  // anisotropic
  auto kernel = qharmonic_kernel(q, 4);
  CHECK(static_cast<long long>(kernel.size()) == qharmonic_dim(q, 4));
  DiffOp qd = DiffOp::from_symbol(q);
  for (const auto& p : kernel) CHECK(qd.apply(p).coeff_norm() < 1e-10);
}

TEST_CASE("right inverse is an exact right inverse on random polynomials") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + trial % 3;
    GradedPolynomial q = laplace_symbol(n);
    if (trial % 2 == 1 && n >= 2) q.set(MultiIndex{1, 1}, 0.5);  // mixed term
    RightInverse r(q);
    DiffOp qd = DiffOp::from_symbol(q);
    for (int l = 0; l <= 8; l += 2) {
      GradedPolynomial p(n);
      for (const auto& a : monomials(n, l)) p.set(a, unif(rng));
      GradedPolynomial back = qd.apply(r.apply(p));
      CHECK(back.plus(p.scaled(-1.0)).coeff_norm() <= 1e-12 * std::max(1.0, p.coeff_norm()));
    }
  }
}

TEST_CASE("qd_matrix maps homogeneous degree l+order to degree l") {
  GradedPolynomial q = laplace_symbol(2);
  auto m = qd_matrix(q, 3);
  CHECK(m.source_degree == 5);
  CHECK(m.target_degree == 3);
  CHECK(m.matrix.rows() == static_cast<long>(m.target_basis.size()));
  CHECK(m.matrix.cols() == static_cast<long>(m.source_basis.size()));
}

TEST_CASE("Q(D) converts symbols with the 1/i convention") {
  GradedPolynomial q(1);
  q.set(MultiIndex{1}, 1.0);  // symbol k
  DiffOp qd = DiffOp::from_symbol(q);
  GradedPolynomial x = GradedPolynomial::monomial(1, MultiIndex{1});
  // k -> (1/i) d/dx, so Q(D) x = -i.
  CHECK(std::abs(qd.apply(x).coeff(MultiIndex{0}) - Complex(0.0, -1.0)) < 1e-14);
}

TEST_CASE("isomorphism witness reproduces harmonic seeds") {
  // Taylor data of the free band: lambda_2 = |k|^2, all other terms zero.
  int n = 2, N = 3;
  std::vector<GradedPolynomial> lambda_terms(5, GradedPolynomial(n));
  lambda_terms[2] = laplace_symbol(n);
  std::vector<GradedPolynomial> seeds;
  auto harm = qharmonic_kernel(laplace_symbol(n), N);
  std::vector<GradedPolynomial> chosen;
  for (int j = 0; j <= N; ++j) {
    GradedPolynomial s(n);
    for (const auto& h : harm) {
      GradedPolynomial comp = h.homogeneous_component(j);
      if (!comp.empty()) {
        s = comp;
        break;
      }
    }
    seeds.push_back(s);
  }
  IsomorphismWitness w = isomorphism_witness(lambda_terms, 2, N, seeds);
  CHECK(w.residual < 1e-10);
  for (int j = 0; j <= N; ++j)
    CHECK(w.phi[static_cast<size_t>(j)].plus(seeds[static_cast<size_t>(j)].scaled(-1.0)).coeff_norm() <
          1e-10);
}

TEST_CASE("degenerate inputs raise typed errors") {
  GradedPolynomial zero(2);
  CHECK_THROWS_AS(qharmonic_dim(zero, 2), ZeroPolynomial);
  GradedPolynomial q(2);
  q.set(MultiIndex{2, 0}, 1.0);
  q.set(MultiIndex{1, 0}, 1.0);  // not homogeneous
  CHECK_THROWS_AS(qd_matrix(q, 2), NotHomogeneous);
}
