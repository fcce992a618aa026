#pragma once

#include <map>

#include "floq/fourier.hpp"

namespace floq {

struct NotHomogeneous : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ZeroPolynomial : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SeedNotHarmonic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResidualTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Multivariate polynomial on the graded monomial basis; zero coefficients
/// are never stored, so homogeneous components are exact.
class GradedPolynomial {
 public:
  GradedPolynomial() = default;
  explicit GradedPolynomial(int n) : n_(n) {}

  static GradedPolynomial monomial(int n, const MultiIndex& alpha, Complex coeff = 1.0);

  int dim() const { return n_; }
  bool empty() const { return coeffs_.empty(); }
  int degree() const;  // -1 for the zero polynomial

  const std::map<MultiIndex, Complex>& terms() const { return coeffs_; }
  Complex coeff(const MultiIndex& alpha) const;
  void set(const MultiIndex& alpha, Complex value);

  bool is_homogeneous() const;
  GradedPolynomial homogeneous_component(int l) const;

  GradedPolynomial plus(const GradedPolynomial& other) const;
  GradedPolynomial scaled(Complex factor) const;
  GradedPolynomial times(const GradedPolynomial& other) const;

  Complex eval(const CVec& x) const;
  double coeff_norm() const;  // l2 norm of the coefficient vector
  CVec coefficient_vector(const std::vector<MultiIndex>& basis) const;

 private:
  int n_ = 0;
  std::map<MultiIndex, Complex> coeffs_;
};

/// All exponent multi-indices with |alpha| = l in n variables, lex order.
std::vector<MultiIndex> monomials(int n, int l);

long long binomial(long long n, long long k);
long long h_dim(int n, int N);  // harmonic polynomials of degree <= N
long long q_dim(int n, int N);  // all polynomials of degree <= N

/// Constant-coefficient differential operator sum c_beta d^beta (plain
/// partial derivatives). Symbols in the D = (1/i) d/dx convention convert via
/// from_symbol.
class DiffOp {
 public:
  DiffOp() = default;
  explicit DiffOp(int n) : n_(n) {}

  /// Q(D) for a polynomial symbol Q(k): each k^beta becomes (-i)^|beta| d^beta.
  static DiffOp from_symbol(const GradedPolynomial& q);

  int dim() const { return n_; }
  bool empty() const { return terms_.empty(); }
  int order() const;
  void add_term(const MultiIndex& beta, Complex coeff);
  const std::map<MultiIndex, Complex>& terms() const { return terms_; }

  GradedPolynomial apply(const GradedPolynomial& p) const;

 private:
  int n_ = 0;
  std::map<MultiIndex, Complex> terms_;
};

/// Matrix of Q(D): P_{l+s} -> P_l in the lex monomial bases.
struct HomogeneousOperatorMatrix {
  int source_degree = 0;
  int target_degree = 0;
  CMat matrix;
  std::vector<MultiIndex> source_basis;
  std::vector<MultiIndex> target_basis;
};

HomogeneousOperatorMatrix qd_matrix(const GradedPolynomial& q, int l);

/// dim of Q-harmonic polynomials of degree <= N (exact rank computation).
long long qharmonic_dim(const GradedPolynomial& q, int N);

/// Kernel basis of Q(D) on polynomials of degree <= N.
std::vector<GradedPolynomial> qharmonic_kernel(const GradedPolynomial& q, int N);

/// Homogeneity-preserving right inverse of a surjective homogeneous operator
/// (minimum-norm monomial-basis pseudoinverse, cached per degree).
class RightInverse {
 public:
  explicit RightInverse(DiffOp op);
  explicit RightInverse(const GradedPolynomial& q) : RightInverse(DiffOp::from_symbol(q)) {}

  /// Solves op(x) = p degreewise; result degree = deg p + order.
  GradedPolynomial apply(const GradedPolynomial& p) const;

 private:
  DiffOp op_;
  int order_ = 0;
  mutable std::map<int, CMat> pinv_cache_;  // keyed by target degree l
};

/// Triangular back-substitution behind the dimension count. Inputs are
/// the Taylor terms lambda_l (terms[l], homogeneous degree l, first nonzero at
/// l0) and harmonic homogeneous seeds (seed[j] of degree j, j = 0..N).
/// Returns psi_hat[j] solving sum_{j >= i+l0} lambda_{j-i}(D) psi_hat[j] = 0.
struct IsomorphismWitness {
  std::vector<GradedPolynomial> psi_hat;
  std::vector<GradedPolynomial> phi;  // harmonic projections; reproduce the seeds
  double residual = 0.0;
};

IsomorphismWitness isomorphism_witness(const std::vector<GradedPolynomial>& lambda_terms,
                                       int leading_order, int N,
                                       const std::vector<GradedPolynomial>& seeds);

}  // namespace floq
