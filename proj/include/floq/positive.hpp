#pragma once

#include <map>

#include "floq/operator.hpp"

namespace floq {

struct NoPositiveEigenvector : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ComplexPrincipalEigenvalue : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AscentStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct HessianNotNegativeDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct XiNotOnLevelSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Principal eigentriple of L(xi) = e^{-xi.x} L e^{xi.x} on the torus.
struct LambdaPoint {
  double lambda = 0.0;
  Field p;        // positive eigenfunction, p(0) = 1
  Field p_star;   // positive adjoint eigenfunction (same eigenvalue), p*(0) = 1
  CVec p_coeffs;  // Fourier coefficients (warm-start for nearby xi)
  CVec p_star_coeffs;
};

/// Memoized evaluator of the principal-eigenvalue function Lambda(xi) with
/// finite-difference gradient and Hessian.
class LambdaFunction {
 public:
  explicit LambdaFunction(const PeriodicOperator& op, int mf = 0);

  int dim() const { return op_.n; }
  const PeriodicOperator& op() const { return op_; }

  double lambda(const Vec& xi);
  const LambdaPoint& point(const Vec& xi);

  Vec gradient(const Vec& xi, double h = 1e-4);
  Mat hessian(const Vec& xi, double h = 1e-4);

 private:
  PeriodicOperator op_;
  int mf_;
  std::map<std::vector<long long>, LambdaPoint> cache_;
  bool have_warm_ = false;
  double warm_lambda_ = 0.0;
  CVec warm_vec_;

  LambdaPoint solve(const Vec& xi);
};

enum class XiClass { Singleton, ConvexSurface, SubZero };

/// Lambda0, its argmax, and (for Lambda0 >= 0) samples of the zero level set
/// Xi with the support function h of their convex hull G.
struct XiLevelSet {
  double lambda0 = 0.0;
  Vec xi_star;
  XiClass classification = XiClass::Singleton;
  std::vector<Vec> samples;

  double h(const Vec& omega) const;  // support function of G
};

XiLevelSet maximize_lambda(LambdaFunction& lf, double tol_level = 1e-7, int trace_directions = 0);

/// Numeric criteria of the positivity lemma: sign of Lambda0 from c >= 0, the
/// alpha integral (c = 0 case), and the gamma vector at a point of Xi.
struct Lambda0Criteria {
  bool c_is_zero = false;
  bool c_nonneg = false;
  Vec alpha;  // integral of b psi, psi the adjoint ground state (c = 0 only)
  Vec gamma;  // integral of b-tilde psi at xi in Xi
  Vec xi_used;
  double lambda0 = 0.0;
};

Lambda0Criteria lambda0_criteria(const PeriodicOperator& op, LambdaFunction& lf,
                                 const XiLevelSet& level);

/// Phase-fixes coefficient vector v so the synthesized field is real and
/// strictly positive on the grid; returns false when no scaling works.
bool positivity_select(const FourierBasis& basis, int grid_m, CVec& v, Field& out);

/// psi = p_xi p*_xi normalized to unit integral (the invariant measure of the
/// conjugated operator); used by gamma and by the cell problems.
Field ground_state_product(const LambdaPoint& pt);

/// b_i - 2 sum_j a_ij (xi_j + d_j p / p): drift of u_xi^{-1} L u_xi.
std::vector<Field> shifted_drift(const PeriodicOperator& op, const Vec& xi, const Field& p);

}  // namespace floq
