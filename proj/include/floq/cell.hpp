#pragma once

#include <map>

#include "floq/operator.hpp"
#include "floq/poly.hpp"
#include "floq/positive.hpp"

namespace floq {

struct CNotZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AdjointKernelEmpty : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CompatibilityFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TraceConditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotQHarmonic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TruncationInsufficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RecursionResidual : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Adjoint ground state, correctors and homogenized matrix of an operator
/// normalized to L1 = 0 (c must vanish).
struct CellSolution {
  Field psi;  // positive, unit integral, L* psi = 0
  Vec alpha;  // integral of b_j psi
  bool alpha_zero = false;
  std::vector<Field> corrector;  // Psi_j, zero mean (empty when alpha != 0)
  Mat q_hom;                     // (I + grad Psi)^T A (I + grad Psi) psi integrated
  Vec gamma;                     // equals alpha for the normalized operator
  double residual = 0.0;
  CVec psi_coeffs;
  int mf = 0;
};

CellSolution solve_cell(const PeriodicOperator& op, int mf = 0, bool need_correctors = true);

/// Solution with polynomial growth, stored as u(x) = sum_j x^j p_j(x) with
/// periodic p_j (quasimomentum zero).
struct PolyGrowthSolution {
  int n = 1;
  int order = 0;  // N
  std::map<MultiIndex, Field> terms;

  Complex eval(const Vec& x) const;
};

/// max |L u| / max |u| sampled over the patch [-radius, radius]^n.
double solution_residual(const PeriodicOperator& op, const PolyGrowthSolution& u,
                         int cell_radius = 1, int per_cell = 6);

/// Cell L2 norms ||u||_{L2(K+gamma)} for |gamma|_inf = 0..max_gamma along the
/// diagonal direction; used for the growth bound C (1+|gamma|)^N.
std::vector<double> cell_growth_profile(const PolyGrowthSolution& u, int max_gamma = 8,
                                        int per_cell = 6);
bool growth_bound_holds(const PolyGrowthSolution& u, int max_gamma = 8, double slack = 1.25);

/// {1, F_1, ..., F_n} when alpha = 0; {1} plus the n-1 combined solutions
/// F_j = x_j - (alpha_j/alpha_n) x_n + phi_j otherwise.
std::vector<PolyGrowthSolution> linear_growth_basis(const PeriodicOperator& op,
                                                    const CellSolution& cell);

/// Order-2 solution (1/2) x.Cx + x.(C Psi) + p0 for symmetric C with
/// tr(Q C^T) = 0.
PolyGrowthSolution quadratic_solution(const PeriodicOperator& op, const CellSolution& cell,
                                      const Mat& c_mat, double trace_tol = 1e-8);

/// Two-scale recursion data: periodic correctors phi_nu (zero mean) and the
/// constant tensors m_nu from the compatibility conditions, |nu| <= s_max.
struct TwoScale {
  std::map<MultiIndex, Field> phi;
  std::map<MultiIndex, double> m;

  Mat m2_matrix(int n) const;  // M2 as the matrix q with M2 = -sum q_ij d_i d_j
};

TwoScale two_scale_correctors(const PeriodicOperator& op, const CellSolution& cell, int s_max);

/// u = sum_nu phi_nu d^nu V with V = A^{-1} U0 (truncated formal inverse);
/// U0 must be Q_hom-harmonic.
PolyGrowthSolution higher_order_solution(const PeriodicOperator& op, const CellSolution& cell,
                                         const TwoScale& ts, const GradedPolynomial& u0,
                                         int s_max);

/// The drift-shifted operator u_xi^{-1} L u_xi (c dropped; valid on Xi).
PeriodicOperator conjugated_operator(const PeriodicOperator& op, const Vec& xi, const Field& p);

/// Hessian of Lambda at a point of Xi against the homogenized matrix of the
/// conjugated operator; `constant` is fitted, rel_err is the proportionality
/// defect.
struct HomogHessianLink {
  Mat hess;
  Mat q_hom;
  double constant = 0.0;
  double rel_err = 0.0;
  Vec xi;
};

HomogHessianLink hessian_homogenization(const PeriodicOperator& op, LambdaFunction& lf,
                                        const XiLevelSet& level, int mf = 0);

}  // namespace floq
