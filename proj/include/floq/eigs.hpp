#pragma once

#include "floq/fourier.hpp"

namespace floq {

struct EigSolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Spectrum {
  CVec values;
  CMat vectors;  // columns
};

/// Full dense eigendecomposition; uses the Hermitian path when applicable.
Spectrum dense_spectrum(const CMat& a);

struct EigenPair {
  Complex value;
  CVec vector;
  double residual = 0.0;
  bool converged = false;
};

/// Shift-invert iteration toward the eigenvalue nearest `shift`; a warm-start
/// vector can be supplied to stay on a tracked branch.
EigenPair nearest_eigenpair(const CMat& a, Complex shift, const CVec* guess = nullptr,
                            int max_iter = 30, double tol = 1e-12);

/// Cheap estimate of the smallest singular value (inverse power on A^-1 A^-H).
double smallest_singular_estimate(const CMat& a, int iters = 12);

/// Exact singular values, ascending.
Vec singular_values(const CMat& a);

/// Solves A x = f when A has a simple zero eigenvalue: bordered system with
/// the left null vector as extra column and a zero-mean (e0) constraint row.
/// Returns x with x[deflate_index] = 0; mu reports the compatibility defect.
struct DeflatedSolve {
  CVec x;
  Complex mu;
};
DeflatedSolve deflated_solve(const CMat& a, const CVec& left_null, int deflate_index,
                             const CVec& f);

}  // namespace floq
