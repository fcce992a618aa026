#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floq/fourier.hpp"

namespace floq {

struct OperatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotElliptic : OperatorError {
  using OperatorError::OperatorError;
};
struct AsymmetricA : OperatorError {
  using OperatorError::OperatorError;
};
struct ResolutionMismatch : OperatorError {
  using OperatorError::OperatorError;
};
struct NonFiniteInput : OperatorError {
  using OperatorError::OperatorError;
};

enum class OperatorKind { GeneralSecondOrder, Schrodinger, MagneticSchrodinger, DivergenceForm };

/// Description used to build a PeriodicOperator. Fields not relevant for the
/// chosen kind may stay empty; grids must agree where present.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::GeneralSecondOrder;
  int n = 1;
  int grid_m = 32;
  std::vector<Field> a;      // row-major n*n (GeneralSecondOrder, DivergenceForm)
  std::vector<Field> b;      // length n (GeneralSecondOrder)
  std::optional<Field> c;    // scalar term
  std::vector<Field> a_mag;  // magnetic potential components (MagneticSchrodinger)
  std::optional<Field> v;    // potential (Schrodinger kinds)
};

/// Second order periodic operator in the non-divergence form
///   L = -sum a_ij d_i d_j + sum b_i d_i + c
/// on the torus R^n / Z^n. Divergence-form input is expanded on construction.
class PeriodicOperator {
 public:
  OperatorKind kind = OperatorKind::GeneralSecondOrder;
  int n = 1;
  int grid_m = 32;
  std::vector<Field> a;  // n*n, row-major, symmetric
  std::vector<Field> b;  // n
  Field c;
  std::vector<Field> a_mag;  // kept for reference when magnetic
  double a_min = 0.0;

  const Field& aij(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

  /// Largest coefficient bandwidth, used for the aliasing guard.
  int coefficient_bandwidth() const;

  bool real_coefficients(double tol = 1e-12) const;

  /// Same operator with a constant added to c.
  PeriodicOperator shifted(double c0) const;

  /// L applied to a scalar field (spectral derivatives, pointwise products).
  Field apply(const Field& u) const;
};

PeriodicOperator build_operator(const OperatorSpec& spec);

/// Dense Fourier-Galerkin matrix of P(x, D+k) (or of P*(x, D+k) when adjoint).
struct ShiftedOperatorMatrix {
  CVec k;
  int mf = 0;
  bool adjoint = false;
  bool aliasing_risk = false;
  CMat matrix;
  FourierBasis basis{1, 1};
};

ShiftedOperatorMatrix assemble_shifted(const PeriodicOperator& op, const CVec& k, int mf,
                                       bool adjoint = false);

/// Grid samples of sum_m coeffs[m] e^{2 pi i m.x} over the basis index set.
Field synthesize_field(const FourierBasis& basis, const CVec& coeffs, int grid_m);

/// Default truncation per dimension.
int default_mf(int n);
int default_grid(int n);

/// Bundled analytic presets; names: laplacian1d, laplacian2d, mathieu,
/// sin_divform, drift1d, shifted1d, checkerboard2d.
PeriodicOperator preset_operator(const std::string& name, int grid_m = 0);
std::vector<std::string> preset_names();

}  // namespace floq
