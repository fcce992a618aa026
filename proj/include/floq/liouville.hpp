#pragma once

#include <map>

#include "floq/bands.hpp"
#include "floq/cell.hpp"
#include "floq/positive.hpp"

namespace floq {

struct InconsistencyDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyMeasure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SupportTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// qharmonic_dim of the leading Taylor term: the dimension of order-N Floquet
/// solutions at a simple Fermi point.
long long floquet_dimension(const BandTaylor& taylor, int N);

enum class LiouvilleClass { Vacuous, Finite, Infinite };

struct FermiPointReport {
  Vec q;
  int multiplicity = 1;
  bool simple = false;
  int l0 = -1;
  std::vector<long long> dims;   // exact per N (simple points)
  std::vector<long long> upper;  // a_q * q_{n,N} bound (non-simple points)
};

struct LiouvilleReport {
  FermiPointSet z;
  std::vector<FermiPointReport> per_point;
  std::vector<long long> d_lower, d_upper;  // indexed by N, equal when exact
  bool exact = true;
  LiouvilleClass classification = LiouvilleClass::Vacuous;
};

LiouvilleReport liouville_dimensions(const PeriodicOperator& op, int n_max, int mf = 0,
                                     const BandTolerances& tol = {});

/// Three-way agreement of d_1 (and d_2 when alpha = 0) between the Liouville
/// report, the constructed linear basis, and the closed-form counts.
struct DimensionCrossCheck {
  bool consistent = true;
  long long d1_report = 0, d1_basis = 0, d1_formula = 0;
  long long d2_report = -1, d2_formula = -1;
  std::string detail;
};

DimensionCrossCheck cross_check_dimensions(const PeriodicOperator& op_normalized,
                                           const LiouvilleReport& report,
                                           const CellSolution& cell,
                                           const std::vector<PolyGrowthSolution>& linear_basis);

/// u(x) = sum_i w_i e^{xi_i . x} p_{xi_i}(x) for a discrete measure on Xi.
struct DiscreteMeasureSynthesis {
  std::vector<Vec> xi;
  std::vector<Complex> weights;
  std::vector<Field> p;         // positive Bloch factors
  std::vector<Field> defect;    // L(xi_i) p_i, used by the residual
  double residual = 0.0;        // max |L u| / max |u| on the patch
  bool growth_ok = false;
  std::vector<double> certificate;  // normalized sup per box radius (2, 5, 10)

  Complex eval(const Vec& x) const;
};

DiscreteMeasureSynthesis synthesize_from_measure(const PeriodicOperator& op, LambdaFunction& lf,
                                                 const XiLevelSet& level,
                                                 const std::vector<Vec>& xi_points,
                                                 const std::vector<Complex>& weights,
                                                 double tol_level = 1e-7);

/// Finitely supported cell-indexed function: gamma -> samples on K + gamma.
struct CellFunction {
  std::map<MultiIndex, Field> cells;

  int support_radius() const;
  double norm_sq() const;  // sum of cell L2(K)^2 norms
};

/// Floquet transform samples on a uniform z-grid of the unit torus.
struct FloquetTransformValue {
  int n = 1;
  int z_per_dim = 1;
  std::vector<Vec> k_points;       // z = exp(i k), k uniform over [0, 2 pi)^n
  std::vector<Field> cell_values;  // Uf(z, .) on K
};

FloquetTransformValue floquet_transform(const CellFunction& f, int n, int z_per_dim);
CellFunction floquet_inverse(const FloquetTransformValue& uf, int support_radius);

/// | sum_gamma ||f||^2 - mean_z ||Uf(z,.)||^2 | : discrete Parseval defect.
double parseval_defect(const CellFunction& f, const FloquetTransformValue& uf);

}  // namespace floq
