#pragma once

#include <functional>
#include <optional>

#include "floq/operator.hpp"
#include "floq/poly.hpp"

namespace floq {

struct BranchTrackingAmbiguous : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MultiplicityAboveOne : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoisyExpansion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BandTolerances {
  double tol_fermi = 1e-7;
  double merge_radius = 1e-4;
  double gap_tol = 1e-6;
  double taylor_zero_tol = 1e-6;
  int max_isolated_points = 12;
};

/// Branch-tracked eigenvalue sweep over an ordered k path.
struct BandStructure {
  std::vector<Vec> k_grid;
  std::vector<std::vector<Complex>> bands;  // bands[point][branch]
  int branch_count = 0;
};

BandStructure compute_bands(const PeriodicOperator& op, const std::vector<Vec>& k_grid, int j_count,
                            int mf = 0);

/// Uniform serpentine path covering [-pi,pi]^n with `per_dim` points per axis;
/// consecutive entries are grid neighbours, as branch tracking requires.
std::vector<Vec> serpentine_grid(int n, int per_dim);

/// Max Hausdorff distance between spec P*(x,D+k) and spec P(x,D-k) over samples.
double duality_check(const PeriodicOperator& op, const std::vector<Vec>& k_samples, int mf = 0);

struct FermiPointSet {
  std::vector<Vec> points;
  std::vector<int> multiplicities;
  double level = 0.0;
  bool infinite = false;  // non-isolated zero set detected (heuristic)
};

FermiPointSet real_fermi_points(const PeriodicOperator& op, double level, int mf = 0,
                                const BandTolerances& tol = {});

/// Homogeneous Taylor terms of a tracked simple band at k0.
struct BandTaylor {
  Vec k0;
  int max_order = 4;
  int leading_order = 0;                 // l0
  std::vector<GradedPolynomial> terms;   // terms[l] homogeneous of degree l
  double richardson_residual = 0.0;
};

BandTaylor band_taylor(const PeriodicOperator& op, const Vec& k0, int max_order,
                       Complex branch_value = Complex(0.0), int mf = 0,
                       const BandTolerances& tol = {});

/// Evaluates the truncated expansion at k0 + delta.
Complex band_taylor_eval(const BandTaylor& taylor, const Vec& delta);

}  // namespace floq
