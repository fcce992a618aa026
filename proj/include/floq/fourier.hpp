#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace floq {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Integer multi-index (Fourier index, lattice vector, or derivative order).
using MultiIndex = std::vector<int>;

inline int mi_abs_sum(const MultiIndex& m) {
  int s = 0;
  for (int v : m) s += std::abs(v);
  return s;
}

inline int mi_sum(const MultiIndex& m) {
  int s = 0;
  for (int v : m) s += v;
  return s;
}

/// The lattice Z^n with unit cell K = [0,1]^n and Brillouin zone [-pi,pi]^n.
struct Lattice {
  int n = 1;

  explicit Lattice(int dim) : n(dim) {
    if (n < 1 || n > 3) throw std::invalid_argument("Lattice: dimension must be 1, 2 or 3");
  }
  double brillouin_halfwidth() const { return kTwoPi / 2.0; }
};

/// Truncated symmetric Fourier index set {m : |m_i| <= M_f}, lexicographically ordered.
class FourierBasis {
 public:
  FourierBasis(int n, int mf) : n_(n), mf_(mf) {
    if (n < 1 || n > 3 || mf < 1) throw std::invalid_argument("FourierBasis: bad parameters");
    width_ = 2 * mf + 1;
    size_ = 1;
    for (int d = 0; d < n; ++d) size_ *= width_;
  }

  int dim() const { return n_; }
  int mf() const { return mf_; }
  int size() const { return size_; }

  MultiIndex index(int flat) const {
    MultiIndex m(n_);
    for (int d = n_ - 1; d >= 0; --d) {
      m[d] = flat % width_ - mf_;
      flat /= width_;
    }
    return m;
  }

  int flat(const MultiIndex& m) const {
    int f = 0;
    for (int d = 0; d < n_; ++d) f = f * width_ + (m[d] + mf_);
    return f;
  }

  bool contains(const MultiIndex& m) const {
    for (int d = 0; d < n_; ++d)
      if (std::abs(m[d]) > mf_) return false;
    return true;
  }

 private:
  int n_, mf_, width_, size_;
};

/// Periodic scalar field on the unit torus: samples on a uniform M^n grid
/// plus the balanced DFT table, treated as a trigonometric polynomial.
class Field {
 public:
  Field() = default;
  Field(int n, int grid_m);
  Field(int n, int grid_m, std::vector<Complex> samples);

  static Field constant(int n, int grid_m, Complex value);

  int dim() const { return n_; }
  int grid() const { return m_; }
  int npoints() const { return static_cast<int>(samples_.size()); }

  Complex& at(int flat) { return samples_[flat]; }
  Complex at(int flat) const { return samples_[flat]; }
  const std::vector<Complex>& samples() const { return samples_; }

  /// Grid point coordinates of the flat sample index, components in [0,1).
  Vec point(int flat) const;

  /// Re-derives the Fourier table after editing samples.
  void refresh();

  /// Balanced-range Fourier coefficient; zero outside |m_i| <= (M-1)/2.
  Complex fourier(const MultiIndex& m) const;

  /// Largest |m|_inf carrying a coefficient above 1e-13 of the peak.
  int bandwidth() const;

  bool is_real(double tol = 1e-12) const;
  double max_abs() const;
  Complex mean() const;

  /// Trigonometric-polynomial evaluation at an arbitrary point.
  Complex eval(const Vec& x) const;

  Field derivative(int axis) const;
  Field multiply(const Field& other) const;  // pointwise on the grid
  Field add(const Field& other) const;
  Field scaled(Complex factor) const;

  /// Mean of samples = integral over the unit cell (trapezoid, exact for trig polys).
  Complex integral() const { return mean(); }

 private:
  int n_ = 0, m_ = 0;
  std::vector<Complex> samples_;
  std::vector<Complex> fourier_;  // same flat layout as samples, frequency index
  int freq_of(int idx) const {
    int half = (m_ - 1) / 2;
    return idx <= half ? idx : idx - m_;
  }
  int idx_of_freq(int f) const { return f >= 0 ? f : f + m_; }
};

/// Builds a field by sampling a callable f(x) on the grid.
template <typename F>
Field make_field(int n, int grid_m, F&& f) {
  Field field(n, grid_m);
  for (int i = 0; i < field.npoints(); ++i) field.at(i) = Complex(f(field.point(i)));
  field.refresh();
  return field;
}

}  // namespace floq
