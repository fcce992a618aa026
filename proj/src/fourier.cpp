#include "floq/fourier.hpp"

#include <cmath>

namespace floq {

Field::Field(int n, int grid_m) : n_(n), m_(grid_m) {
  if (n < 1 || n > 3 || grid_m < 4) throw std::invalid_argument("Field: bad parameters");
  int total = 1;
  for (int d = 0; d < n; ++d) total *= grid_m;
  samples_.assign(total, Complex(0.0));
  fourier_.assign(total, Complex(0.0));
}

Field::Field(int n, int grid_m, std::vector<Complex> samples) : Field(n, grid_m) {
  if (samples.size() != samples_.size()) throw std::invalid_argument("Field: sample count mismatch");
  samples_ = std::move(samples);
  refresh();
}

Field Field::constant(int n, int grid_m, Complex value) {
  Field f(n, grid_m);
  for (auto& s : f.samples_) s = value;
  f.refresh();
  return f;
}

Vec Field::point(int flat) const {
  Vec x(n_);
  for (int d = n_ - 1; d >= 0; --d) {
    x[d] = static_cast<double>(flat % m_) / m_;
    flat /= m_;
  }
  return x;
}

void Field::refresh() {
  // Separable DFT: transform one axis at a time.
  std::vector<Complex> work = samples_;
  std::vector<Complex> twiddle(static_cast<size_t>(m_) * m_);
  for (int j = 0; j < m_; ++j)
    for (int g = 0; g < m_; ++g)
      twiddle[static_cast<size_t>(j) * m_ + g] =
          std::polar(1.0 / m_, -kTwoPi * j * g / m_);

  int stride = 1;
  for (int d = n_ - 1; d >= 0; --d) {
    std::vector<Complex> next(work.size(), Complex(0.0));
    int blocks = static_cast<int>(work.size()) / (m_ * stride);
    for (int b = 0; b < blocks; ++b)
      for (int r = 0; r < stride; ++r) {
        int base = b * m_ * stride + r;
        for (int j = 0; j < m_; ++j) {
          Complex acc(0.0);
          for (int g = 0; g < m_; ++g)
            acc += work[base + g * stride] * twiddle[static_cast<size_t>(j) * m_ + g];
          next[base + j * stride] = acc;
        }
      }
    work.swap(next);
    stride *= m_;
  }
  fourier_ = std::move(work);
}

Complex Field::fourier(const MultiIndex& m) const {
  int half = (m_ - 1) / 2;
  int flat = 0;
  for (int d = 0; d < n_; ++d) {
    if (std::abs(m[d]) > half) return Complex(0.0);
    flat = flat * m_ + idx_of_freq(m[d]);
  }
  return fourier_[flat];
}

int Field::bandwidth() const {
  double peak = 0.0;
  for (const auto& c : fourier_) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return 0;
  int bw = 0;
  for (size_t i = 0; i < fourier_.size(); ++i) {
    if (std::abs(fourier_[i]) <= 1e-13 * peak) continue;
    int flat = static_cast<int>(i);
    int width = 0;
    for (int d = n_ - 1; d >= 0; --d) {
      width = std::max(width, std::abs(freq_of(flat % m_)));
      flat /= m_;
    }
    bw = std::max(bw, width);
  }
  return bw;
}

bool Field::is_real(double tol) const {
  for (const auto& s : samples_)
    if (std::abs(s.imag()) > tol) return false;
  return true;
}

double Field::max_abs() const {
  double v = 0.0;
  for (const auto& s : samples_) v = std::max(v, std::abs(s));
  return v;
}

Complex Field::mean() const {
  Complex acc(0.0);
  for (const auto& s : samples_) acc += s;
  return acc / static_cast<double>(samples_.size());
}

Complex Field::eval(const Vec& x) const {
  int half = (m_ - 1) / 2;
  // Evaluate the trig polynomial axis by axis via cached phase tables.
  std::vector<std::vector<Complex>> phase(n_);
  for (int d = 0; d < n_; ++d) {
    phase[d].resize(m_);
    for (int f = -half; f <= half; ++f)
      phase[d][idx_of_freq(f)] = std::polar(1.0, kTwoPi * f * x[d]);
    if (m_ % 2 == 0) phase[d][half + 1] = Complex(0.0);  // drop the Nyquist mode
  }
  Complex acc(0.0);
  for (size_t i = 0; i < fourier_.size(); ++i) {
    if (fourier_[i] == Complex(0.0)) continue;
    int flat = static_cast<int>(i);
    Complex w = fourier_[i];
    for (int d = n_ - 1; d >= 0; --d) {
      w *= phase[d][flat % m_];
      flat /= m_;
    }
    acc += w;
  }
  return acc;
}

Field Field::derivative(int axis) const {
  Field out(n_, m_);
  int half = (m_ - 1) / 2;
  out.fourier_ = fourier_;
  for (size_t i = 0; i < out.fourier_.size(); ++i) {
    int flat = static_cast<int>(i);
    int f_axis = 0;
    for (int d = n_ - 1; d >= 0; --d) {
      if (d == axis) f_axis = freq_of(flat % m_);
      flat /= m_;
    }
    if (std::abs(f_axis) > half)
      out.fourier_[i] = Complex(0.0);
    else
      out.fourier_[i] *= Complex(0.0, kTwoPi * f_axis);
  }
  // Synthesize samples back from the modified table.
  for (int g = 0; g < out.npoints(); ++g) {
    Complex acc(0.0);
    Vec x = out.point(g);
    // inverse DFT, axis-separable
    acc = Complex(0.0);
    int flat_count = static_cast<int>(out.fourier_.size());
    for (int i = 0; i < flat_count; ++i) {
      if (out.fourier_[i] == Complex(0.0)) continue;
      int flat = i;
      double ph = 0.0;
      for (int d = n_ - 1; d >= 0; --d) {
        ph += freq_of(flat % m_) * x[d];
        flat /= m_;
      }
      acc += out.fourier_[i] * std::polar(1.0, kTwoPi * ph);
    }
    out.samples_[g] = acc;
  }
  return out;
}

Field Field::multiply(const Field& other) const {
  Field out(n_, m_);
  for (int i = 0; i < npoints(); ++i) out.samples_[i] = samples_[i] * other.samples_[i];
  out.refresh();
  return out;
}

Field Field::add(const Field& other) const {
  Field out(n_, m_);
  for (int i = 0; i < npoints(); ++i) out.samples_[i] = samples_[i] + other.samples_[i];
  out.refresh();
  return out;
}

Field Field::scaled(Complex factor) const {
  Field out(n_, m_);
  for (int i = 0; i < npoints(); ++i) out.samples_[i] = samples_[i] * factor;
  out.refresh();
  return out;
}

}  // namespace floq
