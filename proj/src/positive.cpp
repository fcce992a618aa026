#include "floq/positive.hpp"

#include <algorithm>
#include <cmath>

#include "floq/eigs.hpp"

namespace floq {

namespace {

std::vector<long long> quantize(const Vec& xi) {
  std::vector<long long> key(xi.size());
  for (int i = 0; i < xi.size(); ++i) key[i] = std::llround(xi[i] * 1e12);
  return key;
}

}  // namespace

bool positivity_select(const FourierBasis& basis, int grid_m, CVec& v, Field& out) {
  Field f = synthesize_field(basis, v, grid_m);
  int imax = 0;
  double best = 0.0;
  for (int g = 0; g < f.npoints(); ++g)
    if (std::abs(f.at(g)) > best) {
      best = std::abs(f.at(g));
      imax = g;
    }
  if (best == 0.0) return false;
  Complex scale = std::abs(f.at(imax)) / f.at(imax);
  double min_re = std::numeric_limits<double>::infinity();
  double max_re = 0.0, im_sq = 0.0, norm_sq = 0.0;
  for (int g = 0; g < f.npoints(); ++g) {
    Complex z = f.at(g) * scale;
    min_re = std::min(min_re, z.real());
    max_re = std::max(max_re, z.real());
    im_sq += z.imag() * z.imag();
    norm_sq += std::norm(z);
  }
  if (min_re <= 1e-6 * max_re) return false;
  if (im_sq > 1e-16 * norm_sq) return false;
  v *= scale;
  for (int g = 0; g < f.npoints(); ++g) f.at(g) *= scale;
  f.refresh();
  out = f;
  return true;
}

LambdaFunction::LambdaFunction(const PeriodicOperator& op, int mf) : op_(op), mf_(mf) {
  if (mf_ <= 0) mf_ = default_mf(op.n);
}

LambdaPoint LambdaFunction::solve(const Vec& xi) {
  CVec k(op_.n);
  for (int i = 0; i < op_.n; ++i) k[i] = Complex(0.0, -xi[i]);  // L(x, D - i xi)
  auto sm = assemble_shifted(op_, k, mf_);

  LambdaPoint pt;
  bool found = false;
  if (have_warm_) {
    EigenPair ep = nearest_eigenpair(sm.matrix, warm_lambda_, &warm_vec_);
    if (ep.converged) {
      CVec v = ep.vector;
      Field f;
      if (positivity_select(sm.basis, op_.grid_m, v, f)) {
        pt.lambda = ep.value.real();
        if (std::abs(ep.value.imag()) > 1e-8 * (1.0 + std::abs(ep.value)))
          throw ComplexPrincipalEigenvalue("principal eigenvalue has imaginary part " +
                                           std::to_string(ep.value.imag()));
        pt.p_coeffs = v;
        pt.p = f;
        found = true;
      }
    }
  }
  if (!found) {
    Spectrum sp = dense_spectrum(sm.matrix);
    std::vector<int> order(sp.values.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return sp.values[a].real() < sp.values[b].real(); });
    for (int idx : order) {
      CVec v = sp.vectors.col(idx);
      Field f;
      if (!positivity_select(sm.basis, op_.grid_m, v, f)) continue;
      if (std::abs(sp.values[idx].imag()) > 1e-8 * (1.0 + std::abs(sp.values[idx])))
        throw ComplexPrincipalEigenvalue("positive eigenpair has complex eigenvalue");
      pt.lambda = sp.values[idx].real();
      pt.p_coeffs = v;
      pt.p = f;
      found = true;
      break;
    }
    if (!found)
      throw NoPositiveEigenvector("no eigenvector passes the positivity test at xi given");
  }

  // Adjoint eigenfunction for the same (real) eigenvalue.
  CMat adj = sm.matrix.adjoint();
  EigenPair aep = nearest_eigenpair(adj, pt.lambda, nullptr);
  CVec w;
  Field fstar;
  bool adj_ok = aep.converged && std::abs(aep.value.real() - pt.lambda) < 1e-6 &&
                (w = aep.vector, positivity_select(sm.basis, op_.grid_m, w, fstar));
  if (!adj_ok) {
    Spectrum sp = dense_spectrum(adj);
    int best = -1;
    for (int i = 0; i < sp.values.size(); ++i) {
      if (std::abs(sp.values[i].real() - pt.lambda) > 1e-6) continue;
      w = sp.vectors.col(i);
      if (positivity_select(sm.basis, op_.grid_m, w, fstar)) {
        best = i;
        break;
      }
    }
    if (best < 0)
      throw NoPositiveEigenvector("no positive adjoint eigenvector at the principal eigenvalue");
  }
  pt.p_star_coeffs = w;
  pt.p_star = fstar;

  // Normalize p(0) = 1 (and likewise p*).
  Complex p0 = pt.p.at(0);
  pt.p = pt.p.scaled(1.0 / p0);
  pt.p_coeffs /= p0;
  Complex s0 = pt.p_star.at(0);
  pt.p_star = pt.p_star.scaled(1.0 / s0);
  pt.p_star_coeffs /= s0;

  warm_lambda_ = pt.lambda;
  warm_vec_ = pt.p_coeffs;
  have_warm_ = true;
  return pt;
}

const LambdaPoint& LambdaFunction::point(const Vec& xi) {
  auto key = quantize(xi);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(std::move(key), solve(xi)).first->second;
}

double LambdaFunction::lambda(const Vec& xi) { return point(xi).lambda; }

Vec LambdaFunction::gradient(const Vec& xi, double h) {
  const int n = dim();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    auto central = [&](double step) {
      Vec xp = xi, xm = xi;
      xp[i] += step;
      xm[i] -= step;
      return (lambda(xp) - lambda(xm)) / (2.0 * step);
    };
    double d_h = central(h), d_h2 = central(h / 2.0);
    g[i] = (4.0 * d_h2 - d_h) / 3.0;
  }
  return g;
}

Mat LambdaFunction::hessian(const Vec& xi, double h) {
  const int n = dim();
  Mat hess(n, n);
  double f0 = lambda(xi);
  for (int i = 0; i < n; ++i) {
    Vec xp = xi, xm = xi;
    xp[i] += h;
    xm[i] -= h;
    hess(i, i) = (lambda(xp) - 2.0 * f0 + lambda(xm)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Vec xpp = xi, xpm = xi, xmp = xi, xmm = xi;
      xpp[i] += h;
      xpp[j] += h;
      xpm[i] += h;
      xpm[j] -= h;
      xmp[i] -= h;
      xmp[j] += h;
      xmm[i] -= h;
      xmm[j] -= h;
      double v = (lambda(xpp) - lambda(xpm) - lambda(xmp) + lambda(xmm)) / (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

double XiLevelSet::h(const Vec& omega) const {
  double best = omega.dot(xi_star);
  for (const auto& xi : samples) best = std::max(best, omega.dot(xi));
  return best;
}

namespace {

std::vector<Vec> trace_dirs(int n, int count) {
  std::vector<Vec> dirs;
  if (n == 1) {
    Vec d(1);
    d[0] = 1.0;
    dirs.push_back(d);
    d[0] = -1.0;
    dirs.push_back(d);
    return dirs;
  }
  if (n == 2) {
    if (count <= 0) count = 64;
    for (int i = 0; i < count; ++i) {
      double t = kTwoPi * i / count;
      Vec d(2);
      d[0] = std::cos(t);
      d[1] = std::sin(t);
      dirs.push_back(d);
    }
    return dirs;
  }
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        Vec d(3);
        d[0] = a;
        d[1] = b;
        d[2] = c;
        dirs.push_back(d.normalized());
      }
  return dirs;
}

}  // namespace

XiLevelSet maximize_lambda(LambdaFunction& lf, double tol_level, int trace_directions) {
  const int n = lf.dim();
  Vec xi = Vec::Zero(n);
  double f = lf.lambda(xi);
  for (int iter = 0; iter < 60; ++iter) {
    Vec g = lf.gradient(xi);
    if (g.norm() < 1e-10) break;
    Mat hess = lf.hessian(xi, 1e-3);
    Eigen::SelfAdjointEigenSolver<Mat> es(hess);
    if (es.eigenvalues().maxCoeff() > -1e-6)
      throw HessianNotNegativeDefinite("Hessian of Lambda not negative definite at an iterate");
    Vec step = -hess.ldlt().solve(g);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      double fn = lf.lambda(xi + t * step);
      if (fn > f - 1e-14) {
        xi += t * step;
        f = fn;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      if (g.norm() > 1e-7) throw AscentStalled("Newton ascent stopped with gradient norm " +
                                               std::to_string(g.norm()));
      break;
    }
    if ((t * step).norm() < 1e-12) break;
  }

  XiLevelSet out;
  out.xi_star = xi;
  out.lambda0 = f;
  if (f < -tol_level * 10.0)
    out.classification = XiClass::SubZero;
  else if (f <= tol_level)
    out.classification = XiClass::Singleton;
  else
    out.classification = XiClass::ConvexSurface;

  if (out.classification == XiClass::ConvexSurface) {
    for (const Vec& dir : trace_dirs(n, trace_directions)) {
      double lo = 0.0, hi = 0.25;
      while (lf.lambda(xi + hi * dir) > 0.0 && hi < 1e3) {
        lo = hi;
        hi *= 2.0;
      }
      if (hi >= 1e3) continue;  // Lambda should go to -inf along every ray
      for (int it = 0; it < 60 && hi - lo > 1e-11; ++it) {
        double mid = 0.5 * (lo + hi);
        (lf.lambda(xi + mid * dir) > 0.0 ? lo : hi) = mid;
      }
      out.samples.push_back(xi + 0.5 * (lo + hi) * dir);
    }
  }
  return out;
}

Field ground_state_product(const LambdaPoint& pt) {
  Field psi = pt.p.multiply(pt.p_star);
  return psi.scaled(1.0 / psi.integral());
}

std::vector<Field> shifted_drift(const PeriodicOperator& op, const Vec& xi, const Field& p) {
  const int n = op.n;
  // log-derivative fields d_j p / p
  std::vector<Field> logd;
  for (int j = 0; j < n; ++j) {
    Field d = p.derivative(j);
    for (int g = 0; g < d.npoints(); ++g) d.at(g) /= p.at(g);
    d.refresh();
    logd.push_back(d);
  }
  std::vector<Field> out;
  for (int i = 0; i < n; ++i) {
    Field s = op.b[i];
    for (int j = 0; j < n; ++j) {
      Field term = op.aij(i, j).multiply(logd[j].add(Field::constant(n, op.grid_m, xi[j])));
      s = s.add(term.scaled(-2.0));
    }
    out.push_back(s);
  }
  return out;
}

Lambda0Criteria lambda0_criteria(const PeriodicOperator& op, LambdaFunction& lf,
                                 const XiLevelSet& level) {
  Lambda0Criteria crit;
  crit.lambda0 = level.lambda0;
  crit.c_is_zero = op.c.max_abs() <= 1e-12;
  crit.c_nonneg = true;
  for (const Complex& v : op.c.samples())
    if (v.real() < -1e-12) crit.c_nonneg = false;

  if (crit.c_is_zero) {
    const LambdaPoint& origin = lf.point(Vec::Zero(op.n));
    Field psi = origin.p_star.scaled(1.0 / origin.p_star.integral());
    crit.alpha = Vec(op.n);
    for (int j = 0; j < op.n; ++j) crit.alpha[j] = op.b[j].multiply(psi).integral().real();
  }

  if (level.classification != XiClass::SubZero) {
    Vec xi = level.classification == XiClass::ConvexSurface && !level.samples.empty()
                 ? level.samples.front()
                 : level.xi_star;
    const LambdaPoint& pt = lf.point(xi);
    Field psi = ground_state_product(pt);
    std::vector<Field> bt = shifted_drift(op, xi, pt.p);
    crit.gamma = Vec(op.n);
    for (int i = 0; i < op.n; ++i) crit.gamma[i] = bt[i].multiply(psi).integral().real();
    crit.xi_used = xi;
  }
  return crit;
}

}  // namespace floq
