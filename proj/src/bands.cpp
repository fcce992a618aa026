#include "floq/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "floq/eigs.hpp"

namespace floq {

namespace {

CVec real_to_cvec(const Vec& k) {
  CVec out(k.size());
  for (int i = 0; i < k.size(); ++i) out[i] = Complex(k[i], 0.0);
  return out;
}

}  // namespace

std::vector<Vec> serpentine_grid(int n, int per_dim) {
  const double lo = -kTwoPi / 2.0, hi = kTwoPi / 2.0;
  auto coord = [&](int i) { return lo + (hi - lo) * i / (per_dim - 1); };
  std::vector<Vec> out;
  if (n == 1) {
    for (int i = 0; i < per_dim; ++i) {
      Vec k(1);
      k[0] = coord(i);
      out.push_back(k);
    }
    return out;
  }
  if (n == 2) {
    for (int i = 0; i < per_dim; ++i)
      for (int jj = 0; jj < per_dim; ++jj) {
        int j = (i % 2 == 0) ? jj : per_dim - 1 - jj;
        Vec k(2);
        k[0] = coord(i);
        k[1] = coord(j);
        out.push_back(k);
      }
    return out;
  }
  for (int i = 0; i < per_dim; ++i)
    for (int jj = 0; jj < per_dim; ++jj)
      for (int ll = 0; ll < per_dim; ++ll) {
        int j = (i % 2 == 0) ? jj : per_dim - 1 - jj;
        int l = ((i * per_dim + jj) % 2 == 0) ? ll : per_dim - 1 - ll;
        Vec k(3);
        k[0] = coord(i);
        k[1] = coord(j);
        k[2] = coord(l);
        out.push_back(k);
      }
  return out;
}

BandStructure compute_bands(const PeriodicOperator& op, const std::vector<Vec>& k_grid, int j_count,
                            int mf) {
  if (mf <= 0) mf = default_mf(op.n);
  BandStructure bs;
  bs.k_grid = k_grid;
  bs.branch_count = j_count;
  CMat prev_vectors;  // tracked columns, one per branch
  for (size_t p = 0; p < k_grid.size(); ++p) {
    auto sm = assemble_shifted(op, real_to_cvec(k_grid[p]), mf);
    if (j_count > sm.matrix.rows() / 4)
      throw EigSolverFailure("compute_bands: J exceeds matrix size / 4");
    Spectrum sp = dense_spectrum(sm.matrix);
    const int total = static_cast<int>(sp.values.size());
    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;

    std::vector<int> chosen(j_count, -1);
    if (p == 0) {
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (sp.values[a].real() != sp.values[b].real())
          return sp.values[a].real() < sp.values[b].real();
        return sp.values[a].imag() < sp.values[b].imag();
      });
      for (int j = 0; j < j_count; ++j) chosen[j] = order[j];
    } else {
      // Degenerate eigenvalues make individual eigenvectors arbitrary within
      // their eigenspace, so overlaps are judged against eigenvalue clusters.
      const double scale = std::max(1.0, sp.values.cwiseAbs().maxCoeff());
      std::vector<int> cluster(total, -1);
      std::vector<std::vector<int>> members;
      {
        std::vector<int> by_val(order);
        std::sort(by_val.begin(), by_val.end(), [&](int a, int b) {
          if (sp.values[a].real() != sp.values[b].real())
            return sp.values[a].real() < sp.values[b].real();
          return sp.values[a].imag() < sp.values[b].imag();
        });
        for (int idx : by_val) {
          if (!members.empty() &&
              std::abs(sp.values[idx] - sp.values[members.back().front()]) <= 1e-8 * scale) {
            cluster[idx] = static_cast<int>(members.size()) - 1;
            members.back().push_back(idx);
          } else {
            cluster[idx] = static_cast<int>(members.size());
            members.push_back({idx});
          }
        }
      }
      std::vector<bool> used(total, false);
      for (int j = 0; j < j_count; ++j) {
        double best_proj = -1.0;
        int best_cluster = -1;
        for (size_t c = 0; c < members.size(); ++c) {
          bool has_free = false;
          double proj_sq = 0.0;
          for (int i : members[c]) {
            if (!used[i]) has_free = true;
            proj_sq += std::norm(prev_vectors.col(j).dot(sp.vectors.col(i)));
          }
          if (!has_free) continue;
          double proj = std::sqrt(proj_sq);
          if (proj > best_proj) {
            best_proj = proj;
            best_cluster = static_cast<int>(c);
          }
        }
        if (best_proj < 0.5)
          throw BranchTrackingAmbiguous("eigenvector overlap " + std::to_string(best_proj) +
                                        " below 0.5; refine the k grid");
        double best = -1.0;
        int best_i = -1;
        for (int i : members[best_cluster]) {
          if (used[i]) continue;
          double ov = std::abs(prev_vectors.col(j).dot(sp.vectors.col(i)));
          if (ov > best) {
            best = ov;
            best_i = i;
          }
        }
        chosen[j] = best_i;
        used[best_i] = true;
      }
    }
    prev_vectors.resize(total, j_count);
    std::vector<Complex> row(j_count);
    for (int j = 0; j < j_count; ++j) {
      row[j] = sp.values[chosen[j]];
      prev_vectors.col(j) = sp.vectors.col(chosen[j]);
    }
    bs.bands.push_back(std::move(row));
  }
  return bs;
}

double duality_check(const PeriodicOperator& op, const std::vector<Vec>& k_samples, int mf) {
  if (mf <= 0) mf = default_mf(op.n);
  double worst = 0.0;
  for (const auto& k : k_samples) {
    auto adj = assemble_shifted(op, real_to_cvec(k), mf, true);
    auto neg = assemble_shifted(op, real_to_cvec(-k), mf, false);
    CVec ea = dense_spectrum(adj.matrix).values;
    CVec eb = dense_spectrum(neg.matrix).values;
    double haus = 0.0;
    for (int i = 0; i < ea.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < eb.size(); ++j) best = std::min(best, std::abs(ea[i] - eb[j]));
      haus = std::max(haus, best);
    }
    for (int j = 0; j < eb.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < ea.size(); ++i) best = std::min(best, std::abs(ea[i] - eb[j]));
      haus = std::max(haus, best);
    }
    worst = std::max(worst, haus);
  }
  return worst;
}

namespace {

Vec wrap_to_bz(const Vec& k) {
  Vec out = k;
  for (int d = 0; d < k.size(); ++d) {
    double v = std::fmod(out[d] + kTwoPi / 2.0, kTwoPi);
    if (v < 0) v += kTwoPi;
    out[d] = v - kTwoPi / 2.0;
  }
  return out;
}

double bz_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int d = 0; d < a.size(); ++d) {
    double diff = std::abs(a[d] - b[d]);
    diff = std::min(diff, kTwoPi - diff);
    s += diff * diff;
  }
  return std::sqrt(s);
}

/// Nelder-Mead on f: R^n -> R, small n.
Vec nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double scale,
                int max_iter, double xtol) {
  const int n = static_cast<int>(start.size());
  std::vector<Vec> x(n + 1, start);
  std::vector<double> fx(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1][i] += scale;
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<Vec> xs;
    std::vector<double> fs;
    for (int i = 0; i <= n; ++i) {
      xs.push_back(x[idx[i]]);
      fs.push_back(fx[idx[i]]);
    }
    x = xs;
    fx = fs;
    double spread = 0.0;
    for (int i = 1; i <= n; ++i) spread = std::max(spread, (x[i] - x[0]).norm());
    if (spread < xtol) break;

    Vec centroid = Vec::Zero(n);
    for (int i = 0; i < n; ++i) centroid += x[i];
    centroid /= n;
    Vec xr = centroid + (centroid - x[n]);
    double fr = f(xr);
    if (fr < fx[0]) {
      Vec xe = centroid + 2.0 * (centroid - x[n]);
      double fe = f(xe);
      if (fe < fr) {
        x[n] = xe;
        fx[n] = fe;
      } else {
        x[n] = xr;
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      x[n] = xr;
      fx[n] = fr;
    } else {
      Vec xc = centroid + 0.5 * (x[n] - centroid);
      double fc = f(xc);
      if (fc < fx[n]) {
        x[n] = xc;
        fx[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          x[i] = x[0] + 0.5 * (x[i] - x[0]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fx[i] < fx[best]) best = i;
  return x[best];
}

}  // namespace

FermiPointSet real_fermi_points(const PeriodicOperator& op, double level, int mf,
                                const BandTolerances& tol) {
  if (mf <= 0) mf = default_mf(op.n);
  const int n = op.n;
  const int per_dim = n == 1 ? 65 : (n == 2 ? 17 : 9);
  std::vector<Vec> grid = serpentine_grid(n, per_dim);
  FourierBasis basis(n, mf);
  int j_count = std::min(n == 1 ? 6 : 8, basis.size() / 4);
  BandStructure bs = compute_bands(op, grid, j_count, mf);

  // Candidate k where a band comes close to the level, or crosses it (real case).
  double spacing = kTwoPi / (per_dim - 1);
  std::vector<Vec> candidates;
  for (size_t p = 0; p < grid.size(); ++p)
    for (int j = 0; j < bs.branch_count; ++j) {
      Complex lam = bs.bands[p][j] - level;
      bool close = std::abs(lam) < 4.0 * spacing * (1.0 + std::abs(level));
      bool crossing = false;
      if (p + 1 < grid.size()) {
        Complex next = bs.bands[p + 1][j] - level;
        if (std::abs(lam.imag()) < 1e-9 && std::abs(next.imag()) < 1e-9 &&
            lam.real() * next.real() < 0.0)
          crossing = true;
      }
      if (close || crossing) candidates.push_back(grid[p]);
    }

  auto merit = [&](const Vec& k) {
    auto sm = assemble_shifted(op, real_to_cvec(k), mf);
    sm.matrix.diagonal().array() -= Complex(level);
    return smallest_singular_estimate(sm.matrix);
  };

  FermiPointSet out;
  out.level = level;
  std::vector<double> best_sigma;
  for (const auto& cand : candidates) {
    Vec refined = nelder_mead(merit, cand, spacing, 400, 1e-11);
    double sigma = merit(refined);
    if (sigma > std::max(tol.tol_fermi, 1e-7)) continue;
    refined = wrap_to_bz(refined);
    bool merged = false;
    for (size_t i = 0; i < out.points.size(); ++i)
      if (bz_distance(out.points[i], refined) < std::max(tol.merge_radius, 1e-4)) {
        if (sigma < best_sigma[i]) {
          out.points[i] = refined;
          best_sigma[i] = sigma;
        }
        merged = true;
        break;
      }
    if (!merged) {
      out.points.push_back(refined);
      best_sigma.push_back(sigma);
    }
  }

  // Tangential zeros (band touching the level) leave sigma_min quadratically
  // flat, limiting the merit search to ~1e-6 in k. Polish such points by a
  // Newton search for the stationary point of the tracked real eigenvalue.
  auto lam_tracked = [&](const Vec& kk) {
    auto sm = assemble_shifted(op, real_to_cvec(kk), mf);
    return nearest_eigenpair(sm.matrix, Complex(level)).value - level;
  };
  for (Vec& p : out.points) {
    Complex l0v = lam_tracked(p);
    if (std::abs(l0v.imag()) > 1e-8) continue;
    const double h = 1e-4;
    for (int iter = 0; iter < 6; ++iter) {
      Vec g(n);
      Mat hess(n, n);
      double f0 = lam_tracked(p).real();
      for (int i = 0; i < n; ++i) {
        Vec pp = p, pm = p;
        pp[i] += h;
        pm[i] -= h;
        double fp = lam_tracked(pp).real(), fm = lam_tracked(pm).real();
        g[i] = (fp - fm) / (2.0 * h);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        for (int j = i + 1; j < n; ++j) {
          Vec a1 = p, a2 = p, a3 = p, a4 = p;
          a1[i] += h;
          a1[j] += h;
          a2[i] += h;
          a2[j] -= h;
          a3[i] -= h;
          a3[j] += h;
          a4[i] -= h;
          a4[j] -= h;
          double v = (lam_tracked(a1).real() - lam_tracked(a2).real() -
                      lam_tracked(a3).real() + lam_tracked(a4).real()) /
                     (4.0 * h * h);
          hess(i, j) = v;
          hess(j, i) = v;
        }
      }
      if (g.norm() > 5e-2) break;  // transversal zero: sigma_min was sharp already
      Vec step = -hess.fullPivLu().solve(g);
      if (!step.allFinite() || step.norm() > 0.1) break;
      Vec cand = p + step;
      if (std::abs(lam_tracked(cand)) > std::max(std::abs(f0), 0.01 * tol.tol_fermi)) break;
      p = wrap_to_bz(cand);
      if (step.norm() < 1e-10) break;
    }
  }

  if (static_cast<int>(out.points.size()) > tol.max_isolated_points) {
    out.infinite = true;  // heuristic: denser than isolated points can be on this grid
    out.points.clear();
    out.multiplicities.clear();
    return out;
  }

  for (const auto& k : out.points) {
    auto sm = assemble_shifted(op, real_to_cvec(k), mf);
    sm.matrix.diagonal().array() -= Complex(level);
    Vec sv = singular_values(sm.matrix);
    double thresh = std::max(tol.tol_fermi, 50.0 * sv[0]);
    int mult = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] <= thresh) ++mult;
    out.multiplicities.push_back(std::max(1, mult));
  }
  return out;
}

namespace {

/// Second-order central-difference stencil for the m-th derivative (unit step).
std::vector<std::pair<int, double>> cd_stencil(int m) {
  switch (m) {
    case 0:
      return {{0, 1.0}};
    case 1:
      return {{-1, -0.5}, {1, 0.5}};
    case 2:
      return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    case 3:
      return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    case 4:
      return {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};
    default:
      throw std::invalid_argument("cd_stencil: order too high");
  }
}

double fd_step(int total_order) {
  // Balances eigenvalue noise (~1e-11 absolute) against O(h^4) truncation.
  static const double steps[5] = {0.0, 6.3e-3, 1.5e-2, 2.7e-2, 4.2e-2};
  return steps[std::min(total_order, 4)];
}

}  // namespace

BandTaylor band_taylor(const PeriodicOperator& op, const Vec& k0, int max_order,
                       Complex branch_value, int mf, const BandTolerances& tol) {
  if (mf <= 0) mf = default_mf(op.n);
  const int n = op.n;
  auto base_sm = assemble_shifted(op, real_to_cvec(k0), mf);
  Spectrum sp = dense_spectrum(base_sm.matrix);
  int pick = 0;
  for (int i = 1; i < sp.values.size(); ++i)
    if (std::abs(sp.values[i] - branch_value) < std::abs(sp.values[pick] - branch_value)) pick = i;
  Complex lam0 = sp.values[pick];
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sp.values.size(); ++i)
    if (i != pick) gap = std::min(gap, std::abs(sp.values[i] - lam0));
  if (gap < tol.gap_tol)
    throw MultiplicityAboveOne("spectral gap " + std::to_string(gap) + " below gap_tol");
  CVec v0 = sp.vectors.col(pick);

  // Tracked branch evaluation, cached by the offset pattern.
  std::map<std::vector<long long>, Complex> cache;
  auto lam_at = [&](const Vec& delta) {
    std::vector<long long> key(n);
    for (int d = 0; d < n; ++d) key[d] = std::llround(delta[d] * 1e12);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto sm = assemble_shifted(op, real_to_cvec(k0 + delta), mf);
    EigenPair ep = nearest_eigenpair(sm.matrix, lam0, &v0);
    if (!ep.converged) {
      Spectrum full = dense_spectrum(sm.matrix);
      int best = 0;
      for (int i = 1; i < full.values.size(); ++i)
        if (std::abs(full.values[i] - lam0) < std::abs(full.values[best] - lam0)) best = i;
      ep.value = full.values[best];
    }
    cache.emplace(std::move(key), ep.value);
    return ep.value;
  };

  // Mixed partials by tensor central differences with one Richardson level.
  auto mixed_partial = [&](const MultiIndex& alpha, double h) {
    std::vector<std::vector<std::pair<int, double>>> stencils;
    for (int d = 0; d < n; ++d) stencils.push_back(cd_stencil(alpha[d]));
    Complex acc(0.0);
    std::vector<size_t> pos(n, 0);
    while (true) {
      double w = 1.0;
      Vec delta = Vec::Zero(n);
      for (int d = 0; d < n; ++d) {
        w *= stencils[d][pos[d]].second;
        delta[d] = stencils[d][pos[d]].first * h;
      }
      acc += w * lam_at(delta);
      int d = 0;
      while (d < n && ++pos[d] == stencils[d].size()) {
        pos[d] = 0;
        ++d;
      }
      if (d == n) break;
    }
    return acc / std::pow(h, mi_sum(alpha));
  };

  BandTaylor out;
  out.k0 = k0;
  out.max_order = max_order;
  out.terms.assign(max_order + 1, GradedPolynomial(n));
  out.terms[0] = GradedPolynomial::monomial(n, MultiIndex(n, 0), lam0);

  double worst_resid = 0.0;
  for (int l = 1; l <= max_order; ++l) {
    GradedPolynomial term(n);
    for (const auto& alpha : monomials(n, l)) {
      double h = fd_step(l);
      Complex d_h = mixed_partial(alpha, h);
      Complex d_h2 = mixed_partial(alpha, h / 2.0);
      Complex d = (4.0 * d_h2 - d_h) / 3.0;
      worst_resid = std::max(worst_resid, std::abs(d - d_h2));
      double fact = 1.0;
      for (int comp : alpha)
        for (int j = 2; j <= comp; ++j) fact *= j;
      Complex coeff = d / fact;
      if (std::abs(coeff) > 1e-11) term.set(alpha, coeff);
    }
    out.terms[l] = term;
  }
  out.richardson_residual = worst_resid;

  out.leading_order = -1;
  for (int l = 0; l <= max_order; ++l) {
    double norm = out.terms[l].coeff_norm();
    if (l == 0) norm = std::abs(lam0 - branch_value) > tol.taylor_zero_tol
                           ? out.terms[l].coeff_norm()
                           : 0.0;
    if (norm > tol.taylor_zero_tol) {
      out.leading_order = l;
      break;
    }
    out.terms[l] = GradedPolynomial(n);  // below the zero threshold: treat as 0
  }
  if (out.leading_order < 0)
    throw NoisyExpansion("no nonzero Taylor term up to order " + std::to_string(max_order));
  return out;
}

Complex band_taylor_eval(const BandTaylor& taylor, const Vec& delta) {
  CVec x(delta.size());
  for (int i = 0; i < delta.size(); ++i) x[i] = Complex(delta[i], 0.0);
  Complex acc(0.0);
  for (const auto& term : taylor.terms) acc += term.eval(x);
  return acc;
}

}  // namespace floq
