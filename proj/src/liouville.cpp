#include "floq/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "floq/eigs.hpp"

namespace floq {

long long floquet_dimension(const BandTaylor& taylor, int N) {
  if (taylor.leading_order < 0 || taylor.terms[taylor.leading_order].empty())
    throw NoisyExpansion("Taylor expansion has no detected leading term");
  return qharmonic_dim(taylor.terms[taylor.leading_order], N);
}

LiouvilleReport liouville_dimensions(const PeriodicOperator& op, int n_max, int mf,
                                     const BandTolerances& tol) {
  if (mf <= 0) mf = default_mf(op.n);
  LiouvilleReport rep;
  rep.z = real_fermi_points(op, 0.0, mf, tol);
  rep.d_lower.assign(n_max + 1, 0);
  rep.d_upper.assign(n_max + 1, 0);

  if (rep.z.infinite) {
    rep.classification = LiouvilleClass::Infinite;
    rep.exact = false;
    return rep;
  }
  if (rep.z.points.empty()) {
    rep.classification = LiouvilleClass::Vacuous;
    return rep;
  }
  rep.classification = LiouvilleClass::Finite;

  for (size_t q = 0; q < rep.z.points.size(); ++q) {
    FermiPointReport pr;
    pr.q = rep.z.points[q];
    pr.multiplicity = rep.z.multiplicities[q];
    if (pr.multiplicity == 1) {
      BandTaylor taylor = band_taylor(op, pr.q, 4, Complex(0.0), mf, tol);
      pr.simple = true;
      pr.l0 = taylor.leading_order;
      for (int N = 0; N <= n_max; ++N) {
        long long d = floquet_dimension(taylor, N);
        pr.dims.push_back(d);
        rep.d_lower[N] += d;
        rep.d_upper[N] += d;
      }
    } else {
      rep.exact = false;
      for (int N = 0; N <= n_max; ++N) {
        long long hi = pr.multiplicity * q_dim(op.n, N);
        pr.upper.push_back(hi);
        rep.d_lower[N] += pr.multiplicity;  // at least the Bloch solutions
        rep.d_upper[N] += hi;
      }
    }
    rep.per_point.push_back(std::move(pr));
  }
  return rep;
}

DimensionCrossCheck cross_check_dimensions(const PeriodicOperator& op_normalized,
                                           const LiouvilleReport& report,
                                           const CellSolution& cell,
                                           const std::vector<PolyGrowthSolution>& linear_basis) {
  DimensionCrossCheck cc;
  const int n = op_normalized.n;
  cc.d1_report = report.d_lower.size() > 1 && report.exact ? report.d_lower[1] : -1;
  cc.d1_basis = static_cast<long long>(linear_basis.size());
  cc.d1_formula = cell.alpha_zero ? n + 1 : n;
  std::ostringstream detail;
  if (cc.d1_report != cc.d1_basis || cc.d1_basis != cc.d1_formula) {
    cc.consistent = false;
    detail << "d1 mismatch: report " << cc.d1_report << ", basis " << cc.d1_basis << ", formula "
           << cc.d1_formula << "; ";
  }
  if (cell.alpha_zero && report.d_lower.size() > 2 && report.exact) {
    cc.d2_report = report.d_lower[2];
    cc.d2_formula = h_dim(n, 2);
    if (cc.d2_report != cc.d2_formula) {
      cc.consistent = false;
      detail << "d2 mismatch: report " << cc.d2_report << ", formula " << cc.d2_formula << "; ";
    }
  }
  cc.detail = detail.str();
  if (!cc.consistent) throw InconsistencyDetected(cc.detail);
  return cc;
}

Complex DiscreteMeasureSynthesis::eval(const Vec& x) const {
  Complex acc(0.0);
  for (size_t i = 0; i < xi.size(); ++i)
    acc += weights[i] * std::exp(xi[i].dot(x)) * p[i].eval(x);
  return acc;
}

DiscreteMeasureSynthesis synthesize_from_measure(const PeriodicOperator& op, LambdaFunction& lf,
                                                 const XiLevelSet& level,
                                                 const std::vector<Vec>& xi_points,
                                                 const std::vector<Complex>& weights,
                                                 double tol_level) {
  if (xi_points.empty()) throw EmptyMeasure("measure has no support points");
  DiscreteMeasureSynthesis syn;
  const int n = op.n;
  for (size_t i = 0; i < xi_points.size(); ++i) {
    const Vec& xi = xi_points[i];
    double lam = lf.lambda(xi);
    if (std::abs(lam) > tol_level)
      throw XiNotOnLevelSet("Lambda(xi) = " + std::to_string(lam) + " off the zero level set");
    const LambdaPoint& pt = lf.point(xi);
    syn.xi.push_back(xi);
    syn.weights.push_back(weights[i]);
    syn.p.push_back(pt.p);
    // L(xi) p, synthesized as a field: the exact residual density of u_xi.
    CVec k(n);
    for (int d = 0; d < n; ++d) k[d] = Complex(0.0, -xi[d]);
    auto sm = assemble_shifted(op, k, 16);
    CVec pc(sm.basis.size());
    for (int f = 0; f < sm.basis.size(); ++f) pc[f] = pt.p.fourier(sm.basis.index(f));
    syn.defect.push_back(synthesize_field(sm.basis, sm.matrix * pc, op.grid_m));
  }

  // Residual on the 3^n-cell patch.
  double max_u = 0.0, max_lu = 0.0;
  std::vector<int> idx(n, 0);
  const int pts = 18;
  while (true) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = -1.0 + 3.0 * (idx[d] + 0.41) / pts;
    Complex lu(0.0);
    for (size_t i = 0; i < syn.xi.size(); ++i)
      lu += syn.weights[i] * std::exp(syn.xi[i].dot(x)) * syn.defect[i].eval(x);
    max_lu = std::max(max_lu, std::abs(lu));
    max_u = std::max(max_u, std::abs(syn.eval(x)));
    int d = 0;
    while (d < n && ++idx[d] == pts) {
      idx[d] = 0;
      ++d;
    }
    if (d == n) break;
  }
  syn.residual = max_u > 0 ? max_lu / max_u : max_lu;

  // Growth certificate: sup over the box boundary of |u| e^{-(h(x/|x|)+eps)|x|}
  // must be nonincreasing in the radius beyond 2 for every eps.
  const double radii[3] = {2.0, 5.0, 10.0};
  const double epses[3] = {0.05, 0.1, 0.2};
  syn.growth_ok = true;
  for (double eps : epses) {
    double prev = -1.0;
    std::vector<double> sups;
    for (double r : radii) {
      double sup = 0.0;
      const int samples = 64;
      for (int s = 0; s < samples; ++s) {
        Vec x(n);
        if (n == 1)
          x[0] = (s % 2 == 0 ? r : -r);
        else {
          double t = kTwoPi * s / samples;
          x[0] = r * std::cos(t);
          x[1] = r * std::sin(t);
          if (n == 3) x[2] = 0.0;
        }
        double nrm = x.norm();
        if (nrm == 0.0) continue;
        double bound = (level.h(x / nrm) + eps) * nrm;
        sup = std::max(sup, std::abs(syn.eval(x)) * std::exp(-bound));
      }
      sups.push_back(sup);
      if (prev >= 0.0 && sup > prev * 1.0000001) syn.growth_ok = false;
      prev = sup;
    }
    if (eps == epses[0]) syn.certificate = sups;
  }
  return syn;
}

int CellFunction::support_radius() const {
  int r = 0;
  for (const auto& [gamma, f] : cells) {
    (void)f;
    for (int g : gamma) r = std::max(r, std::abs(g));
  }
  return r;
}

double CellFunction::norm_sq() const {
  // mean over samples = L2(K)^2 by the trapezoid rule
  double total = 0.0;
  for (const auto& [gamma, f] : cells) {
    (void)gamma;
    double cellsum = 0.0;
    for (const Complex& v : f.samples()) cellsum += std::norm(v);
    total += cellsum / f.npoints();
  }
  return total;
}

FloquetTransformValue floquet_transform(const CellFunction& f, int n, int z_per_dim) {
  if (f.cells.empty()) throw EmptyMeasure("transforming an empty cell function");
  if (z_per_dim < 2 * f.support_radius() + 1)
    throw SupportTooLarge("z-grid density below the Nyquist bound of the support");
  FloquetTransformValue out;
  out.n = n;
  out.z_per_dim = z_per_dim;
  const Field& first = f.cells.begin()->second;
  int total = 1;
  for (int d = 0; d < n; ++d) total *= z_per_dim;
  for (int flat = 0; flat < total; ++flat) {
    Vec k(n);
    int rest = flat;
    for (int d = n - 1; d >= 0; --d) {
      k[d] = kTwoPi * (rest % z_per_dim) / z_per_dim;
      rest /= z_per_dim;
    }
    Field acc = Field::constant(n, first.grid(), 0.0);
    for (const auto& [gamma, fg] : f.cells) {
      double phase = 0.0;
      for (int d = 0; d < n; ++d) phase += k[d] * gamma[d];
      acc = acc.add(fg.scaled(Complex(std::cos(phase), std::sin(phase))));
    }
    out.k_points.push_back(k);
    out.cell_values.push_back(acc);
  }
  return out;
}

CellFunction floquet_inverse(const FloquetTransformValue& uf, int support_radius) {
  CellFunction f;
  const int n = uf.n;
  const double total = static_cast<double>(uf.k_points.size());
  std::vector<MultiIndex> gammas;
  MultiIndex g(n, -support_radius);
  while (true) {
    gammas.push_back(g);
    int d = 0;
    while (d < n && ++g[d] > support_radius) {
      g[d] = -support_radius;
      ++d;
    }
    if (d == n) break;
  }
  for (const MultiIndex& gamma : gammas) {
    Field acc = Field::constant(n, uf.cell_values.front().grid(), 0.0);
    for (size_t z = 0; z < uf.k_points.size(); ++z) {
      double phase = 0.0;
      for (int d = 0; d < n; ++d) phase -= uf.k_points[z][d] * gamma[d];
      acc = acc.add(uf.cell_values[z].scaled(Complex(std::cos(phase), std::sin(phase))));
    }
    acc = acc.scaled(1.0 / total);
    if (acc.max_abs() > 1e-12) f.cells.emplace(gamma, acc);
  }
  return f;
}

double parseval_defect(const CellFunction& f, const FloquetTransformValue& uf) {
  double lhs = f.norm_sq();
  double rhs = 0.0;
  for (const Field& v : uf.cell_values) {
    double cellsum = 0.0;
    for (const Complex& s : v.samples()) cellsum += std::norm(s);
    rhs += cellsum / v.npoints();
  }
  rhs /= static_cast<double>(uf.cell_values.size());
  return std::abs(lhs - rhs);
}

}  // namespace floq
