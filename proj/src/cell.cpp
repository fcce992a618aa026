#include "floq/cell.hpp"

#include <algorithm>
#include <cmath>

#include "floq/eigs.hpp"

namespace floq {

namespace {

CVec field_coeffs(const Field& f, const FourierBasis& basis) {
  CVec v(basis.size());
  for (int i = 0; i < basis.size(); ++i) v[i] = f.fourier(basis.index(i));
  return v;
}

using TermMap = std::map<MultiIndex, Field>;

void accumulate(TermMap& dst, const MultiIndex& nu, const Field& f) {
  auto it = dst.find(nu);
  if (it == dst.end())
    dst.emplace(nu, f);
  else
    it->second = it->second.add(f);
}

TermMap d_axis(const TermMap& u, int axis) {
  TermMap out;
  for (const auto& [nu, p] : u) {
    if (nu[axis] > 0) {
      MultiIndex lower = nu;
      lower[axis] -= 1;
      accumulate(out, lower, p.scaled(static_cast<double>(nu[axis])));
    }
    accumulate(out, nu, p.derivative(axis));
  }
  return out;
}

TermMap apply_operator(const PeriodicOperator& op, const TermMap& u) {
  const int n = op.n;
  std::vector<TermMap> du(n);
  for (int i = 0; i < n; ++i) du[i] = d_axis(u, i);
  TermMap out;
  for (const auto& [nu, p] : u) accumulate(out, nu, op.c.multiply(p));
  for (int i = 0; i < n; ++i) {
    for (const auto& [nu, p] : du[i]) accumulate(out, nu, op.b[i].multiply(p));
    for (int j = 0; j < n; ++j) {
      TermMap dd = d_axis(du[i], j);
      for (const auto& [nu, p] : dd) accumulate(out, nu, op.aij(i, j).multiply(p).scaled(-1.0));
    }
  }
  return out;
}

Complex eval_terms(const TermMap& terms, const Vec& x) {
  Complex acc(0.0);
  for (const auto& [nu, p] : terms) {
    double mono = 1.0;
    for (size_t d = 0; d < nu.size(); ++d) mono *= std::pow(x[static_cast<int>(d)], nu[d]);
    acc += mono * p.eval(x);
  }
  return acc;
}

/// Solves L x = rhs_field + compat * 1 on the torus via the bordered system;
/// returns the zero-mean solution field.
Field cell_solve_rhs(const CMat& a_mat, const FourierBasis& basis, int grid_m,
                     const CVec& psi_coeffs, const Field& rhs, double compat, double* mu_out) {
  CVec f = field_coeffs(rhs, basis);
  f[basis.flat(MultiIndex(basis.dim(), 0))] += compat;
  DeflatedSolve ds = deflated_solve(a_mat, psi_coeffs, basis.flat(MultiIndex(basis.dim(), 0)), f);
  if (mu_out) *mu_out = std::abs(ds.mu);
  return synthesize_field(basis, ds.x, grid_m);
}

}  // namespace

CellSolution solve_cell(const PeriodicOperator& op, int mf, bool need_correctors) {
  if (op.c.max_abs() > 1e-10) throw CNotZero("cell problems require c = 0 (L1 = 0)");
  if (mf <= 0) mf = default_mf(op.n);
  const int n = op.n;
  auto sm = assemble_shifted(op, CVec::Zero(n), mf);
  const FourierBasis& basis = sm.basis;

  CellSolution cell;
  cell.mf = mf;
  EigenPair adj = nearest_eigenpair(sm.matrix.adjoint(), 0.0);
  CVec w = adj.vector;
  Field psi;
  if (!adj.converged || !positivity_select(basis, op.grid_m, w, psi)) {
    Spectrum sp = dense_spectrum(sm.matrix.adjoint());
    bool ok = false;
    for (int i = 0; i < sp.values.size(); ++i) {
      if (std::abs(sp.values[i]) > 1e-6) continue;
      w = sp.vectors.col(i);
      if (positivity_select(basis, op.grid_m, w, psi)) {
        ok = true;
        break;
      }
    }
    if (!ok) throw AdjointKernelEmpty("no positive torus solution of L* u = 0 found");
  }
  Complex total = psi.integral();
  psi = psi.scaled(1.0 / total);
  w /= total;
  cell.psi = psi;
  cell.psi_coeffs = w;
  cell.residual = (sm.matrix.adjoint() * w).norm() / w.norm();

  cell.alpha = Vec(n);
  for (int j = 0; j < n; ++j) cell.alpha[j] = op.b[j].multiply(psi).integral().real();
  cell.gamma = cell.alpha;
  cell.alpha_zero = cell.alpha.norm() <= 1e-7;

  if (cell.alpha_zero && need_correctors) {
    for (int j = 0; j < n; ++j) {
      double mu = 0.0;
      Field rhs = op.b[j].scaled(-1.0);
      Field psi_j = cell_solve_rhs(sm.matrix, basis, op.grid_m, w, rhs, cell.alpha[j], &mu);
      if (mu > 1e-7) throw CompatibilityFailed("corrector compatibility defect above tolerance");
      cell.corrector.push_back(psi_j);
    }
    // Q = integral of (I + grad Psi)^T A (I + grad Psi) psi.
    std::vector<std::vector<Field>> grad(n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) grad[j].push_back(cell.corrector[j].derivative(k));
    cell.q_hom = Mat::Zero(n, n);
    Field one = Field::constant(n, op.grid_m, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Field acc = Field::constant(n, op.grid_m, 0.0);
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            Field gki = grad[i][k];
            if (k == i) gki = gki.add(one);
            Field glj = grad[j][l];
            if (l == j) glj = glj.add(one);
            acc = acc.add(op.aij(k, l).multiply(gki).multiply(glj));
          }
        cell.q_hom(i, j) = acc.multiply(psi).integral().real();
      }
    cell.q_hom = (0.5 * (cell.q_hom + cell.q_hom.transpose())).eval();
  }
  return cell;
}

Complex PolyGrowthSolution::eval(const Vec& x) const { return eval_terms(terms, x); }

double solution_residual(const PeriodicOperator& op, const PolyGrowthSolution& u, int cell_radius,
                         int per_cell) {
  TermMap lu = apply_operator(op, u.terms);
  const int n = op.n;
  const int pts = (2 * cell_radius + 1) * per_cell;
  double max_lu = 0.0, max_u = 0.0;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec x(n);
    for (int d = 0; d < n; ++d)
      x[d] = -cell_radius + (2.0 * cell_radius + 1.0) * (idx[d] + 0.37) / pts;
    max_lu = std::max(max_lu, std::abs(eval_terms(lu, x)));
    max_u = std::max(max_u, std::abs(u.eval(x)));
    int d = 0;
    while (d < n && ++idx[d] == pts) {
      idx[d] = 0;
      ++d;
    }
    if (d == n) break;
  }
  return max_u > 0 ? max_lu / max_u : max_lu;
}

std::vector<double> cell_growth_profile(const PolyGrowthSolution& u, int max_gamma, int per_cell) {
  const int n = u.n;
  std::vector<double> prof;
  for (int g = 0; g <= max_gamma; ++g) {
    double sum = 0.0;
    int count = 0;
    std::vector<int> idx(n, 0);
    while (true) {
      Vec x(n);
      for (int d = 0; d < n; ++d) x[d] = g + (idx[d] + 0.5) / per_cell;
      sum += std::norm(u.eval(x));
      ++count;
      int d = 0;
      while (d < n && ++idx[d] == per_cell) {
        idx[d] = 0;
        ++d;
      }
      if (d == n) break;
    }
    prof.push_back(std::sqrt(sum / count));
  }
  return prof;
}

bool growth_bound_holds(const PolyGrowthSolution& u, int max_gamma, double slack) {
  std::vector<double> prof = cell_growth_profile(u, max_gamma);
  const double root_n = std::sqrt(static_cast<double>(u.n));
  double base = 0.0;
  for (int g = 0; g <= std::min(2, max_gamma); ++g)
    base = std::max(base, prof[g] / std::pow(1.0 + g * root_n, u.order));
  if (base == 0.0) base = 1e-300;
  for (int g = 3; g <= max_gamma; ++g)
    if (prof[g] / std::pow(1.0 + g * root_n, u.order) > slack * base) return false;
  return true;
}

std::vector<PolyGrowthSolution> linear_growth_basis(const PeriodicOperator& op,
                                                    const CellSolution& cell) {
  const int n = op.n;
  std::vector<PolyGrowthSolution> out;
  PolyGrowthSolution one;
  one.n = n;
  one.order = 0;
  one.terms.emplace(MultiIndex(n, 0), Field::constant(n, op.grid_m, 1.0));
  out.push_back(one);

  auto sm = assemble_shifted(op, CVec::Zero(n), cell.mf);
  if (cell.alpha_zero) {
    for (int j = 0; j < n; ++j) {
      PolyGrowthSolution fj;
      fj.n = n;
      fj.order = 1;
      MultiIndex ej(n, 0);
      ej[j] = 1;
      fj.terms.emplace(ej, Field::constant(n, op.grid_m, 1.0));
      fj.terms.emplace(MultiIndex(n, 0), cell.corrector[j]);
      out.push_back(fj);
    }
    return out;
  }

  // alpha != 0: combinations x_j - (alpha_j/alpha_n) x_n + phi_j, j < n.
  int pivot = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(cell.alpha[j]) > std::abs(cell.alpha[pivot])) pivot = j;
  for (int j = 0; j < n; ++j) {
    if (j == pivot) continue;
    double ratio = cell.alpha[j] / cell.alpha[pivot];
    Field rhs = op.b[j].scaled(-1.0).add(op.b[pivot].scaled(ratio));
    double mu = 0.0;
    Field phi = cell_solve_rhs(sm.matrix, sm.basis, op.grid_m, cell.psi_coeffs, rhs, 0.0, &mu);
    if (mu > 1e-7) throw CompatibilityFailed("combined linear solution not compatible");
    PolyGrowthSolution fj;
    fj.n = n;
    fj.order = 1;
    MultiIndex ej(n, 0);
    ej[j] = 1;
    fj.terms.emplace(ej, Field::constant(n, op.grid_m, 1.0));
    MultiIndex en(n, 0);
    en[pivot] = 1;
    fj.terms.emplace(en, Field::constant(n, op.grid_m, -ratio));
    fj.terms.emplace(MultiIndex(n, 0), phi);
    out.push_back(fj);
  }
  return out;
}

PolyGrowthSolution quadratic_solution(const PeriodicOperator& op, const CellSolution& cell,
                                      const Mat& c_mat, double trace_tol) {
  const int n = op.n;
  if (!cell.alpha_zero) throw CompatibilityFailed("quadratic construction needs alpha = 0");
  double trace = (cell.q_hom * c_mat.transpose()).trace();
  double scale = cell.q_hom.norm() * std::max(1.0, c_mat.norm());
  if (std::abs(trace) > trace_tol * scale)
    throw TraceConditionViolated("tr(Q C^T) = " + std::to_string(trace));

  PolyGrowthSolution u;
  u.n = n;
  u.order = 2;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double coeff = (i == j) ? 0.5 * c_mat(i, i) : c_mat(i, j);
      if (coeff == 0.0) continue;
      MultiIndex nu(n, 0);
      nu[i] += 1;
      nu[j] += 1;
      u.terms.emplace(nu, Field::constant(n, op.grid_m, coeff));
    }
  for (int j = 0; j < n; ++j) {
    Field pj = Field::constant(n, op.grid_m, 0.0);
    for (int k = 0; k < n; ++k) pj = pj.add(cell.corrector[k].scaled(c_mat(j, k)));
    MultiIndex ej(n, 0);
    ej[j] = 1;
    accumulate(u.terms, ej, pj);
  }

  // The polynomial-degree >= 1 parts of L u cancel by construction; the
  // remaining periodic part is the right-hand side for p0.
  TermMap lu = apply_operator(op, u.terms);
  Field f = Field::constant(n, op.grid_m, 0.0);
  for (const auto& [nu, p] : lu) {
    if (mi_sum(nu) == 0)
      f = f.add(p);
    else if (p.max_abs() > 1e-8)
      throw CompatibilityFailed("polynomial part of L u did not cancel");
  }
  auto sm = assemble_shifted(op, CVec::Zero(n), cell.mf);
  double mu = 0.0;
  Field p0 = cell_solve_rhs(sm.matrix, sm.basis, op.grid_m, cell.psi_coeffs, f.scaled(-1.0), 0.0,
                            &mu);
  if (mu > 1e-6) throw CompatibilityFailed("quadratic cell compatibility defect " +
                                           std::to_string(mu));
  accumulate(u.terms, MultiIndex(n, 0), p0);
  return u;
}

Mat TwoScale::m2_matrix(int n) const {
  Mat q = Mat::Zero(n, n);
  for (const auto& [nu, val] : m) {
    if (mi_sum(nu) != 2) continue;
    int first = -1, second = -1;
    for (int d = 0; d < n; ++d)
      for (int rep = 0; rep < nu[d]; ++rep) (first < 0 ? first : second) = d;
    if (first == second)
      q(first, first) = -val;
    else {
      q(first, second) = -0.5 * val;
      q(second, first) = -0.5 * val;
    }
  }
  return q;
}

TwoScale two_scale_correctors(const PeriodicOperator& op, const CellSolution& cell, int s_max) {
  const int n = op.n;
  if (!cell.alpha_zero) throw CompatibilityFailed("two-scale recursion needs alpha = 0");
  auto sm = assemble_shifted(op, CVec::Zero(n), cell.mf);
  TwoScale ts;
  ts.phi.emplace(MultiIndex(n, 0), Field::constant(n, op.grid_m, 1.0));

  for (int s = 1; s <= s_max; ++s) {
    for (const MultiIndex& nu : monomials(n, s)) {
      // g_nu collects L1 Phi_{s-1} and L2 Phi_{s-2} contributions at d^nu.
      Field g = Field::constant(n, op.grid_m, 0.0);
      for (int i = 0; i < n; ++i) {
        if (nu[i] == 0) continue;
        MultiIndex mu = nu;
        mu[i] -= 1;
        auto it = ts.phi.find(mu);
        if (it == ts.phi.end()) continue;
        Field term = op.b[i].multiply(it->second);
        for (int j = 0; j < n; ++j)
          term = term.add(op.aij(i, j).multiply(it->second.derivative(j)).scaled(-2.0));
        g = g.add(term);
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (nu[i] == 0) continue;
          MultiIndex mu = nu;
          mu[i] -= 1;
          if (mu[j] == 0) continue;
          mu[j] -= 1;
          auto it = ts.phi.find(mu);
          if (it == ts.phi.end()) continue;
          g = g.add(op.aij(i, j).multiply(it->second).scaled(-1.0));
        }
      double m_nu = g.multiply(cell.psi).integral().real();
      double mu_defect = 0.0;
      Field phi = cell_solve_rhs(sm.matrix, sm.basis, op.grid_m, cell.psi_coeffs, g.scaled(-1.0),
                                 m_nu, &mu_defect);
      if (mu_defect > 1e-6)
        throw RecursionResidual("two-scale compatibility defect at order " + std::to_string(s));
      ts.m[nu] = m_nu;
      ts.phi[nu] = phi;
    }
  }
  return ts;
}

PolyGrowthSolution higher_order_solution(const PeriodicOperator& op, const CellSolution& cell,
                                         const TwoScale& ts, const GradedPolynomial& u0,
                                         int s_max) {
  const int n = op.n;
  DiffOp qd(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      MultiIndex beta(n, 0);
      beta[i] += 1;
      beta[j] += 1;
      double coeff = (i == j) ? -cell.q_hom(i, i) : -2.0 * cell.q_hom(i, j);
      qd.add_term(beta, coeff);
    }
  GradedPolynomial qres = qd.apply(u0);
  if (qres.coeff_norm() > 1e-8 * std::max(1.0, u0.coeff_norm() * cell.q_hom.norm()))
    throw NotQHarmonic("U0 is not annihilated by the homogenized operator");

  // Higher-order constant operators M_s, s >= 3.
  std::vector<DiffOp> m_ops;
  for (int s = 3; s <= s_max; ++s) {
    DiffOp ms(n);
    for (const auto& [nu, val] : ts.m)
      if (mi_sum(nu) == s && std::abs(val) > 1e-12) ms.add_term(nu, val);
    m_ops.push_back(ms);
  }

  RightInverse r(qd);
  GradedPolynomial v = u0, w = u0;
  for (int guard = 0; guard < 16 && !w.empty(); ++guard) {
    GradedPolynomial acc(n);
    for (const DiffOp& ms : m_ops)
      if (!ms.empty()) acc = acc.plus(ms.apply(w));
    if (acc.empty()) break;
    w = r.apply(acc).scaled(-1.0);
    v = v.plus(w);
  }

  PolyGrowthSolution u;
  u.n = n;
  u.order = u0.degree();
  for (const auto& [nu, phi] : ts.phi) {
    DiffOp dnu(n);
    dnu.add_term(nu, 1.0);
    GradedPolynomial dv = dnu.apply(v);
    for (const auto& [beta, coeff] : dv.terms()) accumulate(u.terms, beta, phi.scaled(coeff));
  }
  double res = solution_residual(op, u);
  if (res > 1e-6)
    throw TruncationInsufficient("residual " + std::to_string(res) + " at s_max " +
                                 std::to_string(s_max));
  return u;
}

PeriodicOperator conjugated_operator(const PeriodicOperator& op, const Vec& xi, const Field& p) {
  PeriodicOperator out;
  out.kind = OperatorKind::GeneralSecondOrder;
  out.n = op.n;
  out.grid_m = op.grid_m;
  out.a = op.a;
  out.b = shifted_drift(op, xi, p);
  out.c = Field::constant(op.n, op.grid_m, 0.0);
  out.a_min = op.a_min;
  return out;
}

HomogHessianLink hessian_homogenization(const PeriodicOperator& op, LambdaFunction& lf,
                                        const XiLevelSet& level, int mf) {
  HomogHessianLink link;
  link.xi = level.classification == XiClass::ConvexSurface && !level.samples.empty()
                ? level.samples.front()
                : level.xi_star;
  const LambdaPoint& pt = lf.point(link.xi);
  PeriodicOperator tilde = conjugated_operator(op, link.xi, pt.p);
  CellSolution cell = solve_cell(tilde, mf);
  link.q_hom = cell.q_hom;
  link.hess = lf.hessian(link.xi, 1e-3);
  double qq = link.q_hom.squaredNorm();
  link.constant = qq > 0 ? -(link.hess.cwiseProduct(link.q_hom)).sum() / qq : 0.0;
  link.rel_err = (link.hess + link.constant * link.q_hom).norm() /
                 std::max(1e-300, (link.constant * link.q_hom).norm());
  return link;
}

}  // namespace floq
