#include "floq/poly.hpp"

#include <Eigen/SVD>

#include <optional>

namespace floq {

GradedPolynomial GradedPolynomial::monomial(int n, const MultiIndex& alpha, Complex coeff) {
  GradedPolynomial p(n);
  p.set(alpha, coeff);
  return p;
}

int GradedPolynomial::degree() const {
  int d = -1;
  for (const auto& [a, c] : coeffs_) d = std::max(d, mi_sum(a));
  return d;
}

Complex GradedPolynomial::coeff(const MultiIndex& alpha) const {
  auto it = coeffs_.find(alpha);
  return it == coeffs_.end() ? Complex(0.0) : it->second;
}

void GradedPolynomial::set(const MultiIndex& alpha, Complex value) {
  if (std::abs(value) == 0.0)
    coeffs_.erase(alpha);
  else
    coeffs_[alpha] = value;
}

bool GradedPolynomial::is_homogeneous() const {
  int d = -1;
  for (const auto& [a, c] : coeffs_) {
    if (d < 0) d = mi_sum(a);
    if (mi_sum(a) != d) return false;
  }
  return true;
}

GradedPolynomial GradedPolynomial::homogeneous_component(int l) const {
  GradedPolynomial out(n_);
  for (const auto& [a, c] : coeffs_)
    if (mi_sum(a) == l) out.set(a, c);
  return out;
}

GradedPolynomial GradedPolynomial::plus(const GradedPolynomial& other) const {
  GradedPolynomial out = *this;
  for (const auto& [a, c] : other.coeffs_) out.set(a, out.coeff(a) + c);
  return out;
}

GradedPolynomial GradedPolynomial::scaled(Complex factor) const {
  GradedPolynomial out(n_);
  if (std::abs(factor) == 0.0) return out;
  for (const auto& [a, c] : coeffs_) out.set(a, c * factor);
  return out;
}

GradedPolynomial GradedPolynomial::times(const GradedPolynomial& other) const {
  GradedPolynomial out(n_);
  for (const auto& [a, ca] : coeffs_)
    for (const auto& [b, cb] : other.coeffs_) {
      MultiIndex s(n_);
      for (int d = 0; d < n_; ++d) s[d] = a[d] + b[d];
      out.set(s, out.coeff(s) + ca * cb);
    }
  return out;
}

Complex GradedPolynomial::eval(const CVec& x) const {
  Complex acc(0.0);
  for (const auto& [a, c] : coeffs_) {
    Complex term = c;
    for (int d = 0; d < n_; ++d)
      for (int p = 0; p < a[d]; ++p) term *= x[d];
    acc += term;
  }
  return acc;
}

double GradedPolynomial::coeff_norm() const {
  double s = 0.0;
  for (const auto& [a, c] : coeffs_) s += std::norm(c);
  return std::sqrt(s);
}

CVec GradedPolynomial::coefficient_vector(const std::vector<MultiIndex>& basis) const {
  CVec v = CVec::Zero(static_cast<int>(basis.size()));
  for (size_t i = 0; i < basis.size(); ++i) v[static_cast<int>(i)] = coeff(basis[i]);
  return v;
}

std::vector<MultiIndex> monomials(int n, int l) {
  std::vector<MultiIndex> out;
  MultiIndex cur(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int rem) {
    if (pos == n - 1) {
      cur[pos] = rem;
      out.push_back(cur);
      return;
    }
    for (int v = rem; v >= 0; --v) {  // lex descending-first gives lex order on exponents
      cur[pos] = v;
      rec(pos + 1, rem - v);
    }
  };
  if (n == 0) {
    if (l == 0) out.push_back({});
    return out;
  }
  rec(0, l);
  return out;
}

long long binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

long long h_dim(int n, int N) { return binomial(n + N, N) - binomial(n + N - 2, N - 2); }
long long q_dim(int n, int N) { return binomial(n + N, N); }

DiffOp DiffOp::from_symbol(const GradedPolynomial& q) {
  DiffOp op(q.dim());
  for (const auto& [beta, c] : q.terms()) {
    Complex phase(1.0);
    const Complex minus_i(0.0, -1.0);
    for (int j = 0; j < mi_sum(beta); ++j) phase *= minus_i;
    op.add_term(beta, c * phase);
  }
  return op;
}

int DiffOp::order() const {
  int d = 0;
  for (const auto& [b, c] : terms_) d = std::max(d, mi_sum(b));
  return d;
}

void DiffOp::add_term(const MultiIndex& beta, Complex coeff) {
  if (std::abs(coeff) == 0.0) return;
  auto it = terms_.find(beta);
  if (it == terms_.end())
    terms_[beta] = coeff;
  else {
    it->second += coeff;
    if (std::abs(it->second) == 0.0) terms_.erase(it);
  }
}

GradedPolynomial DiffOp::apply(const GradedPolynomial& p) const {
  GradedPolynomial out(p.dim());
  for (const auto& [alpha, ca] : p.terms())
    for (const auto& [beta, cb] : terms_) {
      double fall = 1.0;
      bool ok = true;
      MultiIndex g(p.dim());
      for (int d = 0; d < p.dim(); ++d) {
        if (alpha[d] < beta[d]) {
          ok = false;
          break;
        }
        g[d] = alpha[d] - beta[d];
        for (int j = 0; j < beta[d]; ++j) fall *= alpha[d] - j;
      }
      if (ok) out.set(g, out.coeff(g) + ca * cb * fall);
    }
  // canonical form: drop numerically-zero leftovers
  GradedPolynomial clean(p.dim());
  for (const auto& [a, c] : out.terms())
    if (std::abs(c) > 0.0) clean.set(a, c);
  return clean;
}

HomogeneousOperatorMatrix qd_matrix(const GradedPolynomial& q, int l) {
  if (q.empty()) throw ZeroPolynomial("qd_matrix: zero symbol");
  if (!q.is_homogeneous()) throw NotHomogeneous("qd_matrix: symbol must be homogeneous");
  const int s = q.degree();
  const int n = q.dim();
  DiffOp op = DiffOp::from_symbol(q);
  HomogeneousOperatorMatrix out;
  out.source_degree = l + s;
  out.target_degree = l;
  out.source_basis = monomials(n, l + s);
  out.target_basis = monomials(n, l);
  out.matrix = CMat::Zero(static_cast<int>(out.target_basis.size()),
                          static_cast<int>(out.source_basis.size()));
  for (size_t col = 0; col < out.source_basis.size(); ++col) {
    GradedPolynomial img = op.apply(GradedPolynomial::monomial(n, out.source_basis[col]));
    out.matrix.col(static_cast<int>(col)) = img.coefficient_vector(out.target_basis);
  }
  return out;
}

namespace {

int numeric_rank(const CMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::BDCSVD<CMat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-9 * sv[0]) ++r;
  return r;
}

}  // namespace

long long qharmonic_dim(const GradedPolynomial& q, int N) {
  if (q.empty()) throw ZeroPolynomial("qharmonic_dim: zero symbol");
  if (!q.is_homogeneous()) throw NotHomogeneous("qharmonic_dim: symbol must be homogeneous");
  const int s = q.degree();
  const int n = q.dim();
  long long total = 0;
  for (int l = 0; l <= N; ++l) {
    long long dim_l = static_cast<long long>(monomials(n, l).size());
    if (l < s) {
      total += dim_l;  // the map P_l -> P_{l-s} is zero
      continue;
    }
    HomogeneousOperatorMatrix m = qd_matrix(q, l - s);
    total += dim_l - numeric_rank(m.matrix);
  }
  return total;
}

std::vector<GradedPolynomial> qharmonic_kernel(const GradedPolynomial& q, int N) {
  const int s = q.degree();
  const int n = q.dim();
  std::vector<GradedPolynomial> basis;
  for (int l = 0; l <= N; ++l) {
    std::vector<MultiIndex> mono = monomials(n, l);
    if (l < s) {
      for (const auto& a : mono) basis.push_back(GradedPolynomial::monomial(n, a));
      continue;
    }
    HomogeneousOperatorMatrix m = qd_matrix(q, l - s);
    Eigen::BDCSVD<CMat> svd(m.matrix, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = sv.size() ? 1e-9 * sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > cutoff) ++rank;
    const CMat& v = svd.matrixV();
    for (int col = rank; col < v.cols(); ++col) {
      GradedPolynomial p(n);
      for (size_t i = 0; i < mono.size(); ++i) {
        Complex c = v(static_cast<int>(i), col);
        if (std::abs(c) > 1e-12) p.set(mono[i], c);
      }
      basis.push_back(p);
    }
  }
  return basis;
}

RightInverse::RightInverse(DiffOp op) : op_(std::move(op)), order_(op_.order()) {
  if (op_.empty()) throw ZeroPolynomial("RightInverse: zero operator");
}

GradedPolynomial RightInverse::apply(const GradedPolynomial& p) const {
  const int n = op_.dim();
  GradedPolynomial out(n);
  int dmax = p.degree();
  for (int l = 0; l <= dmax; ++l) {
    GradedPolynomial comp = p.homogeneous_component(l);
    if (comp.empty()) continue;
    auto it = pinv_cache_.find(l);
    if (it == pinv_cache_.end()) {
      std::vector<MultiIndex> src = monomials(n, l + order_);
      std::vector<MultiIndex> tgt = monomials(n, l);
      CMat m = CMat::Zero(static_cast<int>(tgt.size()), static_cast<int>(src.size()));
      for (size_t col = 0; col < src.size(); ++col) {
        GradedPolynomial img = op_.apply(GradedPolynomial::monomial(n, src[col]));
        m.col(static_cast<int>(col)) = img.coefficient_vector(tgt);
      }
      Eigen::BDCSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-12);
      CMat pinv = CMat::Zero(m.cols(), m.rows());
      const auto& sv = svd.singularValues();
      double cut = sv.size() ? 1e-12 * sv[0] : 0.0;
      for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cut)
          pinv += (1.0 / sv[i]) * svd.matrixV().col(i) * svd.matrixU().col(i).adjoint();
      it = pinv_cache_.emplace(l, std::move(pinv)).first;
    }
    std::vector<MultiIndex> src = monomials(n, l + order_);
    std::vector<MultiIndex> tgt = monomials(n, l);
    CVec rhs = comp.coefficient_vector(tgt);
    CVec x = it->second * rhs;
    for (size_t i = 0; i < src.size(); ++i)
      if (std::abs(x[static_cast<int>(i)]) > 1e-14 * (1.0 + rhs.norm()))
        out.set(src[i], out.coeff(src[i]) + x[static_cast<int>(i)]);
  }
  return out;
}

IsomorphismWitness isomorphism_witness(const std::vector<GradedPolynomial>& lambda_terms,
                                       int leading_order, int N,
                                       const std::vector<GradedPolynomial>& seeds) {
  const int l0 = leading_order;
  if (l0 >= static_cast<int>(lambda_terms.size()) || lambda_terms[l0].empty())
    throw ZeroPolynomial("isomorphism_witness: missing leading Taylor term");
  const GradedPolynomial& lam0 = lambda_terms[l0];
  const int n = lam0.dim();
  DiffOp lam0_op = DiffOp::from_symbol(lam0);
  RightInverse rinv(lam0);

  auto lam_op = [&](int l) -> std::optional<DiffOp> {
    if (l >= static_cast<int>(lambda_terms.size()) || lambda_terms[l].empty()) return std::nullopt;
    return DiffOp::from_symbol(lambda_terms[l]);
  };

  IsomorphismWitness out;
  out.psi_hat.assign(N + 1, GradedPolynomial(n));
  out.phi.assign(N + 1, GradedPolynomial(n));

  for (int j = 0; j <= N; ++j) {
    if (j < static_cast<int>(seeds.size()) && !seeds[j].empty()) {
      const GradedPolynomial& s = seeds[j];
      if (!s.is_homogeneous() || (s.degree() >= 0 && s.degree() != j))
        throw SeedNotHarmonic("seed degree mismatch at j=" + std::to_string(j));
      if (lam0_op.apply(s).coeff_norm() > 1e-9 * std::max(1.0, s.coeff_norm()))
        throw SeedNotHarmonic("seed is not annihilated by the leading term");
      out.phi[j] = s;
    }
  }

  for (int j = N; j >= 0; --j) {
    GradedPolynomial rhs(n);  // sum_{i>j} lambda_{i-j+l0}(D) psi_hat[i]
    for (int i = j + 1; i <= N; ++i) {
      auto op = lam_op(i - j + l0);
      if (op) rhs = rhs.plus(op->apply(out.psi_hat[i]));
    }
    out.psi_hat[j] = out.phi[j].plus(rinv.apply(rhs).scaled(-1.0));
  }

  // Residual of the defining triangular system.
  double res = 0.0;
  for (int i = 0; i + l0 <= N; ++i) {
    GradedPolynomial acc(n);
    for (int j = i + l0; j <= N; ++j) {
      auto op = lam_op(j - i);
      if (op) acc = acc.plus(op->apply(out.psi_hat[j]));
    }
    res = std::max(res, acc.coeff_norm());
  }
  double scale = 0.0;
  for (const auto& p : out.psi_hat) scale = std::max(scale, p.coeff_norm());
  out.residual = res;
  if (res > 1e-9 * std::max(1.0, scale))
    throw ResidualTooLarge("back-substitution residual " + std::to_string(res));
  return out;
}

}  // namespace floq
