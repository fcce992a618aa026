#include "floq/operator.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace floq {

int default_mf(int n) { return n <= 2 ? 16 : 8; }
int default_grid(int n) { return n <= 2 ? 32 : 16; }

int PeriodicOperator::coefficient_bandwidth() const {
  int bw = 0;
  for (const auto& f : a) bw = std::max(bw, f.bandwidth());
  for (const auto& f : b) bw = std::max(bw, f.bandwidth());
  bw = std::max(bw, c.bandwidth());
  return bw;
}

bool PeriodicOperator::real_coefficients(double tol) const {
  for (const auto& f : a)
    if (!f.is_real(tol)) return false;
  for (const auto& f : b)
    if (!f.is_real(tol)) return false;
  return c.is_real(tol);
}

PeriodicOperator PeriodicOperator::shifted(double c0) const {
  PeriodicOperator out = *this;
  out.c = c.add(Field::constant(n, grid_m, Complex(c0)));
  return out;
}

Field PeriodicOperator::apply(const Field& u) const {
  Field out = Field::constant(n, grid_m, 0.0);
  std::vector<Field> du;
  du.reserve(n);
  for (int i = 0; i < n; ++i) du.push_back(u.derivative(i));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      out = out.add(aij(i, j).multiply(du[j].derivative(i)).scaled(-1.0));
    out = out.add(b[i].multiply(du[i]));
  }
  return out.add(c.multiply(u));
}

namespace {

void check_grid(const Field& f, int n, int m) {
  if (f.dim() != n || f.grid() != m) throw ResolutionMismatch("coefficient grid mismatch");
}

double ellipticity_constant(const std::vector<Field>& a, int n) {
  double amin = std::numeric_limits<double>::infinity();
  int npts = a[0].npoints();
  Eigen::MatrixXd ax(n, n);
  for (int g = 0; g < npts; ++g) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ax(i, j) = a[static_cast<size_t>(i) * n + j].at(g).real();
    if (n == 1) {
      amin = std::min(amin, ax(0, 0));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ax);
      amin = std::min(amin, es.eigenvalues().minCoeff());
    }
  }
  return amin;
}

}  // namespace

PeriodicOperator build_operator(const OperatorSpec& spec) {
  const int n = spec.n;
  const int m = spec.grid_m;
  PeriodicOperator op;
  op.kind = spec.kind;
  op.n = n;
  op.grid_m = m;

  Field zero = Field::constant(n, m, 0.0);
  Field one = Field::constant(n, m, 1.0);

  switch (spec.kind) {
    case OperatorKind::Schrodinger: {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) op.a.push_back(i == j ? one : zero);
      for (int i = 0; i < n; ++i) op.b.push_back(zero);
      op.c = spec.v ? *spec.v : zero;
      check_grid(op.c, n, m);
      break;
    }
    case OperatorKind::MagneticSchrodinger: {
      if (static_cast<int>(spec.a_mag.size()) != n)
        throw ResolutionMismatch("magnetic potential needs n components");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) op.a.push_back(i == j ? one : zero);
      // (i grad + A)^2 + V = -Lap + 2i A.grad + i div A + |A|^2 + V
      Field csum = spec.v ? *spec.v : zero;
      for (int i = 0; i < n; ++i) {
        check_grid(spec.a_mag[i], n, m);
        op.b.push_back(spec.a_mag[i].scaled(Complex(0.0, 2.0)));
        csum = csum.add(spec.a_mag[i].derivative(i).scaled(Complex(0.0, 1.0)));
        csum = csum.add(spec.a_mag[i].multiply(spec.a_mag[i]));
      }
      op.c = csum;
      op.a_mag = spec.a_mag;
      break;
    }
    case OperatorKind::GeneralSecondOrder:
    case OperatorKind::DivergenceForm: {
      if (static_cast<int>(spec.a.size()) != n * n)
        throw ResolutionMismatch("a must have n*n entries");
      for (const auto& f : spec.a) check_grid(f, n, m);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const Field& fij = spec.a[static_cast<size_t>(i) * n + j];
          const Field& fji = spec.a[static_cast<size_t>(j) * n + i];
          for (int g = 0; g < fij.npoints(); ++g)
            if (std::abs(fij.at(g) - fji.at(g)) > 1e-12)
              throw AsymmetricA("a_ij != a_ji on the grid");
        }
      op.a = spec.a;
      if (spec.kind == OperatorKind::DivergenceForm) {
        // -div(a grad u) = -sum a_ij didj u + sum bt_i di u, bt_i = -sum_j dj a_ij
        for (int i = 0; i < n; ++i) {
          Field bt = zero;
          for (int j = 0; j < n; ++j) bt = bt.add(op.aij(i, j).derivative(j).scaled(-1.0));
          op.b.push_back(bt);
        }
        if (!spec.b.empty()) throw ResolutionMismatch("divergence form does not take b");
      } else {
        if (spec.b.empty())
          for (int i = 0; i < n; ++i) op.b.push_back(zero);
        else {
          if (static_cast<int>(spec.b.size()) != n) throw ResolutionMismatch("b needs n components");
          for (const auto& f : spec.b) check_grid(f, n, m);
          op.b = spec.b;
        }
      }
      op.c = spec.c ? *spec.c : zero;
      check_grid(op.c, n, m);
      break;
    }
  }

  op.a_min = ellipticity_constant(op.a, n);
  if (op.a_min <= 0.0) throw NotElliptic("min eigenvalue of a(x) <= 0 on the grid");
  return op;
}

ShiftedOperatorMatrix assemble_shifted(const PeriodicOperator& op, const CVec& k, int mf,
                                       bool adjoint) {
  if (!k.allFinite()) throw NonFiniteInput("quasimomentum must be finite");
  if (adjoint) {
    ShiftedOperatorMatrix m = assemble_shifted(op, k.conjugate(), mf, false);
    m.matrix = m.matrix.adjoint().eval();
    m.adjoint = true;
    m.k = k;
    return m;
  }

  FourierBasis basis(op.n, mf);
  const int size = basis.size();
  ShiftedOperatorMatrix out;
  out.k = k;
  out.mf = mf;
  out.basis = basis;
  out.aliasing_risk = mf < 2 * op.coefficient_bandwidth();
  out.matrix = CMat::Zero(size, size);

  // Derivative factors d_j(m) = i (2 pi m_j + k_j) for the column mode.
  std::vector<CVec> dcol(size);
  for (int col = 0; col < size; ++col) {
    MultiIndex m = basis.index(col);
    CVec d(op.n);
    for (int j = 0; j < op.n; ++j) d[j] = Complex(0.0, 1.0) * (kTwoPi * m[j] + k[j]);
    dcol[col] = d;
  }

  MultiIndex delta(op.n);
  for (int row = 0; row < size; ++row) {
    MultiIndex mr = basis.index(row);
    for (int col = 0; col < size; ++col) {
      MultiIndex mc = basis.index(col);
      for (int d = 0; d < op.n; ++d) delta[d] = mr[d] - mc[d];
      Complex entry = op.c.fourier(delta);
      const CVec& dv = dcol[col];
      for (int i = 0; i < op.n; ++i) {
        entry += op.b[i].fourier(delta) * dv[i];
        for (int j = 0; j < op.n; ++j) entry -= op.aij(i, j).fourier(delta) * dv[i] * dv[j];
      }
      out.matrix(row, col) = entry;
    }
  }
  return out;
}

Field synthesize_field(const FourierBasis& basis, const CVec& coeffs, int grid_m) {
  Field f(basis.dim(), grid_m);
  for (int g = 0; g < f.npoints(); ++g) {
    Vec x = f.point(g);
    Complex acc(0.0);
    for (int flat = 0; flat < basis.size(); ++flat) {
      MultiIndex m = basis.index(flat);
      double phase = 0.0;
      for (int d = 0; d < basis.dim(); ++d) phase += kTwoPi * m[d] * x[d];
      acc += coeffs[flat] * Complex(std::cos(phase), std::sin(phase));
    }
    f.at(g) = acc;
  }
  f.refresh();
  return f;
}

namespace {

PeriodicOperator make_laplacian(int n, int m) {
  OperatorSpec s;
  s.kind = OperatorKind::Schrodinger;
  s.n = n;
  s.grid_m = m;
  s.v = Field::constant(n, m, 0.0);
  return build_operator(s);
}

}  // namespace

PeriodicOperator preset_operator(const std::string& name, int grid_m) {
  auto gm = [&](int n) { return grid_m > 0 ? grid_m : default_grid(n); };
  if (name == "laplacian1d") return make_laplacian(1, gm(1));
  if (name == "laplacian2d") return make_laplacian(2, gm(2));
  if (name == "mathieu") {
    OperatorSpec s;
    s.kind = OperatorKind::Schrodinger;
    s.n = 1;
    s.grid_m = gm(1);
    s.v = make_field(1, s.grid_m, [](const Vec& x) { return std::cos(kTwoPi * x[0]); });
    return build_operator(s);
  }
  if (name == "sin_divform") {
    OperatorSpec s;
    s.kind = OperatorKind::DivergenceForm;
    s.n = 1;
    s.grid_m = gm(1);
    s.a = {make_field(1, s.grid_m, [](const Vec& x) { return 2.0 + std::sin(kTwoPi * x[0]); })};
    return build_operator(s);
  }
  if (name == "drift1d") {
    OperatorSpec s;
    s.kind = OperatorKind::GeneralSecondOrder;
    s.n = 1;
    s.grid_m = gm(1);
    s.a = {Field::constant(1, s.grid_m, 1.0)};
    s.b = {Field::constant(1, s.grid_m, 2.0)};
    s.c = Field::constant(1, s.grid_m, 0.0);
    return build_operator(s);
  }
  if (name == "shifted1d") {
    OperatorSpec s;
    s.kind = OperatorKind::Schrodinger;
    s.n = 1;
    s.grid_m = gm(1);
    s.v = Field::constant(1, s.grid_m, 1.0);
    return build_operator(s);
  }
  if (name == "checkerboard2d") {
    OperatorSpec s;
    s.kind = OperatorKind::DivergenceForm;
    s.n = 2;
    s.grid_m = gm(2);
    Field diag = make_field(2, s.grid_m, [](const Vec& x) {
      return 2.0 + 0.5 * std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]);
    });
    Field zero = Field::constant(2, s.grid_m, 0.0);
    s.a = {diag, zero, zero, diag};
    return build_operator(s);
  }
  throw OperatorError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"laplacian1d", "laplacian2d", "mathieu",       "sin_divform",
          "drift1d",     "shifted1d",   "checkerboard2d"};
}

}  // namespace floq
