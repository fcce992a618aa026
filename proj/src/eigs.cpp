#include "floq/eigs.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace floq {

Spectrum dense_spectrum(const CMat& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale > 0 && (a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    Eigen::SelfAdjointEigenSolver<CMat> es(a);
    if (es.info() != Eigen::Success) throw EigSolverFailure("hermitian eigensolver failed");
    Spectrum s;
    s.values = es.eigenvalues().cast<Complex>();
    s.vectors = es.eigenvectors();
    return s;
  }
  Eigen::ComplexEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) throw EigSolverFailure("complex eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenPair nearest_eigenpair(const CMat& a, Complex shift, const CVec* guess, int max_iter,
                            double tol) {
  const int size = static_cast<int>(a.rows());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  CVec v;
  if (guess && guess->size() == size)
    v = guess->normalized();
  else
    v = CVec::Ones(size).normalized();

  Complex sigma = shift;
  EigenPair out;
  for (int it = 0; it < max_iter; ++it) {
    CMat shifted = a - sigma * CMat::Identity(size, size);
    Eigen::PartialPivLU<CMat> lu(shifted);
    CVec w = lu.solve(v);
    double wn = w.norm();
    if (!std::isfinite(wn) || wn == 0.0) {  // shift numerically on the spectrum
      sigma += Complex(1e-10 * scale, 1e-10 * scale);
      continue;
    }
    v = w / wn;
    Complex rho = v.dot(a * v);  // Eigen dot conjugates the first argument
    double res = (a * v - rho * v).norm();
    out.value = rho;
    out.vector = v;
    out.residual = res / scale;
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
    if (it >= 2) sigma = rho;  // Rayleigh acceleration once roughly locked
  }
  return out;
}

double smallest_singular_estimate(const CMat& a, int iters) {
  const int size = static_cast<int>(a.rows());
  Eigen::PartialPivLU<CMat> lu(a);
  CVec v = CVec::Ones(size);
  for (int i = 0; i < size; ++i) v[i] += Complex(0.13 * ((i * 2654435761u) % 97) / 97.0, 0.0);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    CVec w = lu.solve(v);
    CVec u = lu.adjoint().solve(w);
    double nn = u.norm();
    if (!std::isfinite(nn) || nn == 0.0) return 0.0;
    est = std::sqrt(1.0 / nn);  // ||(A^H A)^-1|| ~ nn after normalization
    v = u / nn;
  }
  return est;
}

Vec singular_values(const CMat& a) {
  Eigen::BDCSVD<CMat> svd(a);
  Vec sv = svd.singularValues();
  return sv.reverse();
}

DeflatedSolve deflated_solve(const CMat& a, const CVec& left_null, int deflate_index,
                             const CVec& f) {
  const int size = static_cast<int>(a.rows());
  CMat big = CMat::Zero(size + 1, size + 1);
  big.topLeftCorner(size, size) = a;
  big.col(size).head(size) = left_null.normalized();
  big.row(size).setZero();
  big(size, deflate_index) = Complex(1.0);
  CVec rhs = CVec::Zero(size + 1);
  rhs.head(size) = f;
  Eigen::PartialPivLU<CMat> lu(big);
  CVec sol = lu.solve(rhs);
  DeflatedSolve out;
  out.x = sol.head(size);
  out.mu = sol[size];
  return out;
}

}  // namespace floq
