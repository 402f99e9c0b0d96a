#include "choitomo/qcore.hpp"

#include <cmath>

namespace choitomo {

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexVector vec_col(const ComplexMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("vec_col: matrix must be square");
  const Eigen::Index d = a.rows();
  ComplexVector v(d * d);
  for (Eigen::Index col = 0; col < d; ++col)
    for (Eigen::Index row = 0; row < d; ++row) v(row + d * col) = a(row, col);
  return v;
}

ComplexMatrix partial_trace(const ComplexMatrix& x, TensorFactor factor, Eigen::Index d) {
  if (x.rows() != d * d || x.cols() != d * d)
    throw std::invalid_argument("partial_trace: matrix must be d²×d²");
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  if (factor == TensorFactor::Second) {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index s = 0; s < d; ++s) out(i, j) += x(i * d + s, j * d + s);
  } else {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index s = 0; s < d; ++s) out(i, j) += x(s * d + i, s * d + j);
  }
  return out;
}

HermEig herm_eig(const ComplexMatrix& a) {
  if (!is_hermitian(a, kHermitianTol * (1.0 + a.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("herm_eig: input is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("herm_eig: eigensolver failed to converge");
  return HermEig{es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue_hermitian(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

ComplexMatrix sqrt_psd(const ComplexMatrix& a) {
  HermEig eig = herm_eig(a);
  RealVector roots(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    roots(i) = eig.eigenvalues(i) > 0 ? std::sqrt(eig.eigenvalues(i)) : 0.0;
  return eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.adjoint();
}

double hs_norm(const ComplexMatrix& a) { return a.norm(); }

DensityMatrix::DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  if (!matrix_.allFinite())
    throw std::invalid_argument("DensityMatrix: entries must be finite");
  if (!is_hermitian(matrix_))
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  if (std::abs(matrix_.trace().real() - 1.0) > kTraceTol ||
      std::abs(matrix_.trace().imag()) > kTraceTol)
    throw std::invalid_argument("DensityMatrix: trace must be 1");
  if (min_eigenvalue_hermitian(matrix_) < -kPsdSlack)
    throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const ComplexVector& ket) {
  const double n = ket.norm();
  if (n == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  ComplexVector psi = ket / n;
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::from_bloch(double x, double y, double z) {
  if (x * x + y * y + z * z > 1.0 + kTraceTol)
    throw std::invalid_argument("DensityMatrix::from_bloch: Bloch vector longer than 1");
  ComplexMatrix m = 0.5 * (identity(2) + x * pauli_x() + y * pauli_y() + z * pauli_z());
  return DensityMatrix(std::move(m));
}

ChoiMatrix::ChoiMatrix(Eigen::Index system_dim, ComplexMatrix m)
    : dim_(system_dim), matrix_(std::move(m)) {
  if (matrix_.rows() != dim_ * dim_ || matrix_.cols() != dim_ * dim_)
    throw std::invalid_argument("ChoiMatrix: matrix must be d²×d²");
  if (!matrix_.allFinite())
    throw std::invalid_argument("ChoiMatrix: entries must be finite");
  if (!is_hermitian(matrix_, kHermitianTol * (1.0 + matrix_.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("ChoiMatrix: matrix is not Hermitian");
}

double ChoiMatrix::min_eigenvalue() const { return min_eigenvalue_hermitian(matrix_); }

bool ChoiMatrix::is_completely_positive(double slack) const {
  return min_eigenvalue() >= -slack;
}

double ChoiMatrix::trace_preserving_defect() const {
  ComplexMatrix reduced = partial_trace(matrix_, TensorFactor::Second, dim_);
  return (reduced - identity(dim_)).cwiseAbs().maxCoeff();
}

bool ChoiMatrix::is_trace_preserving(double tol) const {
  return trace_preserving_defect() <= tol;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument("fidelity: dimension mismatch");
  ComplexMatrix root = sqrt_psd(rho.matrix());
  ComplexMatrix inner = root * sigma.matrix() * root;
  HermEig eig = herm_eig(inner);
  double f = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
    if (eig.eigenvalues(i) > 0) f += std::sqrt(eig.eigenvalues(i));
  return f;
}

}  // namespace choitomo
