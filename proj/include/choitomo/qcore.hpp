// qcore.hpp — dense complex linear algebra and quantum primitives shared
// by the channel models, the tomography layer and the solver.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace choitomo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Tolerances used across the project: an order of magnitude above
// double-precision eigensolver noise at the largest dimension in scope (9).
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdSlack = 1e-9;
inline constexpr double kTraceTol = 1e-9;

ComplexMatrix identity(Eigen::Index n);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol);

// Kronecker product, (A⊗B)[(i*p+k),(j*q+l)] = A(i,j)*B(k,l) for B of size p×q.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Column-stacking vectorization of a square matrix: component a + d*b = A(a,b).
// The first tensor factor of the d² space indexes columns of A, so that
// (A⊗B)·vec_col(C) = vec_col(B·C·Aᵀ).
ComplexVector vec_col(const ComplexMatrix& a);

enum class TensorFactor { First, Second };

// Partial trace of a d²×d² matrix over one tensor factor, under the vec_col
// index convention (composite index = first*d + second).
ComplexMatrix partial_trace(const ComplexMatrix& x, TensorFactor factor, Eigen::Index d);

struct HermEig {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors; // columns, unitary
};

// Eigendecomposition of a Hermitian matrix. Throws if the input fails the
// Hermiticity tolerance.
HermEig herm_eig(const ComplexMatrix& a);

// Smallest eigenvalue of a Hermitian matrix (input symmetrized first).
double min_eigenvalue_hermitian(const ComplexMatrix& a);

// PSD matrix square root with negative eigenvalues (rounding noise) clamped to 0.
ComplexMatrix sqrt_psd(const ComplexMatrix& a);

// Hilbert–Schmidt norm √Tr(A†A).
double hs_norm(const ComplexMatrix& a);

// A validated d×d density operator: Hermitian, PSD, unit trace.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

  static DensityMatrix pure(const ComplexVector& ket);
  static DensityMatrix from_bloch(double x, double y, double z);

 private:
  ComplexMatrix matrix_;
};

// A d²×d² Choi matrix. Hermiticity is enforced at construction; complete
// positivity and trace preservation are queried, not enforced, because the
// affine channel models legitimately produce non-PSD candidates during
// optimization.
class ChoiMatrix {
 public:
  ChoiMatrix(Eigen::Index system_dim, ComplexMatrix m);

  Eigen::Index system_dim() const { return dim_; }
  const ComplexMatrix& matrix() const { return matrix_; }

  double min_eigenvalue() const;
  bool is_completely_positive(double slack = kPsdSlack) const;
  // Largest entrywise deviation of Tr_(2)(X) from the identity.
  double trace_preserving_defect() const;
  bool is_trace_preserving(double tol = kTraceTol) const;

 private:
  Eigen::Index dim_;
  ComplexMatrix matrix_;
};

// Uhlmann fidelity F(ρ,σ) = Tr √(ρ^{1/2} σ ρ^{1/2}).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace choitomo
