#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "choitomo/qcore.hpp"

#include <cmath>
#include <random>

using namespace choitomo;

namespace {

ComplexMatrix random_complex(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(dist(gen), dist(gen));
  return m;
}

ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937_64& gen) {
  ComplexMatrix m = random_complex(n, gen);
  return 0.5 * (m + m.adjoint());
}

DensityMatrix random_density(Eigen::Index n, std::mt19937_64& gen) {
  ComplexMatrix g = random_complex(n, gen);
  ComplexMatrix p = g * g.adjoint();
  return DensityMatrix(p / p.trace());
}

// Choi matrix of the generalized amplitude damping channel, written out
// entry by entry; serves as an independent reference for partial_trace.
ComplexMatrix gad_choi_reference(double gamma, double p) {
  ComplexMatrix x = ComplexMatrix::Zero(4, 4);
  x(0, 0) = 1.0 - gamma + p * gamma;
  x(1, 1) = gamma - p * gamma;
  x(2, 2) = p * gamma;
  x(3, 3) = 1.0 - p * gamma;
  x(0, 3) = x(3, 0) = std::sqrt(1.0 - gamma);
  return x;
}

}  // namespace

TEST_CASE("kron identity and diagonal cases") {
  CHECK((kron(identity(2), identity(2)) - identity(4)).norm() == 0.0);

  ComplexMatrix zz = kron(pauli_z(), pauli_z());
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 1;
  expected(1, 1) = -1;
  expected(2, 2) = -1;
  expected(3, 3) = 1;
  CHECK((zz - expected).norm() == 0.0);
}

TEST_CASE("kron matches the brute-force index formula") {
  std::mt19937_64 gen(11);
  ComplexMatrix a = random_complex(2, gen);
  ComplexMatrix b = random_complex(3, gen);
  ComplexMatrix k = kron(a, b);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      for (Eigen::Index r = 0; r < 3; ++r)
        for (Eigen::Index c = 0; c < 3; ++c)
          CHECK(std::abs(k(i * 3 + r, j * 3 + c) - a(i, j) * b(r, c)) == 0.0);

  // block structure places σ₃ scaled by (σ₁)₀₁ in the upper right block
  CHECK(kron(pauli_x(), pauli_z())(0, 2) == Complex(1, 0));
}

TEST_CASE("vec_col stacks columns") {
  ComplexVector vi = vec_col(identity(2));
  CHECK(vi(0) == Complex(1, 0));
  CHECK(vi(1) == Complex(0, 0));
  CHECK(vi(2) == Complex(0, 0));
  CHECK(vi(3) == Complex(1, 0));

  ComplexMatrix e01 = ComplexMatrix::Zero(2, 2);
  e01(0, 1) = 1;
  ComplexVector v = vec_col(e01);
  CHECK(v(2) == Complex(1, 0));
  CHECK(v(0) == Complex(0, 0));
  CHECK(v(1) == Complex(0, 0));
  CHECK(v(3) == Complex(0, 0));

  CHECK_THROWS_AS(vec_col(ComplexMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("vectorization rule (A⊗B)vec(C) = vec(BCAᵀ)") {
  std::mt19937_64 gen(7);
  for (Eigen::Index d : {2, 3}) {
    for (int trial = 0; trial < 20; ++trial) {
      ComplexMatrix a = random_complex(d, gen);
      ComplexMatrix b = random_complex(d, gen);
      ComplexMatrix c = random_complex(d, gen);
      ComplexVector lhs = kron(a, b) * vec_col(c);
      ComplexVector rhs = vec_col(b * c * a.transpose());
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("partial_trace basics") {
  ComplexVector v = vec_col(identity(2));
  ComplexMatrix x = v * v.adjoint();
  CHECK((partial_trace(x, TensorFactor::Second, 2) - identity(2)).cwiseAbs().maxCoeff() <
        1e-14);

  CHECK((partial_trace(identity(4), TensorFactor::Second, 2) - 2.0 * identity(2))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  ComplexMatrix gad = gad_choi_reference(0.7, 0.3);
  CHECK((partial_trace(gad, TensorFactor::Second, 2) - identity(2)).cwiseAbs().maxCoeff() <
        1e-12);

  CHECK_THROWS_AS(partial_trace(identity(3), TensorFactor::First, 2),
                  std::invalid_argument);
}

TEST_CASE("partial traces preserve the total trace") {
  std::mt19937_64 gen(23);
  for (Eigen::Index d : {2, 3}) {
    ComplexMatrix x = random_complex(d * d, gen);
    Complex t1 = partial_trace(x, TensorFactor::First, d).trace();
    Complex t2 = partial_trace(x, TensorFactor::Second, d).trace();
    CHECK(std::abs(t1 - x.trace()) < 1e-12);
    CHECK(std::abs(t2 - x.trace()) < 1e-12);
  }
}

TEST_CASE("herm_eig on known spectra") {
  HermEig e1 = herm_eig(identity(3));
  for (int i = 0; i < 3; ++i) CHECK(e1.eigenvalues(i) == doctest::Approx(1.0));

  HermEig e2 = herm_eig(pauli_x());
  CHECK(e2.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(e2.eigenvalues(1) == doctest::Approx(1.0));

  ComplexMatrix d312 = ComplexMatrix::Zero(3, 3);
  d312(0, 0) = 3;
  d312(1, 1) = 1;
  d312(2, 2) = 2;
  HermEig e3 = herm_eig(d312);
  CHECK(e3.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(e3.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(e3.eigenvalues(2) == doctest::Approx(3.0));
  // eigenvectors are a permutation of the standard basis
  for (Eigen::Index c = 0; c < 3; ++c) {
    CHECK(e3.eigenvectors.col(c).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  }

  ComplexMatrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(herm_eig(bad), std::invalid_argument);
}

TEST_CASE("herm_eig reconstruction residual on random inputs") {
  std::mt19937_64 gen(5);
  for (Eigen::Index d = 2; d <= 9; ++d) {
    ComplexMatrix a = random_hermitian(d, gen);
    HermEig e = herm_eig(a);
    ComplexMatrix rebuilt =
        e.eigenvectors * e.eigenvalues.asDiagonal().toDenseMatrix().cast<Complex>() *
        e.eigenvectors.adjoint();
    CHECK(hs_norm(rebuilt - a) <= 1e-10 * (1.0 + hs_norm(a)));
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - identity(d)).norm() < 1e-12);
  }
}

TEST_CASE("fidelity closed forms") {
  std::mt19937_64 gen(37);
  for (Eigen::Index d : {2, 3}) {
    DensityMatrix rho = random_density(d, gen);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
  }

  ComplexVector k0 = ComplexVector::Zero(2), k1 = ComplexVector::Zero(2);
  k0(0) = 1;
  k1(1) = 1;
  DensityMatrix p0 = DensityMatrix::pure(k0);
  DensityMatrix p1 = DensityMatrix::pure(k1);
  CHECK(fidelity(p0, p1) == doctest::Approx(0.0).epsilon(1e-9));

  DensityMatrix mixed(0.5 * identity(2));
  CHECK(fidelity(mixed, p0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("fidelity bounds and symmetry on random pairs") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::Index d = (trial % 2 == 0) ? 2 : 3;
    DensityMatrix a = random_density(d, gen);
    DensityMatrix b = random_density(d, gen);
    double fab = fidelity(a, b);
    double fba = fidelity(b, a);
    CHECK(fab >= 0.0);
    CHECK(fab <= 1.0 + 1e-9);
    CHECK(std::abs(fab - fba) < 1e-9);
  }
}

TEST_CASE("hs_norm values") {
  CHECK(hs_norm(ComplexMatrix::Zero(3, 3)) == 0.0);
  CHECK(hs_norm(identity(4)) == doctest::Approx(2.0));
  CHECK(hs_norm(pauli_x()) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix{identity(2)}, std::invalid_argument);  // trace 2
  ComplexMatrix nh(2, 2);
  nh << 0.5, 0.5, -0.5, 0.5;
  CHECK_THROWS_AS(DensityMatrix{nh}, std::invalid_argument);  // not Hermitian
  ComplexMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, std::invalid_argument);  // negative eigenvalue

  DensityMatrix bloch = DensityMatrix::from_bloch(1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0),
                                                  1.0 / std::sqrt(3.0));
  CHECK(std::abs((bloch.matrix() * bloch.matrix()).trace().real() - 1.0) < 1e-12);
}

TEST_CASE("choi matrix checks") {
  ComplexVector v = vec_col(identity(2));
  ChoiMatrix ident(2, v * v.adjoint());
  CHECK(ident.is_completely_positive());
  CHECK(ident.is_trace_preserving());
  CHECK(ident.min_eigenvalue() == doctest::Approx(0.0).epsilon(1e-12));

  ChoiMatrix gad(2, gad_choi_reference(0.7, 0.3));
  CHECK(gad.is_completely_positive());
  CHECK(gad.is_trace_preserving());

  ChoiMatrix scaled(2, 2.0 * (v * v.adjoint()));
  CHECK(!scaled.is_trace_preserving());
}
