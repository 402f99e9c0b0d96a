#include "choitomo/channels.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace choitomo {

namespace {

constexpr double kModelHermTol = 1e-12;
constexpr double kInteriorMargin = 1e-6;

void validate_model(const AffineChoiModel& model) {
  const Eigen::Index n = model.dim * model.dim;
  if (model.h0.rows() != n || model.h0.cols() != n)
    throw std::invalid_argument(model.id + ": H0 has wrong dimensions");
  if (!is_hermitian(model.h0, kModelHermTol))
    throw std::invalid_argument(model.id + ": H0 is not Hermitian");
  for (const ComplexMatrix& hk : model.basis) {
    if (hk.rows() != n || hk.cols() != n)
      throw std::invalid_argument(model.id + ": basis matrix has wrong dimensions");
    if (!is_hermitian(hk, kModelHermTol))
      throw std::invalid_argument(model.id + ": basis matrix is not Hermitian");
  }
  for (const ConvexRelation& rel : model.convex_relations) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (rel.quad + rel.quad.transpose()));
    if (es.eigenvalues()(0) < -1e-12)
      throw std::invalid_argument(model.id + ": relation quadratic part is not PSD");
  }
  ChoiMatrix at_interior = evaluate_choi(model, model.interior_point);
  if (at_interior.min_eigenvalue() <= kInteriorMargin)
    throw std::invalid_argument(model.id + ": interior point is not strictly CP");
  for (const ConvexRelation& rel : model.convex_relations)
    if (rel.value(model.interior_point) >= -kInteriorMargin)
      throw std::invalid_argument(model.id + ": interior point does not satisfy relations");
}

bool is_prime(int n) {
  if (n < 2) return false;
  for (int k = 2; k * k <= n; ++k)
    if (n % k == 0) return false;
  return true;
}

// Coefficient layout of the qutrit generalized Pauli Choi matrix: positions
// of the f₁..f₄ entries, overall factor 1/3. f₄ appears together with its
// conjugate on the transposed position, keeping the matrix Hermitian.
ComplexMatrix gen_pauli_structure(double f1, double f2, double f3, Complex f4) {
  static const int f1_pos[] = {0, 4, 8};
  static const int f2_pos[] = {1, 2, 3, 5, 6, 7};
  static const std::pair<int, int> f3_pos[] = {{0, 4}, {0, 8}, {4, 8}};
  static const std::pair<int, int> f4_pos[] = {{1, 5}, {2, 7}, {3, 2},
                                               {5, 6}, {6, 1}, {7, 3}};

  ComplexMatrix m = ComplexMatrix::Zero(9, 9);
  for (int i : f1_pos) m(i, i) = f1;
  for (int i : f2_pos) m(i, i) = f2;
  for (auto [i, j] : f3_pos) {
    m(i, j) = f3;
    m(j, i) = f3;
  }
  for (auto [i, j] : f4_pos) {
    m(i, j) = f4;
    m(j, i) = std::conj(f4);
  }
  return m / 3.0;
}

}  // namespace

double ConvexRelation::value(const RealVector& h) const {
  return h.dot(quad * h) + lin.dot(h) + constant;
}

RealVector ConvexRelation::gradient(const RealVector& h) const {
  return (quad + quad.transpose()) * h + lin;
}

ChoiMatrix evaluate_choi(const AffineChoiModel& model, const RealVector& h) {
  if (h.size() != model.var_count())
    throw std::invalid_argument(model.id + ": variable vector has wrong length");
  if (!h.allFinite())
    throw std::invalid_argument(model.id + ": variable vector has non-finite entries");
  ComplexMatrix x = model.h0;
  for (Eigen::Index k = 0; k < model.var_count(); ++k) x += h(k) * model.basis[k];
  return ChoiMatrix(model.dim, std::move(x));
}

AffineChoiModel gad_model() {
  AffineChoiModel m;
  m.id = "gad";
  m.dim = 2;

  m.h0 = ComplexMatrix::Zero(4, 4);
  m.h0(0, 0) = 1;
  m.h0(3, 3) = 1;

  ComplexMatrix h1 = ComplexMatrix::Zero(4, 4);
  h1(0, 0) = -1;
  h1(1, 1) = 1;
  ComplexMatrix h2 = ComplexMatrix::Zero(4, 4);
  h2(0, 0) = 1;
  h2(1, 1) = -1;
  h2(2, 2) = 1;
  h2(3, 3) = -1;
  ComplexMatrix h3 = ComplexMatrix::Zero(4, 4);
  h3(0, 3) = 1;
  h3(3, 0) = 1;
  m.basis = {h1, h2, h3};
  m.variable_names = {"h1", "h2", "h3"};

  ConvexRelation rel;  // h3² - 1 + h1 ≤ 0
  rel.quad = RealMatrix::Zero(3, 3);
  rel.quad(2, 2) = 1;
  rel.lin = RealVector::Zero(3);
  rel.lin(0) = 1;
  rel.constant = -1;
  m.convex_relations = {rel};

  m.independent_set = {0, 1};
  m.param_names = {"gamma", "p"};
  m.h_of_theta = [](const RealVector& theta) {
    const double gamma = theta(0), p = theta(1);
    RealVector h(3);
    h << gamma, p * gamma, std::sqrt(std::max(0.0, 1.0 - gamma));
    return h;
  };
  m.extract_closed_form = [](const RealVector& h) {
    ExtractionOutcome out;
    out.theta = RealVector(2);
    out.theta(0) = h(0);
    if (std::abs(h(0)) <= 1e-6) {
      // γ ≈ 0: p drops out of the Choi matrix and cannot be estimated
      out.theta(1) = 0.0;
      out.unidentifiable = {"p"};
    } else {
      out.theta(1) = h(1) / h(0);
    }
    return out;
  };
  m.interior_point = RealVector(3);
  m.interior_point << 0.5, 0.25, 0.6;
  m.param_box = {{0.0, 1.0}, {0.0, 1.0}};
  m.cp_feasible = [](const RealVector& theta) {
    return theta(0) >= 0.0 && theta(0) <= 1.0 && theta(1) >= 0.0 && theta(1) <= 1.0;
  };
  m.independent_measurements = false;

  validate_model(m);
  return m;
}

AffineChoiModel pauli_t_model() {
  AffineChoiModel m;
  m.id = "pauli_t";
  m.dim = 2;

  m.h0 = 0.5 * identity(4);

  ComplexMatrix h1 = ComplexMatrix::Zero(4, 4);
  h1(0, 3) = h1(3, 0) = h1(1, 2) = h1(2, 1) = 0.5;
  ComplexMatrix h2 = ComplexMatrix::Zero(4, 4);
  h2(0, 3) = h2(3, 0) = 0.5;
  h2(1, 2) = h2(2, 1) = -0.5;
  ComplexMatrix h3 = ComplexMatrix::Zero(4, 4);
  h3(0, 0) = h3(3, 3) = 0.5;
  h3(1, 1) = h3(2, 2) = -0.5;
  m.basis = {h1, h2, h3};
  m.variable_names = {"h1", "h2", "h3"};

  m.independent_set = {0, 1, 2};
  m.param_names = {"alpha", "beta", "gamma"};
  m.h_of_theta = [](const RealVector& theta) { return theta; };
  m.extract_closed_form = [](const RealVector& h) {
    ExtractionOutcome out;
    out.theta = h;
    return out;
  };
  m.interior_point = RealVector::Zero(3);
  m.param_box = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  m.cp_feasible = [](const RealVector& theta) {
    return pauli_t_cp_condition(theta(0), theta(1), theta(2));
  };
  m.independent_measurements = true;

  validate_model(m);
  return m;
}

AffineChoiModel gen_pauli_model() {
  AffineChoiModel m;
  m.id = "gen_pauli_3";
  m.dim = 3;

  const double s3 = std::sqrt(3.0);
  m.h0 = gen_pauli_structure(1, 1, 0, 0);
  m.basis = {
      gen_pauli_structure(0, 0, 1, Complex(1, 0)),
      gen_pauli_structure(2, -1, 0, 0),
      gen_pauli_structure(0, 0, 1, Complex(-0.5, -0.5 * s3)),
      gen_pauli_structure(0, 0, 1, Complex(-0.5, 0.5 * s3)),
  };
  m.variable_names = {"lambda1", "lambda2", "lambda3", "lambda4"};

  m.independent_set = {0, 1, 2, 3};
  m.param_names = {"lambda1", "lambda2", "lambda3", "lambda4"};
  m.h_of_theta = [](const RealVector& theta) { return theta; };
  m.extract_closed_form = [](const RealVector& h) {
    ExtractionOutcome out;
    out.theta = h;
    return out;
  };
  m.interior_point = RealVector::Zero(4);
  // axis-aligned bounding box of the CP polytope for d = 3
  m.param_box = {{-0.5, 1.0}, {-0.5, 1.0}, {-0.5, 1.0}, {-0.5, 1.0}};
  m.cp_feasible = [](const RealVector& theta) { return gen_pauli_cp_condition(theta, 3); };
  m.independent_measurements = true;

  validate_model(m);
  return m;
}

bool gen_pauli_cp_condition(const RealVector& lambda, int d) {
  const double tol = 1e-12;
  const double sum = lambda.sum();
  if (sum < -1.0 / (d - 1) - tol) return false;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (1.0 + d * lambda(i) < sum - tol) return false;
  return true;
}

bool pauli_t_cp_condition(double alpha, double beta, double gamma) {
  const double tol = 1e-12;
  return (1.0 + gamma >= std::abs(alpha + beta) - tol) &&
         (1.0 - gamma >= std::abs(alpha - beta) - tol);
}

std::vector<Basis> mub_bases(int d) {
  if (!is_prime(d)) throw std::invalid_argument("mub_bases: dimension must be prime");

  const double two_pi = 2.0 * std::numbers::pi;
  const Complex omega = std::polar(1.0, two_pi / d);

  ComplexMatrix shift = ComplexMatrix::Zero(d, d);  // X|j⟩ = |j+1 mod d⟩
  for (int j = 0; j < d; ++j) shift((j + 1) % d, j) = 1;
  ComplexMatrix clock = ComplexMatrix::Zero(d, d);  // Z|j⟩ = ω^j|j⟩
  for (int j = 0; j < d; ++j) clock(j, j) = std::pow(omega, j);

  std::vector<ComplexMatrix> unitaries;
  unitaries.push_back(shift);
  unitaries.push_back(clock);
  ComplexMatrix power = identity(d);
  for (int k = 1; k < d; ++k) {
    power = power * shift;
    unitaries.push_back(clock * power);  // Z·X^k
  }

  std::vector<Basis> bases;
  bases.reserve(unitaries.size());
  for (const ComplexMatrix& u : unitaries) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(u);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("mub_bases: eigensolver failed");

    // Eigenvalues are d-th roots of unity; order kets by the root index so
    // the construction is reproducible.
    std::vector<std::pair<int, Eigen::Index>> order;
    for (Eigen::Index c = 0; c < d; ++c) {
      double arg = std::arg(es.eigenvalues()(c));
      long idx = std::lround(arg * d / two_pi);
      idx = ((idx % d) + d) % d;
      order.emplace_back(static_cast<int>(idx), c);
    }
    std::sort(order.begin(), order.end());

    Basis basis;
    for (auto [root, col] : order) {
      (void)root;
      ComplexVector v = es.eigenvectors().col(col);
      // one Gram–Schmidt pass against the kets already accepted
      for (const ComplexVector& prev : basis) v -= prev.dot(v) * prev;
      v.normalize();
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-8) {
          v *= std::conj(v(i)) / std::abs(v(i));
          break;
        }
      }
      basis.push_back(std::move(v));
    }
    bases.push_back(std::move(basis));
  }
  return bases;
}

DensityMatrix gen_pauli_apply(const DensityMatrix& rho, const RealVector& lambda,
                              const std::vector<Basis>& bases) {
  const Eigen::Index d = rho.dim();
  if (static_cast<Eigen::Index>(bases.size()) < lambda.size())
    throw std::invalid_argument("gen_pauli_apply: not enough bases for the parameters");
  if (!gen_pauli_cp_condition(lambda, static_cast<int>(d)))
    throw std::invalid_argument("gen_pauli_apply: parameters violate the CP condition");

  ComplexMatrix out =
      (1.0 - lambda.sum()) / static_cast<double>(d) * rho.matrix().trace() * identity(d);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    for (const ComplexVector& ket : bases[i]) {
      Complex weight = ket.dot(rho.matrix() * ket);  // ⟨ψ|ρ|ψ⟩
      out += lambda(i) * weight * (ket * ket.adjoint());
    }
  }
  return DensityMatrix(std::move(out));
}

std::vector<ComplexMatrix> gad_kraus_operators(double gamma, double p) {
  const double sp = std::sqrt(p), sq = std::sqrt(1.0 - p);
  const double sg = std::sqrt(gamma), s1g = std::sqrt(1.0 - gamma);
  ComplexMatrix e1(2, 2), e2(2, 2), e3(2, 2), e4(2, 2);
  e1 << sp, 0, 0, sp * s1g;
  e2 << 0, sp * sg, 0, 0;
  e3 << sq * s1g, 0, 0, sq;
  e4 << 0, 0, sq * sg, 0;
  return {e1, e2, e3, e4};
}

ChoiMatrix choi_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("choi_from_kraus: empty Kraus set");
  const Eigen::Index d = kraus.front().rows();
  ComplexMatrix completeness = ComplexMatrix::Zero(d, d);
  ComplexMatrix x = ComplexMatrix::Zero(d * d, d * d);
  for (const ComplexMatrix& e : kraus) {
    if (e.rows() != d || e.cols() != d)
      throw std::invalid_argument("choi_from_kraus: operators must share a square shape");
    completeness += e.adjoint() * e;
    ComplexVector v = vec_col(e);
    x += v * v.adjoint();
  }
  if ((completeness - identity(d)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("choi_from_kraus: Kraus set is not trace preserving");
  return ChoiMatrix(d, std::move(x));
}

DensityMatrix apply_choi(const ChoiMatrix& x, const DensityMatrix& rho) {
  const Eigen::Index d = rho.dim();
  if (x.system_dim() != d) throw std::invalid_argument("apply_choi: dimension mismatch");

  ComplexMatrix sigma = partial_trace(
      kron(rho.matrix().transpose(), identity(d)) * x.matrix(), TensorFactor::First, d);
  sigma = 0.5 * (sigma + sigma.adjoint());

  // Solver outputs are PSD only up to a small slack; clamp rounding-scale
  // negatives and renormalize before validating.
  HermEig eig = herm_eig(sigma);
  if (eig.eigenvalues(0) < -1e-6)
    throw std::invalid_argument("apply_choi: output is not positive semidefinite");
  RealVector clamped = eig.eigenvalues.cwiseMax(0.0);
  const double total = clamped.sum();
  if (total <= 0.0) throw std::invalid_argument("apply_choi: output has zero trace");
  ComplexMatrix rebuilt = eig.eigenvectors *
                          (clamped / total).asDiagonal().toDenseMatrix().cast<Complex>() *
                          eig.eigenvectors.adjoint();
  return DensityMatrix(std::move(rebuilt));
}

const AffineChoiModel& model_registry(const std::string& id) {
  static const std::map<std::string, AffineChoiModel> registry = [] {
    std::map<std::string, AffineChoiModel> r;
    r.emplace("gad", gad_model());
    r.emplace("pauli_t", pauli_t_model());
    r.emplace("gen_pauli_3", gen_pauli_model());
    return r;
  }();
  auto it = registry.find(id);
  if (it == registry.end())
    throw std::invalid_argument("model_registry: unknown model id '" + id + "'");
  return it->second;
}

std::vector<std::string> registered_model_ids() { return {"gad", "pauli_t", "gen_pauli_3"}; }

}  // namespace choitomo
