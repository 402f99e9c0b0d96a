// channels.hpp — affine Choi parametrizations of channel families, the three
// concrete models shipped with the project, and Kraus/MUB based oracles used
// to cross-check them.

#pragma once

#include "choitomo/qcore.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace choitomo {

// Convex quadratic functional q(h) = hᵀQh + cᵀh + r, imposed as q(h) ≤ 0.
// Q must be PSD so that -log(-q) stays a smooth convex barrier term.
struct ConvexRelation {
  RealMatrix quad;
  RealVector lin;
  double constant = 0.0;

  double value(const RealVector& h) const;
  RealVector gradient(const RealVector& h) const;
};

struct ExtractionOutcome {
  RealVector theta;
  double residual = 0.0;
  std::vector<std::string> unidentifiable;
};

// A channel family whose Choi matrix is affine in the optimization variables:
// X(h) = H0 + Σ_k h_k H_k, with h = h_of_theta(θ) on the model manifold.
struct AffineChoiModel {
  std::string id;
  Eigen::Index dim = 0;  // system dimension d
  ComplexMatrix h0;
  std::vector<ComplexMatrix> basis;
  std::vector<std::string> variable_names;
  std::vector<ConvexRelation> convex_relations;
  std::vector<int> independent_set;  // 0-based variable indices
  std::vector<std::string> param_names;
  std::function<RealVector(const RealVector&)> h_of_theta;
  // Optional closed-form parameter extraction; empty means numeric multistart.
  std::function<ExtractionOutcome(const RealVector&)> extract_closed_form;
  RealVector interior_point;
  std::vector<std::pair<double, double>> param_box;
  std::function<bool(const RealVector&)> cp_feasible;
  // Whether the standard measurement set estimates each parameter
  // independently (diagonal empirical covariance is meaningful).
  bool independent_measurements = false;

  Eigen::Index var_count() const { return static_cast<Eigen::Index>(basis.size()); }
  Eigen::Index param_count() const { return static_cast<Eigen::Index>(param_names.size()); }
};

// X(h) = H0 + Σ h_k H_k. Hermitian by construction; PSD is the caller's concern.
ChoiMatrix evaluate_choi(const AffineChoiModel& model, const RealVector& h);

// Generalized amplitude damping: θ = (γ, p), h = (γ, pγ, √(1-γ)),
// one convex relation h₃² - 1 + h₁ ≤ 0, closed-form extraction γ=h₁, p=h₂/h₁.
AffineChoiModel gad_model();

// Qubit Pauli channel in the T-representation: θ = h = (α, β, γ).
AffineChoiModel pauli_t_model();

// Generalized Pauli channel for a qutrit: θ = h = (λ₁..λ₄).
AffineChoiModel gen_pauli_model();

// CP condition 1 + dλ_i ≥ Σ_j λ_j ≥ -1/(d-1) for all i (tolerance 1e-12).
bool gen_pauli_cp_condition(const RealVector& lambda, int d = 3);

// CP condition of the T-representation: 1±γ ≥ |α±β|.
bool pauli_t_cp_condition(double alpha, double beta, double gamma);

using Basis = std::vector<ComplexVector>;

// d+1 mutually unbiased bases for prime d, as the eigenbases of X, Z, ZX,
// ZX², …, ZX^{d-1}. Within a basis the kets are ordered by the eigenvalue's
// root-of-unity index, and each ket is normalized with its first nonzero
// component real positive, so the construction is deterministic.
std::vector<Basis> mub_bases(int d);

// Direct action of the generalized Pauli channel: mixes the completely
// depolarizing map with the projections onto each MUB subalgebra. Serves as
// the independent oracle against evaluate_choi + apply_choi.
DensityMatrix gen_pauli_apply(const DensityMatrix& rho, const RealVector& lambda,
                              const std::vector<Basis>& bases);

// Standard generalized-amplitude-damping Kraus set; Choi-equivalent to the
// affine model (used as a test oracle).
std::vector<ComplexMatrix> gad_kraus_operators(double gamma, double p);

// X = Σ_k |E_k⟩⟩⟨⟨E_k|. Requires Σ E†E = I within 1e-9.
ChoiMatrix choi_from_kraus(const std::vector<ComplexMatrix>& kraus);

// Channel action recovered from the probability model Tr(R X):
// σ = Tr_(1)((ρᵀ⊗I)·X). Output is cleaned up to a valid density matrix
// (eigenvalue clamping within a 1e-6 slack, then trace renormalization).
DensityMatrix apply_choi(const ChoiMatrix& x, const DensityMatrix& rho);

// Registry keyed by the string ids used in CLI configs.
const AffineChoiModel& model_registry(const std::string& id);
std::vector<std::string> registered_model_ids();

}  // namespace choitomo
