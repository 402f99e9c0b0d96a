// solver.hpp — convex solver for the PSD-constrained least-squares problem
// over the affine Choi variables, and the sequential auxiliary programs that
// tighten the convex relations.

#pragma once

#include "choitomo/channels.hpp"
#include "choitomo/tomography.hpp"

#include <optional>
#include <string>
#include <vector>

namespace choitomo {

// Scalar-residual least squares V(h) = ‖A h - b‖² with
// A[(α,γ),k] = Tr(R_{α,γ} H_k) and b[(α,γ)] = p̂_γ(α) - Tr(R_{α,γ} H_0).
struct QuadraticObjective {
  RealMatrix design;
  RealVector offset;

  double value(const RealVector& h) const { return (design * h - offset).squaredNorm(); }
  RealVector gradient(const RealVector& h) const {
    return 2.0 * design.transpose() * (design * h - offset);
  }
  RealMatrix hessian() const { return 2.0 * design.transpose() * design; }
  Eigen::Index var_count() const { return design.cols(); }
};

QuadraticObjective build_objective(const AffineChoiModel& model,
                                   const std::vector<TomographyConfiguration>& configs,
                                   const std::vector<std::vector<double>>& freqs);

struct SolverOptions {
  double mu_initial = 1.0;
  double mu_reduction = 10.0;
  double mu_min = 1e-9;
  double newton_tol = 1e-10;  // on the Newton decrement √(∇FᵀH⁻¹∇F)
  int max_newton_steps = 200;  // per μ stage
  double line_search_slope = 0.01;
  double line_search_shrink = 0.5;
  double aux_relaxation = 1e-6;  // ε_aux, multiplicative slack on the V budget
};

struct BarrierStageLog {
  double mu = 0;
  int newton_steps = 0;
  double objective = 0;  // V at the end of the stage
  double min_eig = 0;
};

struct SolveOutcome {
  RealVector h_star;
  double objective_value = 0.0;  // V(h*), also when the stage objective was linear
  double min_choi_eig = 0.0;
  std::vector<int> iterations;  // Newton steps per μ stage
  bool converged = false;
  std::vector<BarrierStageLog> stages;
  std::string message;
};

// Path-following engine shared by the main and auxiliary problems: minimizes
// the quadratic V (or linear_term·h when given) plus
// μ·(-log det X(h) - Σ log(-q_k(h)) - log(budget - V(h))), Newton with
// backtracking per μ, μ annealed by the schedule in the options.
SolveOutcome barrier_solve(const QuadraticObjective& objective, const ComplexMatrix& lmi_h0,
                           const std::vector<ComplexMatrix>& lmi_basis,
                           const std::vector<ConvexRelation>& relations,
                           const std::optional<RealVector>& linear_term,
                           const std::optional<double>& budget, const RealVector& start,
                           const SolverOptions& opts);

// Main problem: arg min V(h) subject to X(h) ⪰ 0 and the convex relations.
SolveOutcome solve_main(const AffineChoiModel& model, const QuadraticObjective& objective,
                        const SolverOptions& opts);

// One auxiliary pass per relation in model order: minimize the relation's
// tightening direction subject to the original constraints plus
// V(h) ≤ v*_prev·(1+ε_aux). Returns the main outcome unchanged when the model
// has no relations.
SolveOutcome solve_auxiliary_sequence(const AffineChoiModel& model,
                                      const QuadraticObjective& objective,
                                      const SolveOutcome& main, const SolverOptions& opts);

// Linear functional the auxiliary stage minimizes for a relation
// q(h) = h'Qh + c'h + r ≤ 0: the negated part of c outside the quadratic
// support (for h₃²-1+h₁ ≤ 0 this is -h₁, pushing the relation to equality).
// Zero when the relation has no linear side to tighten.
RealVector aux_objective_direction(const ConvexRelation& rel);

}  // namespace choitomo
