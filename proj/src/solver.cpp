#include "choitomo/solver.hpp"

#include <cmath>
#include <limits>

namespace choitomo {

namespace {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct BarrierTerms {
  const QuadraticObjective* objective;
  const ComplexMatrix* lmi_h0;
  const std::vector<ComplexMatrix>* lmi_basis;
  const std::vector<ConvexRelation>* relations;
  const RealVector* linear_term;  // nullptr: objective is V itself
  const double* budget;           // nullptr: no budget constraint
};

struct BarrierEval {
  bool feasible = false;
  double value = 0.0;
  double quad_value = 0.0;
  double min_eig = 0.0;
  RealVector grad;
  RealMatrix hess;
};

ComplexMatrix assemble_lmi(const BarrierTerms& t, const RealVector& h) {
  ComplexMatrix x = *t.lmi_h0;
  for (Eigen::Index k = 0; k < h.size(); ++k)
    x += h(k) * (*t.lmi_basis)[static_cast<std::size_t>(k)];
  return x;
}

BarrierEval evaluate_barrier(const BarrierTerms& t, const RealVector& h, double mu,
                             bool with_derivatives) {
  BarrierEval out;
  const Eigen::Index m = h.size();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(assemble_lmi(t, h));
  if (es.info() != Eigen::Success) return out;
  out.min_eig = es.eigenvalues()(0);
  if (out.min_eig <= 0.0) return out;

  out.quad_value = t.objective->value(h);

  double phi = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    phi -= std::log(es.eigenvalues()(i));

  std::vector<double> slacks(t.relations->size());
  for (std::size_t k = 0; k < t.relations->size(); ++k) {
    slacks[k] = -(*t.relations)[k].value(h);
    if (slacks[k] <= 0.0) return out;
    phi -= std::log(slacks[k]);
  }

  double budget_slack = 0.0;
  if (t.budget) {
    budget_slack = *t.budget - out.quad_value;
    if (budget_slack <= 0.0) return out;
    phi -= std::log(budget_slack);
  }

  const double f0 = t.linear_term ? t.linear_term->dot(h) : out.quad_value;
  out.feasible = true;
  out.value = f0 + mu * phi;
  if (!with_derivatives) return out;

  // X⁻¹ from the eigendecomposition, then the log-det gradient and Hessian
  // over the basis matrices.
  ComplexMatrix inv =
      es.eigenvectors() *
      es.eigenvalues().cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>() *
      es.eigenvectors().adjoint();
  std::vector<ComplexMatrix> w(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k)
    w[static_cast<std::size_t>(k)] = inv * (*t.lmi_basis)[static_cast<std::size_t>(k)];

  RealVector grad_phi(m);
  RealMatrix hess_phi(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    grad_phi(k) = -w[static_cast<std::size_t>(k)].trace().real();
    for (Eigen::Index l = k; l < m; ++l) {
      double v =
          (w[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(l)]).trace().real();
      hess_phi(k, l) = v;
      hess_phi(l, k) = v;
    }
  }

  for (std::size_t k = 0; k < t.relations->size(); ++k) {
    const ConvexRelation& rel = (*t.relations)[k];
    RealVector g = rel.gradient(h);
    grad_phi += g / slacks[k];
    hess_phi += g * g.transpose() / (slacks[k] * slacks[k]);
    hess_phi += (rel.quad + rel.quad.transpose()) / slacks[k];
  }

  RealVector grad_v = t.objective->gradient(h);
  if (t.budget) {
    grad_phi += grad_v / budget_slack;
    hess_phi += grad_v * grad_v.transpose() / (budget_slack * budget_slack);
    hess_phi += t.objective->hessian() / budget_slack;
  }

  if (t.linear_term) {
    out.grad = *t.linear_term + mu * grad_phi;
    out.hess = mu * hess_phi;
  } else {
    out.grad = grad_v + mu * grad_phi;
    out.hess = t.objective->hessian() + mu * hess_phi;
  }
  return out;
}

// Newton direction solved in long double; regularization grows until the
// solution is a finite descent direction, with steepest descent as the last
// resort.
RealVector newton_direction(const RealMatrix& hess, const RealVector& grad) {
  const Eigen::Index m = grad.size();
  LongMatrix h = hess.cast<long double>();
  LongVector g = grad.cast<long double>();
  long double scale = 1.0L;
  for (Eigen::Index i = 0; i < m; ++i) scale = std::max(scale, std::abs(h(i, i)));

  long double reg = 0.0L;
  for (int attempt = 0; attempt < 10; ++attempt) {
    LongMatrix hreg = h + reg * scale * LongMatrix::Identity(m, m);
    LongVector step = Eigen::FullPivLU<LongMatrix>(hreg).solve(-g);
    bool finite = step.allFinite();
    long double slope = finite ? g.dot(step) : 0.0L;
    if (finite && slope < 0.0L) return step.cast<double>();
    reg = (reg == 0.0L) ? 1e-18L : reg * 1e3L;
  }
  RealVector fallback = -grad / static_cast<double>(scale);
  return fallback;
}

struct StageResult {
  int steps = 0;
  bool converged = false;
  bool stalled = false;
  double final_decrement = 0.0;
};

StageResult newton_stage(const BarrierTerms& terms, RealVector& h, double mu,
                         const SolverOptions& opts) {
  StageResult result;
  BarrierEval current = evaluate_barrier(terms, h, mu, true);
  if (!current.feasible) return result;

  while (result.steps < opts.max_newton_steps) {
    RealVector delta = newton_direction(current.hess, current.grad);
    double slope = current.grad.dot(delta);
    if (!(slope < 0.0)) {
      result.converged = current.grad.norm() <= opts.newton_tol;
      result.final_decrement = current.grad.norm();
      break;
    }
    // Newton decrement λ = √(∇Fᵀ H⁻¹ ∇F)
    const double decrement = std::sqrt(-slope);
    result.final_decrement = decrement;
    if (decrement <= opts.newton_tol) {
      result.converged = true;
      break;
    }
    // the predicted decrease λ²/2 is below what the objective can resolve
    // in double precision: the stage is centered to the floating-point floor
    const double resolution =
        16.0 * std::numeric_limits<double>::epsilon() * (0.5 + std::abs(current.value));
    if (0.5 * decrement * decrement <= resolution) {
      result.converged = true;
      break;
    }

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 120; ++ls) {
      RealVector candidate = h + t * delta;
      BarrierEval trial = evaluate_barrier(terms, candidate, mu, false);
      if (trial.feasible &&
          trial.value <= current.value + opts.line_search_slope * t * slope) {
        h = candidate;
        accepted = true;
        break;
      }
      t *= opts.line_search_shrink;
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }
    ++result.steps;
    current = evaluate_barrier(terms, h, mu, true);
    if (!current.feasible) {
      result.stalled = true;
      break;
    }
  }
  return result;
}

SolveOutcome run_path(const BarrierTerms& terms, const RealVector& start,
                      const SolverOptions& opts) {
  SolveOutcome outcome;
  RealVector h = start;

  BarrierEval initial = evaluate_barrier(terms, h, opts.mu_initial, false);
  if (!initial.feasible) {
    outcome.h_star = h;
    outcome.message = "barrier_solve: start point is not strictly feasible";
    outcome.objective_value = terms.objective->value(h);
    outcome.min_choi_eig = initial.min_eig;
    return outcome;
  }

  bool final_stage_ok = false;
  double mu = opts.mu_initial;
  while (true) {
    StageResult stage = newton_stage(terms, h, mu, opts);
    // a stalled stage close to stationarity is acceptable: the line search
    // hit the floating-point floor of the heavily scaled barrier
    const bool stage_ok =
        stage.converged || (stage.stalled && stage.final_decrement <= 1e-6);

    BarrierEval here = evaluate_barrier(terms, h, mu, false);
    outcome.iterations.push_back(stage.steps);
    outcome.stages.push_back(BarrierStageLog{mu, stage.steps, here.quad_value, here.min_eig});
    if (!stage_ok && outcome.message.empty())
      outcome.message =
          "barrier_solve: an intermediate Newton stage exhausted its step budget";

    if (mu <= opts.mu_min * (1.0 + 1e-12)) {
      // convergence is certified by the centering at μ_min; earlier stages
      // only steer the path
      final_stage_ok = stage_ok;
      break;
    }
    mu = std::max(mu / opts.mu_reduction, opts.mu_min);
  }

  outcome.h_star = h;
  outcome.objective_value = terms.objective->value(h);
  outcome.min_choi_eig = evaluate_barrier(terms, h, opts.mu_min, false).min_eig;
  outcome.converged = final_stage_ok;
  return outcome;
}

}  // namespace

QuadraticObjective build_objective(const AffineChoiModel& model,
                                   const std::vector<TomographyConfiguration>& configs,
                                   const std::vector<std::vector<double>>& freqs) {
  if (freqs.size() != configs.size())
    throw std::invalid_argument(
        "build_objective: one frequency table per configuration required");

  Eigen::Index rows = 0;
  for (std::size_t g = 0; g < configs.size(); ++g) {
    if (freqs[g].size() != configs[g].povm.outcome_count())
      throw std::invalid_argument("build_objective: frequency table misses outcomes");
    rows += static_cast<Eigen::Index>(freqs[g].size());
  }

  const Eigen::Index m = model.var_count();
  QuadraticObjective objective;
  objective.design = RealMatrix::Zero(rows, m);
  objective.offset = RealVector::Zero(rows);

  Eigen::Index row = 0;
  for (std::size_t g = 0; g < configs.size(); ++g) {
    for (std::size_t alpha = 0; alpha < configs[g].povm.outcome_count(); ++alpha, ++row) {
      ComplexMatrix r = r_operator(configs[g].rho, configs[g].povm.elements[alpha]);
      for (Eigen::Index k = 0; k < m; ++k) {
        Complex tr = (r * model.basis[static_cast<std::size_t>(k)]).trace();
        if (std::abs(tr.imag()) > 1e-10)
          throw std::runtime_error("build_objective: design entry has an imaginary part");
        objective.design(row, k) = tr.real();
      }
      Complex tr0 = (r * model.h0).trace();
      if (std::abs(tr0.imag()) > 1e-10)
        throw std::runtime_error("build_objective: offset entry has an imaginary part");
      objective.offset(row) = freqs[g][alpha] - tr0.real();
    }
  }
  return objective;
}

SolveOutcome barrier_solve(const QuadraticObjective& objective, const ComplexMatrix& lmi_h0,
                           const std::vector<ComplexMatrix>& lmi_basis,
                           const std::vector<ConvexRelation>& relations,
                           const std::optional<RealVector>& linear_term,
                           const std::optional<double>& budget, const RealVector& start,
                           const SolverOptions& opts) {
  BarrierTerms terms{&objective,
                     &lmi_h0,
                     &lmi_basis,
                     &relations,
                     linear_term ? &*linear_term : nullptr,
                     budget ? &*budget : nullptr};
  return run_path(terms, start, opts);
}

SolveOutcome solve_main(const AffineChoiModel& model, const QuadraticObjective& objective,
                        const SolverOptions& opts) {
  if (objective.var_count() != model.var_count())
    throw std::invalid_argument("solve_main: objective does not match the model");

  const RealVector& start = model.interior_point;
  if (evaluate_choi(model, start).min_eigenvalue() <= 0.0)
    throw std::invalid_argument("solve_main: interior point is not strictly feasible");
  for (const ConvexRelation& rel : model.convex_relations)
    if (rel.value(start) >= 0.0)
      throw std::invalid_argument("solve_main: interior point violates a relation");

  return barrier_solve(objective, model.h0, model.basis, model.convex_relations,
                       std::nullopt, std::nullopt, start, opts);
}

RealVector aux_objective_direction(const ConvexRelation& rel) {
  const Eigen::Index m = rel.lin.size();
  RealVector dir = RealVector::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    bool in_quad = false;
    for (Eigen::Index l = 0; l < m; ++l)
      if (rel.quad(k, l) != 0.0 || rel.quad(l, k) != 0.0) in_quad = true;
    if (!in_quad) dir(k) = -rel.lin(k);
  }
  return dir;
}

SolveOutcome solve_auxiliary_sequence(const AffineChoiModel& model,
                                      const QuadraticObjective& objective,
                                      const SolveOutcome& main, const SolverOptions& opts) {
  if (model.convex_relations.empty()) return main;

  SolveOutcome result = main;
  double v_prev = main.objective_value;

  for (const ConvexRelation& rel : model.convex_relations) {
    RealVector direction = aux_objective_direction(rel);
    if (direction.isZero(0.0)) continue;

    double budget = v_prev * (1.0 + opts.aux_relaxation);
    const double v_here = objective.value(result.h_star);
    if (v_here >= budget) {
      // v* left no strict interior; inflate the budget from the current
      // point and report it
      budget = v_here * (1.0 + opts.aux_relaxation) +
               std::numeric_limits<double>::denorm_min();
      result.message += "[auxiliary budget inflated]";
    }

    SolveOutcome stage =
        barrier_solve(objective, model.h0, model.basis, model.convex_relations, direction,
                      budget, result.h_star, opts);

    result.h_star = stage.h_star;
    result.objective_value = stage.objective_value;
    result.min_choi_eig = stage.min_choi_eig;
    result.converged = result.converged && stage.converged;
    result.iterations.insert(result.iterations.end(), stage.iterations.begin(),
                             stage.iterations.end());
    result.stages.insert(result.stages.end(), stage.stages.begin(), stage.stages.end());
    if (!stage.message.empty()) result.message += stage.message;
    v_prev = stage.objective_value;
  }
  return result;
}

}  // namespace choitomo
