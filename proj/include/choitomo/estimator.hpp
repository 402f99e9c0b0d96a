// estimator.hpp — the end-to-end estimation pipeline (solve → auxiliary →
// extract), the four estimation-quality metrics, and the repeated-experiment
// harness with deterministic seed splitting.

#pragma once

#include "choitomo/solver.hpp"

#include <cstdint>
#include <optional>

namespace choitomo {

struct EstimationResult {
  RealVector h_star;
  ChoiMatrix choi_star;
  RealVector theta_hat;  // clamped into the model's parameter box
  double objective = 0.0;
  double extraction_residual = 0.0;
  std::vector<std::string> unidentifiable_params;
  bool theta_clamped = false;
  SolveOutcome solve_diagnostics;  // main + auxiliary stages
};

struct ExtractorOptions {
  int multistart_count = 50;
  int max_iterations = 500;  // simplex iterations per start
  // extraction must be deterministic given its inputs, so the multistart
  // stream is fixed rather than user-seeded
  std::uint64_t seed = 0x5eed0001u;
};

// Closed-form extraction when the model provides one, multistart otherwise.
ExtractionOutcome extract_parameters(const AffineChoiModel& model, const RealVector& h_star,
                                     const ExtractorOptions& opts = {});

// Derivative-free multistart: Nelder–Mead descents from CP-filtered uniform
// parameter-box samples on Σ_{l∈I_V} (h*_l - h_l(θ))².
ExtractionOutcome extract_parameters_multistart(const AffineChoiModel& model,
                                                const RealVector& h_star,
                                                const ExtractorOptions& opts = {});

EstimationResult estimate_from_frequencies(const AffineChoiModel& model,
                                           const std::vector<TomographyConfiguration>& configs,
                                           const std::vector<std::vector<double>>& freqs,
                                           const SolverOptions& opts = {});

EstimationResult estimate(const AffineChoiModel& model, const MeasurementRecord& record,
                          const std::vector<TomographyConfiguration>& configs,
                          const SolverOptions& opts = {});

// F(Ê(probe), E(probe)) for the true channel at theta_true.
double metric_output_fidelity(const AffineChoiModel& model, const RealVector& theta_true,
                              const EstimationResult& result, const DensityMatrix& probe);

// Per-parameter sample mean and unbiased sample variance (divisor R-1).
std::pair<RealVector, RealVector> metric_param_stats(const std::vector<RealVector>& estimates);

double metric_hs_error(const ChoiMatrix& x_hat, const ChoiMatrix& x_true);

struct ExperimentPlan {
  std::string model_id;
  RealVector theta_true;
  std::vector<std::uint64_t> n_grid;  // shots per configuration n_γ
  int repetitions = 5;
  std::uint64_t base_seed = 0;
  bool exact_mode = false;
  std::optional<ComplexVector> probe_ket;  // default: the configuration input state
};

struct RunRecord {
  std::uint64_t n_shots = 0;  // per configuration; 0 marks an exact-mode run
  int repetition = 0;
  RealVector theta_hat;
  double fidelity = 0.0;
  double hs_error = 0.0;
  double objective = 0.0;
  std::vector<std::string> unidentifiable;
  std::vector<BarrierStageLog> solver_stages;            // per-μ diagnostics
  std::vector<std::vector<std::uint64_t>> counts;  // c_{α,γ} of this run
};

struct AggregateRecord {
  std::uint64_t n_shots = 0;
  RealVector theta_mean;
  std::optional<RealVector> theta_variance;  // present when repetitions ≥ 2
  std::optional<RealMatrix> covariance;      // reported for independent measurements only
  double mean_fidelity = 0.0;
  double mean_hs_error = 0.0;
};

struct ExperimentReport {
  ExperimentPlan plan;
  std::vector<std::string> param_names;
  std::vector<RunRecord> runs;  // grid-major, repetition-minor
  std::vector<AggregateRecord> aggregates;
  bool covariance_diagonal = false;  // the model's measurement-independence flag
  bool all_converged = true;
};

// Standard configurations for the model's dimension (Pauli POVMs for qubits,
// MUB projectors for qutrits), n_per_config shots each.
std::vector<TomographyConfiguration> standard_configs_for(const AffineChoiModel& model,
                                                          std::uint64_t n_per_config);

// Documented seed-splitting rule:
// splitmix64(splitmix64(base_seed) + grid_index·R + rep).
std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t grid_index,
                              int repetition, int repetitions);

// Repetitions and grid points fan out over threads (capped by the
// CHOITOMO_THREADS environment variable); results land in indexed slots so
// aggregation is order-independent and deterministic.
ExperimentReport run_experiment(const ExperimentPlan& plan);

}  // namespace choitomo
