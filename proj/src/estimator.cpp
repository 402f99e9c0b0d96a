#include "choitomo/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace choitomo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RealVector clamp_to_box(const AffineChoiModel& model, const RealVector& theta,
                        bool* clamped) {
  RealVector out = theta;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    auto [lo, hi] = model.param_box[static_cast<std::size_t>(i)];
    double v = std::min(hi, std::max(lo, out(i)));
    if (v != out(i) && clamped) *clamped = true;
    out(i) = v;
  }
  return out;
}

// objective of the nonlinear least-squares extraction, restricted to the
// independent variable set
double extraction_misfit(const AffineChoiModel& model, const RealVector& h_star,
                         const RealVector& theta) {
  RealVector h = model.h_of_theta(theta);
  double sum = 0.0;
  for (int l : model.independent_set) {
    double r = h_star(l) - h(l);
    sum += r * r;
  }
  return sum;
}

// penalized objective used inside the simplex: evaluate at the box projection
// and pull stray vertices back toward it
double penalized_misfit(const AffineChoiModel& model, const RealVector& h_star,
                        const RealVector& theta) {
  RealVector inside = theta;
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    auto [lo, hi] = model.param_box[static_cast<std::size_t>(i)];
    double v = std::min(hi, std::max(lo, theta(i)));
    penalty += (theta(i) - v) * (theta(i) - v);
    inside(i) = v;
  }
  return extraction_misfit(model, h_star, inside) + penalty;
}

RealVector nelder_mead(const AffineChoiModel& model, const RealVector& h_star,
                       const RealVector& start, int max_iterations) {
  const Eigen::Index n = start.size();
  std::vector<RealVector> simplex;
  std::vector<double> values;
  simplex.push_back(start);
  for (Eigen::Index i = 0; i < n; ++i) {
    RealVector v = start;
    auto [lo, hi] = model.param_box[static_cast<std::size_t>(i)];
    v(i) += 0.05 * (hi - lo);
    simplex.push_back(v);
  }
  values.reserve(simplex.size());
  for (const RealVector& v : simplex) values.push_back(penalized_misfit(model, h_star, v));

  auto order = [&] {
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      RealVector v = simplex[i];
      double f = values[i];
      std::size_t j = i;
      while (j > 0 && values[j - 1] > f) {
        simplex[j] = simplex[j - 1];
        values[j] = values[j - 1];
        --j;
      }
      simplex[j] = v;
      values[j] = f;
    }
  };
  order();

  for (int iter = 0; iter < max_iterations; ++iter) {
    double spread = 0.0;
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
      spread = std::max(spread, (simplex[i + 1] - simplex[0]).cwiseAbs().maxCoeff());
    if (spread < 1e-10 && values.back() - values.front() < 1e-14 * (1.0 + values.front()))
      break;

    RealVector centroid = RealVector::Zero(n);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    RealVector reflected = centroid + (centroid - simplex.back());
    double f_reflected = penalized_misfit(model, h_star, reflected);
    if (f_reflected < values.front()) {
      RealVector expanded = centroid + 2.0 * (centroid - simplex.back());
      double f_expanded = penalized_misfit(model, h_star, expanded);
      if (f_expanded < f_reflected) {
        simplex.back() = expanded;
        values.back() = f_expanded;
      } else {
        simplex.back() = reflected;
        values.back() = f_reflected;
      }
    } else if (f_reflected < values[values.size() - 2]) {
      simplex.back() = reflected;
      values.back() = f_reflected;
    } else {
      RealVector contracted = centroid + 0.5 * (simplex.back() - centroid);
      double f_contracted = penalized_misfit(model, h_star, contracted);
      if (f_contracted < values.back()) {
        simplex.back() = contracted;
        values.back() = f_contracted;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          values[i] = penalized_misfit(model, h_star, simplex[i]);
        }
      }
    }
    order();
  }
  return clamp_to_box(model, simplex.front(), nullptr);
}

// flags parameters whose perturbation moves no independent variable by more
// than 1e-8
std::vector<std::string> insensitive_parameters(const AffineChoiModel& model,
                                                const RealVector& theta) {
  std::vector<std::string> flagged;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double delta = std::max(1e-6, 1e-6 * std::abs(theta(i)));
    double max_change = 0.0;
    for (double sign : {+1.0, -1.0}) {
      RealVector probe = theta;
      probe(i) += sign * delta;
      probe = clamp_to_box(model, probe, nullptr);
      RealVector dh = model.h_of_theta(probe) - model.h_of_theta(theta);
      for (int l : model.independent_set) max_change = std::max(max_change, std::abs(dh(l)));
    }
    if (max_change <= 1e-8)
      flagged.push_back(model.param_names[static_cast<std::size_t>(i)]);
  }
  return flagged;
}

int thread_budget(std::size_t tasks) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("CHOITOMO_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 64) hw = static_cast<unsigned>(v);
  }
  return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(tasks, 1)));
}

}  // namespace

ExtractionOutcome extract_parameters(const AffineChoiModel& model, const RealVector& h_star,
                                     const ExtractorOptions& opts) {
  if (!h_star.allFinite())
    throw std::invalid_argument("extract_parameters: non-finite variables");
  if (model.extract_closed_form) {
    ExtractionOutcome out = model.extract_closed_form(h_star);
    out.theta = clamp_to_box(model, out.theta, nullptr);
    out.residual = extraction_misfit(model, h_star, out.theta);
    return out;
  }
  return extract_parameters_multistart(model, h_star, opts);
}

ExtractionOutcome extract_parameters_multistart(const AffineChoiModel& model,
                                                const RealVector& h_star,
                                                const ExtractorOptions& opts) {
  std::mt19937_64 gen(opts.seed);
  const Eigen::Index np = model.param_count();

  std::vector<RealVector> starts;
  int attempts = 0;
  while (static_cast<int>(starts.size()) < opts.multistart_count &&
         attempts < opts.multistart_count * 200) {
    ++attempts;
    RealVector theta(np);
    for (Eigen::Index i = 0; i < np; ++i) {
      auto [lo, hi] = model.param_box[static_cast<std::size_t>(i)];
      theta(i) = lo + (hi - lo) * canonical_uniform(gen);
    }
    if (model.cp_feasible(theta)) starts.push_back(theta);
  }
  if (starts.empty())
    throw std::runtime_error("extract_parameters_multistart: no CP-feasible start found");

  ExtractionOutcome best;
  best.residual = std::numeric_limits<double>::infinity();
  for (const RealVector& start : starts) {
    RealVector theta = nelder_mead(model, h_star, start, opts.max_iterations);
    double misfit = extraction_misfit(model, h_star, theta);
    if (misfit < best.residual) {
      best.theta = theta;
      best.residual = misfit;
    }
  }
  best.unidentifiable = insensitive_parameters(model, best.theta);
  return best;
}

EstimationResult estimate_from_frequencies(const AffineChoiModel& model,
                                           const std::vector<TomographyConfiguration>& configs,
                                           const std::vector<std::vector<double>>& freqs,
                                           const SolverOptions& opts) {
  QuadraticObjective objective = build_objective(model, configs, freqs);
  SolveOutcome main = solve_main(model, objective, opts);
  SolveOutcome sequence = solve_auxiliary_sequence(model, objective, main, opts);

  ExtractionOutcome extraction = extract_parameters(model, sequence.h_star);

  EstimationResult result{sequence.h_star,
                          evaluate_choi(model, sequence.h_star),
                          RealVector(),
                          sequence.objective_value,
                          extraction.residual,
                          extraction.unidentifiable,
                          false,
                          sequence};
  result.theta_hat = clamp_to_box(model, extraction.theta, &result.theta_clamped);

  // estimated Choi must stay CPTP; TP is structural, CP holds to solver slack
  if (result.choi_star.min_eigenvalue() < -1e-7)
    throw std::runtime_error("estimate: estimated Choi matrix lost positivity");
  if (result.choi_star.trace_preserving_defect() > 1e-7)
    throw std::runtime_error("estimate: estimated Choi matrix is not trace preserving");

  // variables with no data column are invisible to the objective; parameters
  // acting only through them are unidentifiable
  std::vector<bool> dead(static_cast<std::size_t>(model.var_count()), false);
  bool any_dead = false;
  for (Eigen::Index k = 0; k < model.var_count(); ++k) {
    dead[static_cast<std::size_t>(k)] =
        objective.design.col(k).cwiseAbs().maxCoeff() <= 1e-12;
    any_dead = any_dead || dead[static_cast<std::size_t>(k)];
  }
  if (any_dead) {
    for (Eigen::Index i = 0; i < result.theta_hat.size(); ++i) {
      RealVector probe = result.theta_hat;
      probe(i) += 1e-6;
      RealVector dh = model.h_of_theta(clamp_to_box(model, probe, nullptr)) -
                      model.h_of_theta(result.theta_hat);
      bool only_dead = true;
      for (int l : model.independent_set)
        if (std::abs(dh(l)) > 1e-8 && !dead[static_cast<std::size_t>(l)]) only_dead = false;
      const std::string& name = model.param_names[static_cast<std::size_t>(i)];
      if (only_dead && std::find(result.unidentifiable_params.begin(),
                                 result.unidentifiable_params.end(),
                                 name) == result.unidentifiable_params.end())
        result.unidentifiable_params.push_back(name);
    }
  }
  return result;
}

EstimationResult estimate(const AffineChoiModel& model, const MeasurementRecord& record,
                          const std::vector<TomographyConfiguration>& configs,
                          const SolverOptions& opts) {
  return estimate_from_frequencies(model, configs, relative_frequencies(record), opts);
}

double metric_output_fidelity(const AffineChoiModel& model, const RealVector& theta_true,
                              const EstimationResult& result, const DensityMatrix& probe) {
  ChoiMatrix x_true = evaluate_choi(model, model.h_of_theta(theta_true));
  return fidelity(apply_choi(result.choi_star, probe), apply_choi(x_true, probe));
}

std::pair<RealVector, RealVector> metric_param_stats(const std::vector<RealVector>& estimates) {
  if (estimates.size() < 2)
    throw std::invalid_argument("metric_param_stats: at least two repetitions required");
  const Eigen::Index np = estimates.front().size();
  const double r = static_cast<double>(estimates.size());

  RealVector mean = RealVector::Zero(np);
  for (const RealVector& e : estimates) mean += e;
  mean /= r;

  RealVector variance = RealVector::Zero(np);
  for (const RealVector& e : estimates) variance += (e - mean).cwiseAbs2();
  variance /= (r - 1.0);
  return {mean, variance};
}

double metric_hs_error(const ChoiMatrix& x_hat, const ChoiMatrix& x_true) {
  if (x_hat.system_dim() != x_true.system_dim())
    throw std::invalid_argument("metric_hs_error: dimension mismatch");
  return hs_norm(x_hat.matrix() - x_true.matrix());
}

std::vector<TomographyConfiguration> standard_configs_for(const AffineChoiModel& model,
                                                          std::uint64_t n_per_config) {
  if (model.dim == 2) return standard_qubit_configs(3 * n_per_config);
  if (model.dim == 3) return standard_qutrit_configs(4 * n_per_config);
  throw std::invalid_argument("standard_configs_for: no standard setup for this dimension");
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t grid_index,
                              int repetition, int repetitions) {
  // diffuse the base first so nearby user seeds do not share run streams
  return splitmix64(splitmix64(base_seed) + static_cast<std::uint64_t>(grid_index) *
                                                static_cast<std::uint64_t>(repetitions) +
                    static_cast<std::uint64_t>(repetition));
}

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  const AffineChoiModel& model = model_registry(plan.model_id);
  if (plan.theta_true.size() != model.param_count())
    throw std::invalid_argument("run_experiment: theta_true length does not match the model");
  if (!model.cp_feasible(plan.theta_true))
    throw std::invalid_argument("run_experiment: theta_true violates the CP condition");
  if (!plan.exact_mode && plan.n_grid.empty())
    throw std::invalid_argument("run_experiment: empty shot grid");
  if (!plan.exact_mode && plan.repetitions < 1)
    throw std::invalid_argument("run_experiment: repetitions must be positive");

  ExperimentReport report;
  report.plan = plan;
  report.param_names = model.param_names;
  report.covariance_diagonal = model.independent_measurements;

  ChoiMatrix x_true = evaluate_choi(model, model.h_of_theta(plan.theta_true));

  auto probe_for = [&](const std::vector<TomographyConfiguration>& configs) {
    return plan.probe_ket ? DensityMatrix::pure(*plan.probe_ket) : configs.front().rho;
  };

  if (plan.exact_mode) {
    std::vector<TomographyConfiguration> configs = standard_configs_for(model, 1);
    EstimationResult est =
        estimate_from_frequencies(model, configs, exact_frequencies(x_true, configs));
    DensityMatrix probe = probe_for(configs);
    RunRecord run{0,
                  0,
                  est.theta_hat,
                  metric_output_fidelity(model, plan.theta_true, est, probe),
                  metric_hs_error(est.choi_star, x_true),
                  est.objective,
                  est.unidentifiable_params,
                  est.solve_diagnostics.stages,
                  {}};
    report.all_converged = est.solve_diagnostics.converged;
    report.runs.push_back(run);
    report.aggregates.push_back(AggregateRecord{0, est.theta_hat, std::nullopt, std::nullopt,
                                                run.fidelity, run.hs_error});
    return report;
  }

  const std::size_t tasks = plan.n_grid.size() * static_cast<std::size_t>(plan.repetitions);
  std::vector<RunRecord> runs(tasks);
  std::vector<char> converged(tasks, 0);

  auto run_task = [&](std::size_t task) {
    const std::size_t gi = task / static_cast<std::size_t>(plan.repetitions);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(plan.repetitions));
    const std::uint64_t n = plan.n_grid[gi];

    std::vector<TomographyConfiguration> configs = standard_configs_for(model, n);
    MeasurementRecord record = simulate_record(
        x_true, configs, derive_run_seed(plan.base_seed, gi, rep, plan.repetitions));
    EstimationResult est = estimate(model, record, configs);
    DensityMatrix probe = probe_for(configs);

    runs[task] = RunRecord{n,
                           rep,
                           est.theta_hat,
                           metric_output_fidelity(model, plan.theta_true, est, probe),
                           metric_hs_error(est.choi_star, x_true),
                           est.objective,
                           est.unidentifiable_params,
                           est.solve_diagnostics.stages,
                           record.counts};
    converged[task] = est.solve_diagnostics.converged ? 1 : 0;
  };

  const int workers = thread_budget(tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) run_task(t);
      });
    for (std::thread& th : pool) th.join();
  }

  report.runs = std::move(runs);
  for (char ok : converged) report.all_converged = report.all_converged && ok;

  for (std::size_t gi = 0; gi < plan.n_grid.size(); ++gi) {
    std::vector<RealVector> thetas;
    double fid = 0.0, hs = 0.0;
    for (int rep = 0; rep < plan.repetitions; ++rep) {
      const RunRecord& run =
          report.runs[gi * static_cast<std::size_t>(plan.repetitions) +
                      static_cast<std::size_t>(rep)];
      thetas.push_back(run.theta_hat);
      fid += run.fidelity;
      hs += run.hs_error;
    }
    AggregateRecord agg;
    agg.n_shots = plan.n_grid[gi];
    agg.mean_fidelity = fid / plan.repetitions;
    agg.mean_hs_error = hs / plan.repetitions;
    if (plan.repetitions >= 2) {
      auto [mean, variance] = metric_param_stats(thetas);
      agg.theta_mean = mean;
      agg.theta_variance = variance;
      if (model.independent_measurements) {
        const Eigen::Index np = model.param_count();
        RealMatrix cov = RealMatrix::Zero(np, np);
        for (const RealVector& t : thetas) cov += (t - mean) * (t - mean).transpose();
        cov /= static_cast<double>(plan.repetitions - 1);
        agg.covariance = cov;
      }
    } else {
      agg.theta_mean = thetas.front();
    }
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

}  // namespace choitomo
