#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "choitomo/estimator.hpp"

#include <cmath>

using namespace choitomo;

namespace {

RealVector make_vec(std::initializer_list<double> vals) {
  RealVector v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

EstimationResult estimate_exact(const AffineChoiModel& model, const RealVector& theta,
                                std::uint64_t n_per_config = 1000) {
  std::vector<TomographyConfiguration> configs = standard_configs_for(model, n_per_config);
  ChoiMatrix x = evaluate_choi(model, model.h_of_theta(theta));
  return estimate_from_frequencies(model, configs, exact_frequencies(x, configs));
}

}  // namespace

TEST_CASE("closed-form extraction through the public entry point") {
  AffineChoiModel gad = gad_model();
  ExtractionOutcome out = extract_parameters(gad, make_vec({0.7, 0.21, 0.5477}));
  CHECK(out.theta(0) == doctest::Approx(0.7));
  CHECK(out.theta(1) == doctest::Approx(0.3));
  CHECK(out.residual < 1e-10);

  ExtractionOutcome flagged = extract_parameters(gad, make_vec({1e-9, 1e-10, 1.0}));
  CHECK(flagged.theta(0) == doctest::Approx(0.0).epsilon(1e-8));
  REQUIRE(flagged.unidentifiable.size() == 1);
  CHECK(flagged.unidentifiable[0] == "p");

  AffineChoiModel trep = pauli_t_model();
  ExtractionOutcome ident = extract_parameters(trep, make_vec({0.3, -0.1, 0.1}));
  CHECK((ident.theta - make_vec({0.3, -0.1, 0.1})).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("multistart extraction agrees with the closed form on GAD") {
  AffineChoiModel gad = gad_model();
  for (auto [gamma, p] : {std::pair{0.7, 0.3}, {0.2, 0.9}, {0.05, 0.5}, {0.95, 0.1}}) {
    RealVector h = gad.h_of_theta(make_vec({gamma, p}));
    ExtractionOutcome closed = extract_parameters(gad, h);
    ExtractionOutcome numeric = extract_parameters_multistart(gad, h);
    CHECK((closed.theta - numeric.theta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(numeric.residual < 1e-10);
  }
}

TEST_CASE("extraction paths agree off the model manifold") {
  // a solver output never sits exactly on h = h(θ); both extraction routes
  // must still land on the same parameters
  AffineChoiModel gad = gad_model();
  RealVector h = make_vec({0.65, 0.2, 0.57});
  ExtractionOutcome closed = extract_parameters(gad, h);
  ExtractionOutcome numeric = extract_parameters_multistart(gad, h);
  CHECK(closed.theta(0) == doctest::Approx(0.65));
  CHECK(closed.theta(1) == doctest::Approx(0.2 / 0.65));
  CHECK((closed.theta - numeric.theta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("thread count does not change the results") {
  ExperimentPlan plan;
  plan.model_id = "gad";
  plan.theta_true = make_vec({0.7, 0.3});
  plan.n_grid = {500};
  plan.repetitions = 4;
  plan.base_seed = 77;

  setenv("CHOITOMO_THREADS", "1", 1);
  ExperimentReport serial = run_experiment(plan);
  setenv("CHOITOMO_THREADS", "4", 1);
  ExperimentReport parallel = run_experiment(plan);
  unsetenv("CHOITOMO_THREADS");

  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].theta_hat == parallel.runs[i].theta_hat);
    CHECK(serial.runs[i].fidelity == parallel.runs[i].fidelity);
    CHECK(serial.runs[i].hs_error == parallel.runs[i].hs_error);
  }
}

TEST_CASE("extraction residual vanishes on the model image") {
  AffineChoiModel gp = gen_pauli_model();
  RealVector theta = make_vec({0.05, 0.15, 0.2, 0.3});
  ExtractionOutcome numeric = extract_parameters_multistart(gp, gp.h_of_theta(theta));
  CHECK(numeric.residual < 1e-10);
  CHECK((numeric.theta - theta).cwiseAbs().maxCoeff() < 1e-6);

  AffineChoiModel trep = pauli_t_model();
  RealVector t2 = make_vec({0.4, 0.1, -0.3});
  ExtractionOutcome n2 = extract_parameters_multistart(trep, t2);
  CHECK(n2.residual < 1e-10);
  CHECK((n2.theta - t2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("noiseless pipeline recovers the reference parameter points") {
  AffineChoiModel trep = pauli_t_model();
  EstimationResult r1 = estimate_exact(trep, make_vec({0.4, 0.1, -0.5}));
  CHECK((r1.theta_hat - make_vec({0.4, 0.1, -0.5})).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(r1.solve_diagnostics.converged);

  AffineChoiModel gad = gad_model();
  EstimationResult r2 = estimate_exact(gad, make_vec({1.0, 0.0}));
  CHECK(std::abs(r2.theta_hat(0) - 1.0) < 1e-3);
  CHECK(std::abs(r2.theta_hat(1) - 0.0) < 1e-3);

  EstimationResult r3 = estimate_exact(gad, make_vec({0.0, 1.0}));
  CHECK(std::abs(r3.theta_hat(0) - 0.0) < 1e-3);

  AffineChoiModel gp = gen_pauli_model();
  EstimationResult r4 = estimate_exact(gp, make_vec({0.0, 0.15, 0.3, 0.5}));
  CHECK((r4.theta_hat - make_vec({0.0, 0.15, 0.3, 0.5})).cwiseAbs().maxCoeff() < 1e-4);

  // estimated Choi matrices stay CPTP
  for (const EstimationResult* r : {&r1, &r2, &r3, &r4}) {
    CHECK(r->choi_star.min_eigenvalue() >= -1e-7);
    CHECK(r->choi_star.trace_preserving_defect() <= 1e-7);
  }
}

TEST_CASE("output fidelity metric") {
  AffineChoiModel trep = pauli_t_model();
  EstimationResult perfect = estimate_exact(trep, make_vec({0.3, -0.1, 0.1}));
  ComplexVector k0 = ComplexVector::Zero(2);
  k0(0) = 1;
  DensityMatrix probe = DensityMatrix::pure(k0);
  CHECK(metric_output_fidelity(trep, make_vec({0.3, -0.1, 0.1}), perfect, probe) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // completely depolarizing estimate of the identity channel on a pure probe
  EstimationResult depol = perfect;
  depol.choi_star = evaluate_choi(trep, make_vec({0.0, 0.0, 0.0}));
  CHECK(metric_output_fidelity(trep, make_vec({1.0, 1.0, 1.0}), depol, probe) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("parameter statistics") {
  std::vector<RealVector> reps;
  for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) reps.push_back(make_vec({v}));
  auto [mean, variance] = metric_param_stats(reps);
  CHECK(mean(0) == doctest::Approx(3.0));
  CHECK(variance(0) == doctest::Approx(2.5));

  std::vector<RealVector> same(4, make_vec({0.4, -0.2}));
  auto [m2, v2] = metric_param_stats(same);
  CHECK(v2.cwiseAbs().maxCoeff() == 0.0);

  std::vector<RealVector> one(1, make_vec({1.0}));
  CHECK_THROWS_AS(metric_param_stats(one), std::invalid_argument);
}

TEST_CASE("hs error metric") {
  ComplexVector vi = vec_col(identity(2));
  ComplexVector vx = vec_col(pauli_x());
  ChoiMatrix ident(2, vi * vi.adjoint());
  ChoiMatrix flip(2, vx * vx.adjoint());
  CHECK(metric_hs_error(ident, ident) == 0.0);
  CHECK(metric_hs_error(ident, flip) == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("variance scales like 1/n") {
  ExperimentPlan plan;
  plan.model_id = "pauli_t";
  plan.theta_true = make_vec({0.3, -0.1, 0.1});
  plan.n_grid = {1000, 100000};
  plan.repetitions = 10;
  plan.base_seed = 2026;
  ExperimentReport report = run_experiment(plan);
  REQUIRE(report.aggregates.size() == 2);
  REQUIRE(report.aggregates[0].theta_variance.has_value());
  for (Eigen::Index i = 0; i < 3; ++i) {
    double ratio = (*report.aggregates[0].theta_variance)(i) /
                   (*report.aggregates[1].theta_variance)(i);
    CHECK(ratio >= 30.0);
    CHECK(ratio <= 300.0);
  }
}

TEST_CASE("run_experiment in exact mode") {
  ExperimentPlan plan;
  plan.model_id = "pauli_t";
  plan.theta_true = make_vec({0.3, -0.1, 0.1});
  plan.exact_mode = true;
  ExperimentReport report = run_experiment(plan);
  REQUIRE(report.runs.size() == 1);
  CHECK(report.runs[0].fidelity >= 1.0 - 1e-6);
  CHECK(report.runs[0].hs_error <= 1e-5);
  CHECK(!report.aggregates[0].theta_variance.has_value());
  CHECK(report.all_converged);
}

TEST_CASE("run_experiment grid shape, accuracy and determinism") {
  ExperimentPlan plan;
  plan.model_id = "gad";
  plan.theta_true = make_vec({0.7, 0.3});
  plan.n_grid = {1000, 10000};
  plan.repetitions = 5;
  plan.base_seed = 99;

  ExperimentReport a = run_experiment(plan);
  CHECK(a.runs.size() == 10);
  CHECK(a.aggregates.size() == 2);
  CHECK(std::abs(a.aggregates[1].theta_mean(0) - 0.7) < 0.05);
  CHECK(std::abs(a.aggregates[1].theta_mean(1) - 0.3) < 0.05);
  CHECK(!a.aggregates[0].covariance.has_value());  // GAD: correlated parameters
  CHECK(a.covariance_diagonal == false);

  ExperimentReport b = run_experiment(plan);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].theta_hat == b.runs[i].theta_hat);
    CHECK(a.runs[i].fidelity == b.runs[i].fidelity);
  }

  ExperimentPlan tp;
  tp.model_id = "pauli_t";
  tp.theta_true = make_vec({0.3, -0.1, 0.1});
  tp.n_grid = {1000};
  tp.repetitions = 3;
  tp.base_seed = 5;
  ExperimentReport c = run_experiment(tp);
  CHECK(c.aggregates[0].covariance.has_value());
  CHECK(c.covariance_diagonal == true);

  CHECK_THROWS_AS(
      [] {
        ExperimentPlan bad;
        bad.model_id = "gad";
        bad.theta_true = make_vec({2.0, 0.0});
        bad.n_grid = {100};
        return run_experiment(bad);
      }(),
      std::invalid_argument);
}

TEST_CASE("hs error trend decreases with n on the GAD sweep") {
  ExperimentPlan plan;
  plan.model_id = "gad";
  plan.theta_true = make_vec({0.7, 0.3});
  plan.n_grid = {100, 1000, 10000};
  plan.repetitions = 5;
  plan.base_seed = 8;
  ExperimentReport report = run_experiment(plan);
  REQUIRE(report.aggregates.size() == 3);
  CHECK(report.aggregates[1].mean_hs_error < report.aggregates[0].mean_hs_error);
  CHECK(report.aggregates[2].mean_hs_error < report.aggregates[1].mean_hs_error);
}

TEST_CASE("estimates concentrate as n grows") {
  ExperimentPlan plan;
  plan.model_id = "pauli_t";
  plan.theta_true = make_vec({0.3, -0.1, 0.1});
  plan.n_grid = {100, 100000};
  plan.repetitions = 5;
  plan.base_seed = 31;
  ExperimentReport report = run_experiment(plan);
  double coarse =
      (report.aggregates[0].theta_mean - plan.theta_true).cwiseAbs().maxCoeff();
  double fine = (report.aggregates[1].theta_mean - plan.theta_true).cwiseAbs().maxCoeff();
  CHECK(fine < coarse);
}

TEST_CASE("seed splitting separates runs") {
  CHECK(derive_run_seed(0, 0, 0, 5) != derive_run_seed(0, 0, 1, 5));
  CHECK(derive_run_seed(0, 0, 0, 5) != derive_run_seed(0, 1, 0, 5));
  CHECK(derive_run_seed(1, 0, 0, 5) != derive_run_seed(2, 0, 0, 5));
}
