#include "choitomo/report.hpp"

#include "choitomo/svg_plot.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace choitomo {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
  std::string csv = "n,rep";
  for (const std::string& name : report.param_names) csv += "," + name;
  csv += ",fidelity,hs_error,objective\n";

  for (const RunRecord& run : report.runs) {
    csv += report.plan.exact_mode ? "inf" : std::to_string(run.n_shots);
    csv += "," + std::to_string(run.repetition);
    for (Eigen::Index i = 0; i < run.theta_hat.size(); ++i) csv += "," + num(run.theta_hat(i));
    csv += "," + num(run.fidelity);
    csv += "," + num(run.hs_error);
    csv += "," + num(run.objective);
    csv += "\n";
  }
  return csv;
}

std::string record_csv(const MeasurementRecord& record) {
  std::string csv = "gamma,alpha,count\n";
  for (std::size_t gamma = 0; gamma < record.counts.size(); ++gamma)
    for (std::size_t alpha = 0; alpha < record.counts[gamma].size(); ++alpha)
      csv += std::to_string(gamma) + "," + std::to_string(alpha) + "," +
             std::to_string(record.counts[gamma][alpha]) + "\n";
  return csv;
}

std::string report_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["model"] = report.plan.model_id;
  j["theta_true"] = std::vector<double>(report.plan.theta_true.data(),
                                        report.plan.theta_true.data() +
                                            report.plan.theta_true.size());
  j["n_grid"] = report.plan.n_grid;
  j["repetitions"] = report.plan.repetitions;
  j["seed"] = report.plan.base_seed;
  j["exact_mode"] = report.plan.exact_mode;
  j["param_names"] = report.param_names;
  j["covariance_diagonal"] = report.covariance_diagonal;
  j["all_converged"] = report.all_converged;

  nlohmann::json runs = nlohmann::json::array();
  for (const RunRecord& run : report.runs) {
    nlohmann::json r;
    if (report.plan.exact_mode)
      r["n"] = nullptr;
    else
      r["n"] = run.n_shots;
    r["rep"] = run.repetition;
    r["theta_hat"] = std::vector<double>(run.theta_hat.data(),
                                         run.theta_hat.data() + run.theta_hat.size());
    r["fidelity"] = run.fidelity;
    r["hs_error"] = run.hs_error;
    r["objective"] = run.objective;
    r["unidentifiable"] = run.unidentifiable;
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);

  nlohmann::json aggs = nlohmann::json::array();
  for (const AggregateRecord& agg : report.aggregates) {
    nlohmann::json a;
    if (report.plan.exact_mode)
      a["n"] = nullptr;
    else
      a["n"] = agg.n_shots;
    a["theta_mean"] = std::vector<double>(agg.theta_mean.data(),
                                          agg.theta_mean.data() + agg.theta_mean.size());
    if (agg.theta_variance)
      a["theta_variance"] = std::vector<double>(
          agg.theta_variance->data(), agg.theta_variance->data() + agg.theta_variance->size());
    else
      a["theta_variance"] = nullptr;
    if (agg.covariance) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < agg.covariance->rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < agg.covariance->cols(); ++c)
          row.push_back((*agg.covariance)(r, c));
        rows.push_back(std::move(row));
      }
      a["covariance"] = std::move(rows);
    } else if (!report.covariance_diagonal) {
      a["covariance_note"] = "correlated - covariance matrix not diagonal";
    }
    a["mean_fidelity"] = agg.mean_fidelity;
    a["mean_hs_error"] = agg.mean_hs_error;
    aggs.push_back(std::move(a));
  }
  j["aggregates"] = std::move(aggs);
  return j.dump(2) + "\n";
}

void write_report_files(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.csv", report_csv(report));
  write_file(dir / "report.json", report_json(report));

  std::vector<double> x;
  for (const AggregateRecord& agg : report.aggregates)
    x.push_back(report.plan.exact_mode ? 1.0 : static_cast<double>(agg.n_shots));
  const bool log_x = !report.plan.exact_mode;
  const std::string x_label = "shots per configuration";

  std::vector<SvgSeries> fid{{"fidelity", {}}};
  std::vector<SvgSeries> hs{{"hs_error", {}}};
  std::vector<SvgSeries> mean, variance;
  for (const std::string& name : report.param_names) {
    mean.push_back({name, {}});
    variance.push_back({name, {}});
  }
  bool have_variance = true;
  for (const AggregateRecord& agg : report.aggregates) {
    fid[0].y.push_back(agg.mean_fidelity);
    hs[0].y.push_back(agg.mean_hs_error);
    for (std::size_t p = 0; p < report.param_names.size(); ++p) {
      mean[p].y.push_back(agg.theta_mean(static_cast<Eigen::Index>(p)));
      if (agg.theta_variance)
        variance[p].y.push_back((*agg.theta_variance)(static_cast<Eigen::Index>(p)));
      else
        have_variance = false;
    }
  }

  write_file(dir / "fidelity.svg",
             svg_line_chart("output fidelity", x_label, "F", x, log_x, fid));
  write_file(dir / "mean.svg",
             svg_line_chart("parameter means", x_label, "mean", x, log_x, mean));
  write_file(dir / "variance.svg",
             svg_line_chart("parameter variances", x_label, "variance", x, log_x,
                            have_variance ? variance : std::vector<SvgSeries>{}));
  write_file(dir / "hs_error.svg",
             svg_line_chart("Hilbert-Schmidt error", x_label, "||X_hat - X||", x, log_x, hs));
}

}  // namespace choitomo
