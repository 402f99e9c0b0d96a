#include "choitomo/cli.hpp"

#include "choitomo/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace choitomo {

namespace fs = std::filesystem;

namespace {

const char* kKnownKeys[] = {"model",     "theta_true", "n_grid", "repetitions",
                            "seed",      "exact_mode", "output_dir", "probe"};

ComplexVector parse_probe(const nlohmann::json& probe) {
  if (!probe.is_object()) throw ConfigError("probe", "must be an object");
  for (auto it = probe.begin(); it != probe.end(); ++it)
    if (it.key() != "bloch" && it.key() != "ket")
      throw ConfigError("probe." + it.key(), "unknown key");
  if (probe.contains("bloch") && probe.contains("ket"))
    throw ConfigError("probe", "give either 'bloch' or 'ket', not both");

  if (probe.contains("bloch")) {
    const nlohmann::json& b = probe["bloch"];
    if (!b.is_array() || b.size() != 3)
      throw ConfigError("probe.bloch", "must be an array of 3 numbers");
    double x = b[0].get<double>(), y = b[1].get<double>(), z = b[2].get<double>();
    double r = std::sqrt(x * x + y * y + z * z);
    if (std::abs(r - 1.0) > 1e-9)
      throw ConfigError("probe.bloch", "must be a unit vector (pure probe state)");
    // ket of the pure state with this Bloch vector
    DensityMatrix rho = DensityMatrix::from_bloch(x, y, z);
    HermEig eig = herm_eig(rho.matrix());
    return eig.eigenvectors.col(eig.eigenvalues.size() - 1);
  }
  const nlohmann::json& k = probe["ket"];
  if (!k.is_array() || k.empty())
    throw ConfigError("probe.ket", "must be a nonempty array of [re, im] pairs");
  ComplexVector ket(static_cast<Eigen::Index>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!k[i].is_array() || k[i].size() != 2)
      throw ConfigError("probe.ket", "entries must be [re, im] pairs");
    ket(static_cast<Eigen::Index>(i)) = Complex(k[i][0].get<double>(), k[i][1].get<double>());
  }
  if (ket.norm() < 1e-12) throw ConfigError("probe.ket", "must be nonzero");
  return ket;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("(file)", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("(file)", "top level must be an object");

  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : kKnownKeys)
      if (it.key() == key) known = true;
    if (!known) throw ConfigError(it.key(), "unknown key");
  }

  ExperimentSpec spec;

  if (!j.contains("model") || !j["model"].is_string())
    throw ConfigError("model", "required string");
  spec.plan.model_id = j["model"].get<std::string>();
  const AffineChoiModel* model = nullptr;
  try {
    model = &model_registry(spec.plan.model_id);
  } catch (const std::invalid_argument&) {
    throw ConfigError("model", "unknown model id '" + spec.plan.model_id + "'");
  }

  if (!j.contains("theta_true") || !j["theta_true"].is_array())
    throw ConfigError("theta_true", "required array of numbers");
  if (static_cast<Eigen::Index>(j["theta_true"].size()) != model->param_count())
    throw ConfigError("theta_true", "expected " + std::to_string(model->param_count()) +
                                        " parameters for model '" + spec.plan.model_id + "'");
  spec.plan.theta_true = RealVector(model->param_count());
  for (Eigen::Index i = 0; i < model->param_count(); ++i) {
    const nlohmann::json& v = j["theta_true"][static_cast<std::size_t>(i)];
    if (!v.is_number()) throw ConfigError("theta_true", "entries must be numbers");
    spec.plan.theta_true(i) = v.get<double>();
  }

  if (j.contains("exact_mode")) {
    if (!j["exact_mode"].is_boolean()) throw ConfigError("exact_mode", "must be a boolean");
    spec.plan.exact_mode = j["exact_mode"].get<bool>();
  }

  if (j.contains("n_grid")) {
    if (!j["n_grid"].is_array()) throw ConfigError("n_grid", "must be an array of counts");
    for (const nlohmann::json& v : j["n_grid"]) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
        throw ConfigError("n_grid", "entries must be positive integers");
      spec.plan.n_grid.push_back(v.get<std::uint64_t>());
    }
  }
  if (!spec.plan.exact_mode && spec.plan.n_grid.empty())
    throw ConfigError("n_grid", "required (nonempty) unless exact_mode is set");

  if (j.contains("repetitions")) {
    if (!j["repetitions"].is_number_unsigned() || j["repetitions"].get<std::uint64_t>() == 0)
      throw ConfigError("repetitions", "must be a positive integer");
    spec.plan.repetitions = static_cast<int>(j["repetitions"].get<std::uint64_t>());
  }

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      throw ConfigError("seed", "must be an unsigned 64-bit integer");
    spec.plan.base_seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir", "must be a string");
    spec.output_dir = j["output_dir"].get<std::string>();
  }

  if (j.contains("probe")) {
    ComplexVector ket = parse_probe(j["probe"]);
    if (ket.size() != model->dim)
      throw ConfigError("probe", "probe dimension does not match the model");
    spec.plan.probe_ket = ket;
  }

  if (!model->cp_feasible(spec.plan.theta_true))
    throw ConfigError("theta_true", "parameters violate the model's CP condition");

  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& config_path) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw ConfigError("(file)", "cannot read " + config_path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_spec(buffer.str());
}

std::string list_models_table() {
  std::string out = "id           params                              box                relations\n";
  for (const std::string& id : registered_model_ids()) {
    const AffineChoiModel& model = model_registry(id);
    std::string params, box;
    for (std::size_t i = 0; i < model.param_names.size(); ++i) {
      if (i) params += ", ";
      params += model.param_names[i];
    }
    char range[64];
    // boxes are uniform per model, print the common interval
    std::snprintf(range, sizeof(range), "[%g, %g]^%zu", model.param_box.front().first,
                  model.param_box.front().second, model.param_box.size());
    box = range;
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %-35s %-18s %zu\n", id.c_str(), params.c_str(),
                  box.c_str(), model.convex_relations.size());
    out += line;
  }
  return out;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"parameter estimation of structured quantum channels from simulated counts"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool exact = false, verbose = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--seed", seed, "base seed (overrides config)");
  run->add_flag("--exact", exact, "frequencies = exact probabilities");
  run->add_flag("--verbose", verbose, "also write solver_log.csv");

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "experiment config (JSON)")->required();

  app.add_subcommand("list-models", "print the registered channel models");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list-models")) {
      std::cout << list_models_table();
      return 0;
    }

    ExperimentSpec spec = load_experiment_spec(config_path);
    if (app.got_subcommand("validate")) {
      std::cout << "ok: " << config_path << "\n";
      return 0;
    }

    if (!out_dir.empty()) spec.output_dir = out_dir;
    if (run->count("--seed")) spec.plan.base_seed = seed;
    if (exact) spec.plan.exact_mode = true;

    ExperimentReport report = run_experiment(spec.plan);
    write_report_files(report, spec.output_dir);

    if (verbose) {
      fs::path records_dir = spec.output_dir / "records";
      fs::create_directories(records_dir);
      for (const RunRecord& r : report.runs) {
        if (r.counts.empty()) continue;
        MeasurementRecord rec;
        rec.counts = r.counts;
        std::ofstream out(records_dir / ("n" + std::to_string(r.n_shots) + "_rep" +
                                         std::to_string(r.repetition) + ".csv"),
                          std::ios::binary);
        out << record_csv(rec);
      }
      std::string log = "n,rep,stage,mu,newton_steps,objective,min_eig\n";
      for (const RunRecord& r : report.runs) {
        for (std::size_t s = 0; s < r.solver_stages.size(); ++s) {
          char line[160];
          std::snprintf(line, sizeof(line), "%llu,%d,%zu,%.3e,%d,%.17g,%.17g\n",
                        static_cast<unsigned long long>(r.n_shots), r.repetition, s,
                        r.solver_stages[s].mu, r.solver_stages[s].newton_steps,
                        r.solver_stages[s].objective, r.solver_stages[s].min_eig);
          log += line;
        }
      }
      std::ofstream out(spec.output_dir / "solver_log.csv", std::ios::binary);
      out << log;
    }

    if (!report.all_converged) {
      std::cerr << "solver failed to converge on at least one run\n";
      return 3;
    }
    std::cout << "wrote " << (spec.output_dir / "report.csv").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace choitomo
