// cli.hpp — experiment configuration files and the batch front-end.

#pragma once

#include "choitomo/estimator.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace choitomo {

// Configuration error that names the offending field.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_name, const std::string& what)
      : std::runtime_error("config field '" + field_name + "': " + what),
        field(std::move(field_name)) {}
};

struct ExperimentSpec {
  ExperimentPlan plan;
  std::filesystem::path output_dir = ".";
};

// Strict JSON schema: unknown keys are rejected, types are checked, the model
// id must be registered and theta_true must match its parameter count.
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& config_path);

std::string list_models_table();

// Verbs: run, validate, list-models. Flags: --config PATH, --out DIR,
// --seed U64, --exact, --verbose. Returns the process exit code:
// 0 success, 2 configuration error, 3 solver failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace choitomo
