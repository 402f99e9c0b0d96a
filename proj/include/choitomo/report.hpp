// report.hpp — serialization of experiment reports: CSV (byte-deterministic),
// JSON, and the four metric charts.

#pragma once

#include "choitomo/estimator.hpp"

#include <filesystem>
#include <string>

namespace choitomo {

// Header: n,rep,<param names…>,fidelity,hs_error,objective. One row per
// n×repetition; exact-mode runs carry n = inf.
std::string report_csv(const ExperimentReport& report);

std::string report_json(const ExperimentReport& report);

// Measurement counts as CSV with columns gamma,alpha,count.
std::string record_csv(const MeasurementRecord& record);

// Writes report.json, report.csv and fidelity.svg / mean.svg / variance.svg /
// hs_error.svg into the directory (created if missing).
void write_report_files(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace choitomo
