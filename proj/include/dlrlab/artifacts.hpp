#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlrlab/experiments.hpp"
#include "json.hpp"

namespace dlrlab {

/// Shortest decimal text that round-trips to the same double; the one number
/// format used across all artifacts so reruns diff clean.
std::string format_double(double v);

std::string csv_quote(const std::string& field);

/// Everything needed to reproduce a run, written before any trial starts.
struct RunManifest {
  std::string command;
  std::optional<std::string> config_file;
  nlohmann::json resolved_config;  // all defaults materialized
  std::map<std::string, std::string> data_paths;
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  std::string tool_version;
};

nlohmann::json to_json(const RunManifest& manifest);
void write_manifest(const std::string& path, const RunManifest& manifest);

nlohmann::json to_json(const SummaryStats& stats);
nlohmann::json to_json(const FitResult& fit, int layer_id);

/// Schema: experiment,algorithm,hidden_units,param_json,seed,epochs_to_threshold,reached,final_accuracy
void write_results_csv(const std::string& path, const std::vector<TrialRow>& rows);

/// Schema: run_id,t_epochs,test_accuracy
struct NamedCurve {
  std::string run_id;
  const std::vector<CurvePoint>* curve;
};
void write_curves_csv(const std::string& path, const std::vector<NamedCurve>& curves);

void write_json(const std::string& path, const nlohmann::json& doc);
void write_text(const std::string& path, const std::string& text);

}  // namespace dlrlab
