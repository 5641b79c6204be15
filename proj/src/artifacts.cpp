#include "dlrlab/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace dlrlab {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

nlohmann::json to_json(const RunManifest& manifest) {
  nlohmann::json doc;
  doc["command"] = manifest.command;
  doc["config_file"] = manifest.config_file ? nlohmann::json(*manifest.config_file)
                                            : nlohmann::json(nullptr);
  doc["resolved_config"] = manifest.resolved_config;
  doc["data_paths"] = manifest.data_paths;
  doc["output_dir"] = manifest.output_dir;
  doc["seeds"] = manifest.seeds;
  doc["tool_version"] = manifest.tool_version;
  return doc;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  write_json(path, to_json(manifest));
}

nlohmann::json to_json(const SummaryStats& stats) {
  nlohmann::json doc;
  doc["mean"] = stats.mean;
  doc["std"] = stats.stddev ? nlohmann::json(*stats.stddev) : nlohmann::json(nullptr);
  doc["median"] = stats.median;
  doc["count"] = stats.count;
  return doc;
}

nlohmann::json to_json(const FitResult& fit, int layer_id) {
  nlohmann::json doc;
  doc["layer_id"] = layer_id;
  doc["a"] = fit.params.a;
  doc["b"] = fit.params.b;
  doc["c"] = fit.params.c;
  doc["d"] = fit.params.d;
  doc["sse"] = fit.sse;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  return doc;
}

void write_results_csv(const std::string& path, const std::vector<TrialRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << "experiment,algorithm,hidden_units,param_json,seed,epochs_to_threshold,reached,"
         "final_accuracy\n";
  for (const auto& row : rows) {
    out << row.experiment << ',' << to_string(row.algo) << ',' << row.hidden << ','
        << csv_quote(param_json(row.params)) << ',' << row.seed << ',';
    if (row.epochs_to_threshold) out << format_double(*row.epochs_to_threshold);
    out << ',' << (row.epochs_to_threshold ? "true" : "false") << ','
        << format_double(row.final_accuracy) << '\n';
  }
}

void write_curves_csv(const std::string& path, const std::vector<NamedCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << "run_id,t_epochs,test_accuracy\n";
  for (const auto& named : curves)
    for (const auto& point : *named.curve)
      out << csv_quote(named.run_id) << ',' << format_double(point.t) << ','
          << format_double(point.accuracy) << '\n';
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << doc.dump(2) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << text;
}

}  // namespace dlrlab
