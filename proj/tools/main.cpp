// dlrlab: train-to-threshold benchmarks for per-synapse dynamic learning
// rates against sgd / nesterov / adam baselines on MNIST.
//
// Exit codes: 0 success, 1 usage or data error, 2 experiment goal not met.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlrlab/artifacts.hpp"
#include "dlrlab/experiments.hpp"
#include "dlrlab/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dlrlab;

namespace {

struct CommonFlags {
  std::string data_dir;
  std::string out_dir = "dlrlab-out";
  int workers = 1;
  std::string algo = "dlr-pre";
  std::size_t hidden = 100;
  std::size_t batch = 10;
  double threshold = 0.96;
  double max_epochs = 30.0;
  std::size_t eval_interval = 100;
  OptimizerConfig opt;
  std::string grid_file;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 1;
  std::size_t runs = 10;
};

void add_common_options(CLI::App* cmd, CommonFlags& flags) {
  cmd->set_config("--config", "", "Flat key=value config file; flags override");
  cmd->add_option("--data-dir", flags.data_dir,
                  "Directory with the four MNIST IDX files (env DLRLAB_DATA_DIR)")
      ->envname("DLRLAB_DATA_DIR");
  cmd->add_option("--out", flags.out_dir, "Output directory for artifacts");
  cmd->add_option("--workers", flags.workers, "Parallel trial workers")->check(CLI::PositiveNumber);
  cmd->add_option("--batch", flags.batch, "Minibatch size")->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", flags.threshold, "Test accuracy to reach")
      ->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--max-epochs", flags.max_epochs, "Training budget in epochs")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--eval-interval", flags.eval_interval, "Updates between test evaluations")
      ->check(CLI::PositiveNumber);
}

void add_optimizer_options(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--eta", flags.opt.eta, "sgd/nesterov learning rate");
  cmd->add_option("--mu", flags.opt.mu, "nesterov momentum");
  cmd->add_option("--adam-alpha", flags.opt.adam_alpha, "adam step size");
  cmd->add_option("--beta1", flags.opt.beta1, "adam beta1");
  cmd->add_option("--beta2", flags.opt.beta2, "adam beta2");
  cmd->add_option("--epsilon", flags.opt.epsilon, "adam epsilon");
  cmd->add_option("--eta0", flags.opt.eta0, "dlr base rate");
  cmd->add_option("--alpha", flags.opt.alpha, "dlr additive constant");
}

std::vector<std::uint64_t> resolve_seeds(const CommonFlags& flags) {
  if (!flags.seeds.empty()) return flags.seeds;
  std::vector<std::uint64_t> seeds(flags.runs);
  for (std::size_t i = 0; i < flags.runs; ++i) seeds[i] = flags.seed + i;
  return seeds;
}

TrialConfig base_trial(const CommonFlags& flags) {
  TrialConfig cfg;
  cfg.hidden_units = flags.hidden;
  cfg.opt = flags.opt;
  cfg.opt.algo = algorithm_from_string(flags.algo);
  cfg.batch_size = flags.batch;
  cfg.threshold = flags.threshold;
  cfg.max_epochs = flags.max_epochs;
  cfg.eval_interval = flags.eval_interval;
  cfg.seed = flags.seed;
  return cfg;
}

json config_json(const TrialConfig& cfg) {
  json doc;
  doc["algorithm"] = to_string(cfg.opt.algo);
  doc["hidden_units"] = cfg.hidden_units;
  doc["batch_size"] = cfg.batch_size;
  doc["threshold"] = cfg.threshold;
  doc["max_epochs"] = cfg.max_epochs;
  doc["eval_interval"] = cfg.eval_interval;
  doc["eta"] = cfg.opt.eta;
  doc["mu"] = cfg.opt.mu;
  doc["adam_alpha"] = cfg.opt.adam_alpha;
  doc["beta1"] = cfg.opt.beta1;
  doc["beta2"] = cfg.opt.beta2;
  doc["epsilon"] = cfg.opt.epsilon;
  doc["eta0"] = cfg.opt.eta0;
  doc["alpha"] = cfg.opt.alpha;
  doc["sched1"] = {cfg.opt.sched1.a, cfg.opt.sched1.b, cfg.opt.sched1.c, cfg.opt.sched1.d};
  doc["sched2"] = {cfg.opt.sched2.a, cfg.opt.sched2.b, cfg.opt.sched2.c, cfg.opt.sched2.d};
  return doc;
}

struct LoadedData {
  Dataset train, test;
  MnistPaths paths;
};

LoadedData load_data(const CommonFlags& flags) {
  if (flags.data_dir.empty())
    throw std::runtime_error("no data directory given (use --data-dir or DLRLAB_DATA_DIR)");
  const auto paths = mnist_paths(flags.data_dir);
  for (const auto& p :
       {paths.train_images, paths.train_labels, paths.test_images, paths.test_labels})
    if (!fs::exists(p)) throw std::runtime_error("missing MNIST file: " + p);
  return LoadedData{load_mnist_train(flags.data_dir), load_mnist_test(flags.data_dir), paths};
}

RunManifest make_manifest(const std::string& command, const CommonFlags& flags,
                          const std::optional<std::string>& config_file, json resolved,
                          const std::vector<std::uint64_t>& seeds) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config_file = config_file;
  manifest.resolved_config = std::move(resolved);
  const auto paths = mnist_paths(flags.data_dir);
  manifest.data_paths = {{"train_images", paths.train_images},
                         {"train_labels", paths.train_labels},
                         {"test_images", paths.test_images},
                         {"test_labels", paths.test_labels}};
  manifest.output_dir = flags.out_dir;
  manifest.seeds = seeds;
  manifest.tool_version = kVersion;
  return manifest;
}

std::map<Algorithm, ParamGrid> load_grids(const std::string& path) {
  std::map<Algorithm, ParamGrid> grids;
  if (path.empty()) return grids;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  json doc;
  in >> doc;
  for (const auto& [name, axes] : doc.items()) {
    ParamGrid grid;
    for (const auto& [key, values] : axes.items())
      grid.axes[key] = values.get<std::vector<double>>();
    grids[algorithm_from_string(name)] = std::move(grid);
  }
  return grids;
}

std::string run_id(Algorithm algo, std::size_t hidden, std::uint64_t seed) {
  return to_string(algo) + "_h" + std::to_string(hidden) + "_seed" + std::to_string(seed);
}

// ---------------------------------------------------------------------------

int cmd_train(const CommonFlags& flags, const std::optional<std::string>& config_file) {
  auto cfg = base_trial(flags);
  cfg.keep_weights = true;
  cfg.validate();

  fs::create_directories(flags.out_dir);
  const auto manifest =
      make_manifest("train", flags, config_file, config_json(cfg), {cfg.seed});
  write_manifest(flags.out_dir + "/manifest.json", manifest);

  const auto data = load_data(flags);
  const auto rec = train_to_threshold(cfg, data.train, data.test);
  if (rec.warning) std::cerr << "warning: " << *rec.warning << "\n";

  write_curves_csv(flags.out_dir + "/curves.csv",
                   {{run_id(cfg.opt.algo, cfg.hidden_units, cfg.seed), &rec.curve}});
  if (!rec.traces.empty()) write_traces_csv(flags.out_dir + "/rate_trace.csv", rec.traces);
  if (rec.final_net) save_mlp(flags.out_dir + "/weights.txt", *rec.final_net, cfg.seed);

  json summary;
  summary["reached"] = rec.reached();
  summary["epochs_to_threshold"] =
      rec.reached() ? json(*rec.epochs_to_threshold) : json(nullptr);
  summary["final_accuracy"] = rec.final_accuracy;
  summary["checkpoints"] = rec.curve.size();
  summary["warning"] = rec.warning ? json(*rec.warning) : json(nullptr);
  write_json(flags.out_dir + "/summary.json", summary);

  std::cout << (rec.reached()
                    ? "reached " + format_double(cfg.threshold) + " at " +
                          format_double(*rec.epochs_to_threshold) + " epochs"
                    : "did not reach " + format_double(cfg.threshold) + " within " +
                          format_double(cfg.max_epochs) + " epochs")
            << " (final accuracy " << format_double(rec.final_accuracy) << ")\n";
  return rec.reached() ? 0 : 2;
}

int cmd_compare(const CommonFlags& flags, const std::vector<std::string>& algo_names,
                const std::vector<std::size_t>& sizes,
                const std::optional<std::string>& config_file) {
  if (sizes.empty()) throw CLI::ValidationError("--sizes", "at least one size is required");
  SpeedSpec spec;
  for (const auto& name : algo_names) spec.algorithms.push_back(algorithm_from_string(name));
  spec.grids = load_grids(flags.grid_file);
  spec.sizes = sizes;
  spec.seeds = resolve_seeds(flags);
  spec.base = base_trial(flags);
  spec.workers = flags.workers;

  fs::create_directories(flags.out_dir);
  json resolved = config_json(spec.base);
  resolved["algorithms"] = algo_names;
  resolved["sizes"] = sizes;
  write_manifest(flags.out_dir + "/manifest.json",
                 make_manifest("compare", flags, config_file, resolved, spec.seeds));

  const auto data = load_data(flags);
  const auto result = speed_comparison(spec, data.train, data.test);

  write_results_csv(flags.out_dir + "/results.csv", result.rows);
  {
    std::ofstream table(flags.out_dir + "/speed_table.csv");
    table << "algorithm,hidden_units,best_params,mean_epochs,std_epochs,median_epochs,"
             "not_reached,ratio_to_sgd\n";
    for (const auto& cell : result.cells) {
      table << to_string(cell.algo) << ',' << cell.hidden << ','
            << csv_quote(param_json(cell.best_params)) << ',';
      if (cell.epochs) {
        table << format_double(cell.epochs->mean) << ','
              << (cell.epochs->stddev ? format_double(*cell.epochs->stddev) : "") << ','
              << format_double(cell.epochs->median);
      } else {
        table << ",,";
      }
      table << ',' << cell.not_reached << ','
            << (cell.ratio_to_sgd ? format_double(*cell.ratio_to_sgd) : "") << '\n';
    }
  }
  json summary = json::array();
  for (const auto& cell : result.cells) {
    json entry;
    entry["algorithm"] = to_string(cell.algo);
    entry["hidden_units"] = cell.hidden;
    entry["best_params"] = json::parse(param_json(cell.best_params));
    entry["epochs"] = cell.epochs ? to_json(*cell.epochs) : json(nullptr);
    entry["not_reached"] = cell.not_reached;
    entry["ratio_to_sgd"] = cell.ratio_to_sgd ? json(*cell.ratio_to_sgd) : json(nullptr);
    summary.push_back(std::move(entry));
  }
  write_json(flags.out_dir + "/summary.json", summary);

  bool any_reached = false;
  for (const auto& cell : result.cells) any_reached |= cell.epochs.has_value();
  std::cout << "wrote " << result.cells.size() << " table rows to " << flags.out_dir << "\n";
  return any_reached ? 0 : 2;
}

int cmd_minsize(const CommonFlags& flags, const std::vector<std::string>& algo_names,
                std::size_t start_size, std::size_t size_step,
                const std::optional<std::string>& config_file) {
  const auto grids = load_grids(flags.grid_file);
  const auto seeds = resolve_seeds(flags);

  fs::create_directories(flags.out_dir);
  json resolved = config_json(base_trial(flags));
  resolved["algorithms"] = algo_names;
  resolved["start_size"] = start_size;
  resolved["size_step"] = size_step;
  write_manifest(flags.out_dir + "/manifest.json",
                 make_manifest("minsize", flags, config_file, resolved, seeds));

  const auto data = load_data(flags);

  std::vector<MinSizeResult> results;
  std::vector<TrialRow> all_rows;
  for (const auto& name : algo_names) {
    MinSizeSpec spec;
    spec.algo = algorithm_from_string(name);
    const auto it = grids.find(spec.algo);
    spec.grid = it != grids.end() ? it->second : default_grid(spec.algo);
    spec.start_size = start_size;
    spec.size_step = size_step;
    spec.seeds = seeds;
    spec.base = base_trial(flags);
    spec.workers = flags.workers;
    auto result = min_size_scan(spec, data.train, data.test);
    for (auto& row : result.rows) all_rows.push_back(std::move(row));
    result.rows.clear();
    results.push_back(std::move(result));
  }

  write_results_csv(flags.out_dir + "/results.csv", all_rows);
  json summary = json::array();
  bool any_start_failed = false;
  for (const auto& result : results) {
    json entry;
    entry["algorithm"] = to_string(result.algo);
    entry["start_failed"] = result.start_failed;
    entry["minimal_size"] =
        result.minimal_size ? json(*result.minimal_size) : json(nullptr);
    entry["per_seed_minimal"] =
        result.per_seed_minimal ? to_json(*result.per_seed_minimal) : json(nullptr);
    json sizes = json::array();
    for (const auto& outcome : result.outcomes) {
      json o;
      o["hidden_units"] = outcome.hidden;
      o["best_params"] = json::parse(param_json(outcome.best_params));
      o["reached"] = outcome.reached;
      o["runs"] = outcome.runs;
      o["success"] = outcome.success;
      sizes.push_back(std::move(o));
    }
    entry["sizes"] = std::move(sizes);
    summary.push_back(std::move(entry));
    any_start_failed |= result.start_failed;
    std::cout << to_string(result.algo) << ": "
              << (result.start_failed
                      ? "start size fails"
                      : "minimal size " + std::to_string(*result.minimal_size))
              << "\n";
  }
  write_json(flags.out_dir + "/summary.json", summary);
  return any_start_failed ? 2 : 0;
}

int cmd_replay(const CommonFlags& flags, const std::optional<std::string>& config_file) {
  ReplaySpec spec;
  spec.dlr = base_trial(flags);
  if (!is_dlr(spec.dlr.opt.algo)) spec.dlr.opt.algo = Algorithm::DlrPre;
  spec.seeds = resolve_seeds(flags);
  spec.workers = flags.workers;

  fs::create_directories(flags.out_dir);
  write_manifest(flags.out_dir + "/manifest.json",
                 make_manifest("replay", flags, config_file, config_json(spec.dlr), spec.seeds));

  const auto data = load_data(flags);
  ReplayResult result;
  try {
    result = replay_experiment(spec, data.train, data.test);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.find("fit") != std::string::npos) {
      std::cerr << "error: " << what << "\n";
      return 2;
    }
    throw;
  }

  std::vector<NamedCurve> curves;
  std::vector<RateTrace> traces;
  json fits = json::array();
  for (const auto& pair : result.pairs) {
    curves.push_back({"dlr_seed" + std::to_string(pair.dlr_run.config.seed),
                      &pair.dlr_run.curve});
    curves.push_back({"replay_seed" + std::to_string(pair.replay_run.config.seed),
                      &pair.replay_run.curve});
    for (const auto& trace : pair.dlr_run.traces) traces.push_back(trace);
    json entry;
    entry["dlr_seed"] = pair.dlr_run.config.seed;
    entry["layer1"] = to_json(pair.fit1, 1);
    entry["layer2"] = to_json(pair.fit2, 2);
    fits.push_back(std::move(entry));
  }
  write_curves_csv(flags.out_dir + "/curves.csv", curves);
  write_curves_csv(flags.out_dir + "/median_curves.csv",
                   {{"dlr_median", &result.dlr_median_curve},
                    {"replay_median", &result.replay_median_curve}});
  write_traces_csv(flags.out_dir + "/rate_traces.csv", traces);
  write_results_csv(flags.out_dir + "/results.csv", result.rows);
  write_json(flags.out_dir + "/fits.json", fits);

  json summary;
  summary["dlr"] = result.dlr_epochs ? to_json(*result.dlr_epochs) : json(nullptr);
  summary["replay"] = result.replay_epochs ? to_json(*result.replay_epochs) : json(nullptr);
  summary["dlr_not_reached"] = result.dlr_not_reached;
  summary["replay_not_reached"] = result.replay_not_reached;
  summary["degenerate_stats"] = spec.seeds.size() < 2;
  const bool ordered = result.dlr_epochs && result.replay_epochs &&
                       result.dlr_epochs->median < result.replay_epochs->median;
  summary["dlr_median_below_replay_median"] = ordered;
  write_json(flags.out_dir + "/summary.json", summary);

  if (result.dlr_epochs && result.replay_epochs)
    std::cout << "dlr median " << format_double(result.dlr_epochs->median) << " epochs vs replay "
              << format_double(result.replay_epochs->median) << " epochs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-synapse dynamic learning rate benchmarks on MNIST"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::string> algo_names{"sgd", "nesterov", "adam", "dlr-pre"};
  std::vector<std::size_t> sizes;
  std::size_t start_size = 48, size_step = 4;

  auto* train = app.add_subcommand("train", "Run one train-to-threshold trial");
  add_common_options(train, flags);
  add_optimizer_options(train, flags);
  train->add_option("--algo", flags.algo, "sgd|nesterov|adam|dlr-pre|dlr-post|scheduled");
  train->add_option("--hidden", flags.hidden, "Hidden units")->check(CLI::PositiveNumber);
  train->add_option("--seed", flags.seed, "Trial seed");

  auto* compare = app.add_subcommand("compare", "Training-speed comparison across algorithms");
  add_common_options(compare, flags);
  add_optimizer_options(compare, flags);
  compare->add_option("--algos", algo_names, "Algorithms to compare")->delimiter(',');
  compare->add_option("--sizes", sizes, "Hidden-layer sizes")->delimiter(',')->required();
  compare->add_option("--runs", flags.runs, "Seeds per grid point")->check(CLI::PositiveNumber);
  compare->add_option("--seeds", flags.seeds, "Explicit seed list")->delimiter(',');
  compare->add_option("--seed", flags.seed, "First seed when --seeds is absent");
  compare->add_option("--grid", flags.grid_file, "JSON grid file per algorithm");

  auto* minsize = app.add_subcommand("minsize", "Minimal hidden-layer size scan");
  add_common_options(minsize, flags);
  add_optimizer_options(minsize, flags);
  minsize->add_option("--algos", algo_names, "Algorithms to scan")->delimiter(',');
  minsize->add_option("--start-size", start_size, "Convergent starting size")
      ->check(CLI::PositiveNumber);
  minsize->add_option("--size-step", size_step, "Shrink step")->check(CLI::PositiveNumber);
  minsize->add_option("--runs", flags.runs, "Seeds per size")->check(CLI::PositiveNumber);
  minsize->add_option("--seeds", flags.seeds, "Explicit seed list")->delimiter(',');
  minsize->add_option("--seed", flags.seed, "First seed when --seeds is absent");
  minsize->add_option("--grid", flags.grid_file, "JSON grid file per algorithm");

  auto* replay = app.add_subcommand("replay", "DLR vs fitted-average-rate replay");
  add_common_options(replay, flags);
  add_optimizer_options(replay, flags);
  replay->add_option("--algo", flags.algo, "dlr-pre or dlr-post");
  replay->add_option("--hidden", flags.hidden, "Hidden units")->check(CLI::PositiveNumber);
  replay->add_option("--runs", flags.runs, "Paired runs")->check(CLI::PositiveNumber);
  replay->add_option("--seeds", flags.seeds, "Explicit seed list")->delimiter(',');
  replay->add_option("--seed", flags.seed, "First seed when --seeds is absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::optional<std::string> config_file;
  for (CLI::App* cmd : {train, compare, minsize, replay})
    if (cmd->parsed() && cmd->get_config_ptr() && !cmd->get_config_ptr()->as<std::string>().empty())
      config_file = cmd->get_config_ptr()->as<std::string>();

  try {
    if (train->parsed()) return cmd_train(flags, config_file);
    if (compare->parsed()) return cmd_compare(flags, algo_names, sizes, config_file);
    if (minsize->parsed()) return cmd_minsize(flags, algo_names, start_size, size_step, config_file);
    if (replay->parsed()) return cmd_replay(flags, config_file);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
