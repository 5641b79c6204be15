#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlrlab/trainer.hpp"

namespace dlrlab {

/// One point of a hyperparameter grid; key order is canonical (sorted) so
/// ties in grid selection break lexicographically.
using ParamPoint = std::map<std::string, double>;

struct ParamGrid {
  std::map<std::string, std::vector<double>> axes;
};

/// Cartesian product in canonical order (sorted keys, ascending values).
std::vector<ParamPoint> expand_grid(const ParamGrid& grid);

OptimizerConfig apply_params(OptimizerConfig base, const ParamPoint& params);

/// Compact JSON text of a grid point, e.g. {"alpha":10,"eta0":1}.
std::string param_json(const ParamPoint& params);

/// Scan defaults per algorithm; override with a grid file when scanning.
ParamGrid default_grid(Algorithm algo);

/// Flat per-trial record for the results CSV.
struct TrialRow {
  std::string experiment;
  Algorithm algo = Algorithm::Sgd;
  std::size_t hidden = 0;
  ParamPoint params;
  std::uint64_t seed = 0;
  std::optional<double> epochs_to_threshold;
  double final_accuracy = 0.0;
};

// ---------------------------------------------------------------------------
// Grid selection: run every grid point over every seed and keep the point
// with the fewest failures, then the lowest mean epochs-to-threshold, ties
// broken by canonical parameter order. Exhaustive, so permuting the grid
// never changes the winner.
// ---------------------------------------------------------------------------
struct GridSelection {
  ParamPoint best;
  std::vector<TrialRecord> best_records;  // one per seed, seed order
  std::size_t best_reached = 0;
  std::vector<TrialRow> rows;  // every trial that ran
};

GridSelection select_best(Algorithm algo, const ParamGrid& grid, std::size_t hidden,
                          const TrialConfig& base, const std::vector<std::uint64_t>& seeds,
                          const Dataset& train, const Dataset& test, int workers,
                          const std::string& experiment_name);

// ---------------------------------------------------------------------------
// Training-speed comparison across algorithms and hidden-layer sizes.
// ---------------------------------------------------------------------------
struct SpeedSpec {
  std::vector<Algorithm> algorithms;
  std::map<Algorithm, ParamGrid> grids;  // default_grid(algo) when absent
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> seeds;
  TrialConfig base;  // batch, threshold, budget, eval cadence
  int workers = 1;
};

struct SpeedCell {
  Algorithm algo = Algorithm::Sgd;
  std::size_t hidden = 0;
  ParamPoint best_params;
  std::optional<SummaryStats> epochs;  // over seeds that reached; absent if none
  std::size_t not_reached = 0;
  std::optional<double> ratio_to_sgd;  // mean / SGD mean at the same size
};

struct SpeedResult {
  std::vector<SpeedCell> cells;  // algorithm-major, then size
  std::vector<TrialRow> rows;
};

SpeedResult speed_comparison(const SpeedSpec& spec, const Dataset& train, const Dataset& test);

// ---------------------------------------------------------------------------
// Minimal-network-size scan: shrink the hidden layer until training fails.
// A size succeeds when at least half of the seeds reach the threshold within
// budget under that size's best grid point.
// ---------------------------------------------------------------------------
struct MinSizeSpec {
  Algorithm algo = Algorithm::Sgd;
  ParamGrid grid;
  std::size_t start_size = 48;
  std::size_t size_step = 4;
  std::vector<std::uint64_t> seeds;
  TrialConfig base;
  int workers = 1;
};

struct SizeOutcome {
  std::size_t hidden = 0;
  ParamPoint best_params;
  std::size_t reached = 0;
  std::size_t runs = 0;
  bool success = false;
};

struct MinSizeResult {
  Algorithm algo = Algorithm::Sgd;
  bool start_failed = false;
  std::optional<std::size_t> minimal_size;       // smallest succeeding size (majority vote)
  std::optional<SummaryStats> per_seed_minimal;  // per-seed smallest reached size
  std::vector<SizeOutcome> outcomes;
  std::vector<TrialRow> rows;
};

MinSizeResult min_size_scan(const MinSizeSpec& spec, const Dataset& train, const Dataset& test);

// ---------------------------------------------------------------------------
// Replay experiment: train with DLR, fit each layer's mean-rate trace to the
// schedule family, then train fresh networks that follow the fitted uniform
// per-layer schedules. Pairs are matched by seed.
// ---------------------------------------------------------------------------
struct ReplaySpec {
  TrialConfig dlr;  // opt.algo must be dlr-pre or dlr-post
  std::vector<std::uint64_t> seeds;
  int workers = 1;
};

struct ReplayPair {
  TrialRecord dlr_run;
  FitResult fit1, fit2;
  TrialRecord replay_run;
};

struct ReplayResult {
  std::vector<ReplayPair> pairs;
  std::optional<SummaryStats> dlr_epochs, replay_epochs;  // over reached runs
  std::size_t dlr_not_reached = 0, replay_not_reached = 0;
  std::vector<CurvePoint> dlr_median_curve, replay_median_curve;
  std::vector<TrialRow> rows;
};

ReplayResult replay_experiment(const ReplaySpec& spec, const Dataset& train, const Dataset& test);

/// Deterministic fresh seed for the replay cohort, derived from the DLR seed.
std::uint64_t replay_seed(std::uint64_t dlr_seed);

}  // namespace dlrlab
