#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlrlab/idx.hpp"
#include "dlrlab/mlp.hpp"
#include "dlrlab/optimizers.hpp"
#include "dlrlab/rate_trace.hpp"

namespace dlrlab {

struct TrialConfig {
  std::size_t hidden_units = 100;
  OptimizerConfig opt;
  std::size_t batch_size = 10;
  double threshold = 0.96;      // test accuracy to reach; 0 makes the first checkpoint succeed
  double max_epochs = 30.0;     // training budget in fractional epochs
  std::size_t eval_interval = 100;  // minibatch updates between test evaluations
  std::uint64_t seed = 1;
  bool keep_weights = false;

  void validate() const;
};

struct CurvePoint {
  double t = 0.0;  // fractional epochs
  double accuracy = 0.0;
};

struct TrialRecord {
  TrialConfig config;
  std::vector<CurvePoint> curve;
  std::optional<double> epochs_to_threshold;  // empty = not reached within budget
  std::vector<RateTrace> traces;              // layers 1 and 2, DLR runs only
  std::optional<Mlp> final_net;               // kept when config.keep_weights
  double final_accuracy = 0.0;
  std::optional<std::string> warning;

  bool reached() const { return epochs_to_threshold.has_value(); }
};

/// Seeded minibatch training until test accuracy first reaches the threshold
/// or the epoch budget runs out. Evaluates every eval_interval updates at
/// t = updates * batch_size / train_count epochs; DLR runs also record the
/// per-layer mean rate at each checkpoint.
TrialRecord train_to_threshold(const TrialConfig& config, const Dataset& train,
                               const Dataset& test);

/// Runs trials on a worker pool. Results are positional, so parallel and
/// sequential execution produce the identical result set.
std::vector<TrialRecord> run_trials(const std::vector<TrialConfig>& configs, const Dataset& train,
                                    const Dataset& test, int workers);

struct SummaryStats {
  double mean = 0.0;
  std::optional<double> stddev;  // sample (n-1); absent when count == 1
  double median = 0.0;
  std::size_t count = 0;
};

/// Mean / sample std / median of a nonempty value list.
SummaryStats summarize(const std::vector<double>& values);

double median_of(std::vector<double> values);

/// Pointwise median across runs, truncated at the last checkpoint all runs
/// share. The records must have been evaluated on the same checkpoint grid.
std::vector<CurvePoint> median_curve(const std::vector<const TrialRecord*>& records);
std::vector<CurvePoint> median_curve(const std::vector<TrialRecord>& records);

}  // namespace dlrlab
