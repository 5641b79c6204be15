#include "dlrlab/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dlrlab {

void TrialConfig::validate() const {
  if (hidden_units == 0) throw std::invalid_argument("trial: hidden_units must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("trial: batch_size must be >= 1");
  if (threshold < 0.0 || threshold >= 1.0)
    throw std::invalid_argument("trial: threshold must lie in [0,1)");
  if (max_epochs < 0.0) throw std::invalid_argument("trial: max_epochs must be >= 0");
  if (eval_interval == 0) throw std::invalid_argument("trial: eval_interval must be >= 1");
  opt.validate();
}

TrialRecord train_to_threshold(const TrialConfig& config, const Dataset& train,
                               const Dataset& test) {
  config.validate();
  if (train.count() == 0 || test.count() == 0)
    throw std::invalid_argument("train_to_threshold: empty dataset");

  TrialRecord out;
  out.config = config;

  Mlp net = init_mlp(config.hidden_units, InitSpec{config.seed}, train.images.pixels.cols());
  auto optimizer = make_optimizer(config.opt, net);

  const bool dlr = is_dlr(config.opt.algo);
  if (dlr) {
    out.traces = {RateTrace{1, {}, {}}, RateTrace{2, {}, {}}};
    out.warning = dlr_alpha_warning(net, config.opt.dlr_config());
  }
  if (config.opt.algo == Algorithm::Scheduled) {
    if (!schedule_positive_over(config.opt.sched1, config.max_epochs) ||
        !schedule_positive_over(config.opt.sched2, config.max_epochs))
      throw std::domain_error("train_to_threshold: schedule is not positive over the epoch budget");
  }

  const double count = static_cast<double>(train.count());
  Matrix x, y;
  std::uint64_t updates = 0;
  bool done = false;

  for (std::uint64_t epoch = 0; !done; ++epoch) {
    const auto batches = make_batches(train, config.batch_size, config.seed, epoch);
    for (const auto& batch : batches) {
      const double t_now = static_cast<double>(updates) * static_cast<double>(config.batch_size) / count;
      if (t_now >= config.max_epochs) {
        done = true;
        break;
      }
      gather_batch(train, batch, x, y);
      optimizer->step(net, x, y, t_now);
      ++updates;
      if (updates % config.eval_interval == 0) {
        const double t = static_cast<double>(updates) * static_cast<double>(config.batch_size) / count;
        const double acc = accuracy(net, test);
        out.curve.push_back({t, acc});
        if (dlr) {
          record(out.traces[0], t, *optimizer->last_rates(1));
          record(out.traces[1], t, *optimizer->last_rates(2));
        }
        if (acc >= config.threshold) {
          out.epochs_to_threshold = t;
          done = true;
          break;
        }
      }
    }
  }

  out.final_accuracy = out.curve.empty() ? accuracy(net, test) : out.curve.back().accuracy;
  if (config.keep_weights) out.final_net = std::move(net);
  return out;
}

std::vector<TrialRecord> run_trials(const std::vector<TrialConfig>& configs, const Dataset& train,
                                    const Dataset& test, int workers) {
  std::vector<TrialRecord> records(configs.size());
  if (workers <= 1 || configs.size() <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i)
      records[i] = train_to_threshold(configs[i], train, test);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        records[i] = train_to_threshold(configs[i], train, test);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, static_cast<int>(configs.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

SummaryStats summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  SummaryStats stats;
  stats.count = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  stats.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  stats.median = median_of(values);
  return stats;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median_of: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<CurvePoint> median_curve(const std::vector<const TrialRecord*>& records) {
  if (records.empty()) throw std::invalid_argument("median_curve: no records");
  std::size_t common = records[0]->curve.size();
  for (const auto* r : records) common = std::min(common, r->curve.size());
  std::vector<CurvePoint> out;
  out.reserve(common);
  std::vector<double> column(records.size());
  for (std::size_t i = 0; i < common; ++i) {
    const double t = records[0]->curve[i].t;
    for (std::size_t r = 0; r < records.size(); ++r) {
      if (records[r]->curve[i].t != t)
        throw std::invalid_argument("median_curve: records use different checkpoint grids");
      column[r] = records[r]->curve[i].accuracy;
    }
    out.push_back({t, median_of(column)});
  }
  return out;
}

std::vector<CurvePoint> median_curve(const std::vector<TrialRecord>& records) {
  std::vector<const TrialRecord*> ptrs;
  ptrs.reserve(records.size());
  for (const auto& r : records) ptrs.push_back(&r);
  return median_curve(ptrs);
}

}  // namespace dlrlab
