#include "dlrlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dlrlab/rng.hpp"
#include "json.hpp"

namespace dlrlab {

std::vector<ParamPoint> expand_grid(const ParamGrid& grid) {
  std::vector<std::pair<std::string, std::vector<double>>> axes(grid.axes.begin(),
                                                                grid.axes.end());
  for (auto& [key, values] : axes) {
    if (values.empty()) throw std::invalid_argument("grid axis '" + key + "' is empty");
    std::sort(values.begin(), values.end());
  }
  std::vector<ParamPoint> points{{}};
  for (const auto& [key, values] : axes) {
    std::vector<ParamPoint> next;
    next.reserve(points.size() * values.size());
    for (const auto& point : points)
      for (double v : values) {
        ParamPoint p = point;
        p[key] = v;
        next.push_back(std::move(p));
      }
    points = std::move(next);
  }
  return points;
}

OptimizerConfig apply_params(OptimizerConfig base, const ParamPoint& params) {
  for (const auto& [key, value] : params) set_param(base, key, value);
  return base;
}

std::string param_json(const ParamPoint& params) {
  nlohmann::json obj = nlohmann::json::object();
  for (const auto& [key, value] : params) obj[key] = value;
  return obj.dump();
}

ParamGrid default_grid(Algorithm algo) {
  const std::vector<double> rates{0.03, 0.1, 0.3, 1.0, 3.0};
  switch (algo) {
    case Algorithm::Sgd: return {{{"eta", rates}}};
    case Algorithm::Nesterov: return {{{"eta", rates}, {"mu", {0.5, 0.9, 0.99}}}};
    case Algorithm::Adam:
      return {{{"adam_alpha", {1e-4, 3e-4, 1e-3, 3e-3}}, {"epsilon", {1e-8, 1e-4, 1e-2}}}};
    case Algorithm::DlrPre:
    case Algorithm::DlrPost: return {{{"eta0", rates}, {"alpha", {1.0, 3.0, 10.0, 30.0}}}};
    case Algorithm::Scheduled: return {};
  }
  throw std::logic_error("default_grid: bad Algorithm");
}

namespace {

TrialRow make_row(const std::string& experiment, Algorithm algo, std::size_t hidden,
                  const ParamPoint& params, const TrialRecord& rec) {
  return TrialRow{experiment,  algo,
                  hidden,      params,
                  rec.config.seed, rec.epochs_to_threshold,
                  rec.final_accuracy};
}

struct PointScore {
  std::size_t failures = 0;
  double mean_epochs = std::numeric_limits<double>::infinity();

  bool better_than(const PointScore& o) const {
    if (failures != o.failures) return failures < o.failures;
    return mean_epochs < o.mean_epochs;
  }
};

PointScore score_records(const std::vector<TrialRecord>& records) {
  PointScore s;
  std::vector<double> reached;
  for (const auto& r : records) {
    if (r.reached()) reached.push_back(*r.epochs_to_threshold);
    else ++s.failures;
  }
  if (!reached.empty()) s.mean_epochs = summarize(reached).mean;
  return s;
}

}  // namespace

GridSelection select_best(Algorithm algo, const ParamGrid& grid, std::size_t hidden,
                          const TrialConfig& base, const std::vector<std::uint64_t>& seeds,
                          const Dataset& train, const Dataset& test, int workers,
                          const std::string& experiment_name) {
  if (seeds.empty()) throw std::invalid_argument("select_best: no seeds");
  const auto points = expand_grid(grid);
  if (points.empty()) throw std::invalid_argument("select_best: empty grid");

  std::vector<TrialConfig> configs;
  configs.reserve(points.size() * seeds.size());
  for (const auto& point : points)
    for (const auto seed : seeds) {
      TrialConfig cfg = base;
      cfg.hidden_units = hidden;
      cfg.opt = apply_params(base.opt, point);
      cfg.opt.algo = algo;
      cfg.seed = seed;
      configs.push_back(std::move(cfg));
    }
  const auto records = run_trials(configs, train, test, workers);

  GridSelection sel;
  PointScore best_score;
  bool have_best = false;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<TrialRecord> point_records(records.begin() + static_cast<std::ptrdiff_t>(p * seeds.size()),
                                           records.begin() + static_cast<std::ptrdiff_t>((p + 1) * seeds.size()));
    for (const auto& rec : point_records)
      sel.rows.push_back(make_row(experiment_name, algo, hidden, points[p], rec));
    const auto score = score_records(point_records);
    if (!have_best || score.better_than(best_score)) {
      have_best = true;
      best_score = score;
      sel.best = points[p];
      sel.best_records = std::move(point_records);
      sel.best_reached = seeds.size() - score.failures;
    }
  }
  return sel;
}

SpeedResult speed_comparison(const SpeedSpec& spec, const Dataset& train, const Dataset& test) {
  if (spec.sizes.empty()) throw std::invalid_argument("speed_comparison: no sizes");
  if (spec.algorithms.empty()) throw std::invalid_argument("speed_comparison: no algorithms");

  SpeedResult result;
  // SGD means per size, for the ratio column.
  std::map<std::size_t, double> sgd_mean;

  for (const auto algo : spec.algorithms) {
    const auto grid_it = spec.grids.find(algo);
    const ParamGrid grid = grid_it != spec.grids.end() ? grid_it->second : default_grid(algo);
    for (const auto hidden : spec.sizes) {
      auto sel = select_best(algo, grid, hidden, spec.base, spec.seeds, train, test, spec.workers,
                             "speed");
      SpeedCell cell;
      cell.algo = algo;
      cell.hidden = hidden;
      cell.best_params = sel.best;
      std::vector<double> reached;
      for (const auto& rec : sel.best_records)
        if (rec.reached()) reached.push_back(*rec.epochs_to_threshold);
      cell.not_reached = sel.best_records.size() - reached.size();
      if (!reached.empty()) cell.epochs = summarize(reached);
      if (algo == Algorithm::Sgd && cell.epochs) sgd_mean[hidden] = cell.epochs->mean;
      result.cells.push_back(std::move(cell));
      for (auto& row : sel.rows) result.rows.push_back(std::move(row));
    }
  }
  for (auto& cell : result.cells) {
    const auto it = sgd_mean.find(cell.hidden);
    if (cell.epochs && it != sgd_mean.end()) cell.ratio_to_sgd = cell.epochs->mean / it->second;
  }
  return result;
}

MinSizeResult min_size_scan(const MinSizeSpec& spec, const Dataset& train, const Dataset& test) {
  if (spec.start_size == 0) throw std::invalid_argument("min_size_scan: start_size must be >= 1");
  if (spec.size_step == 0) throw std::invalid_argument("min_size_scan: size_step must be >= 1");

  MinSizeResult result;
  result.algo = spec.algo;

  // seed -> records per evaluated size, for per-seed minima
  std::map<std::uint64_t, std::map<std::size_t, bool>> seed_reached;

  const auto evaluate = [&](std::size_t hidden) -> SizeOutcome {
    auto sel = select_best(spec.algo, spec.grid, hidden, spec.base, spec.seeds, train, test,
                           spec.workers, "minsize");
    SizeOutcome outcome;
    outcome.hidden = hidden;
    outcome.best_params = sel.best;
    outcome.runs = sel.best_records.size();
    outcome.reached = sel.best_reached;
    outcome.success = 2 * outcome.reached >= spec.seeds.size();
    for (std::size_t s = 0; s < spec.seeds.size(); ++s)
      seed_reached[spec.seeds[s]][hidden] = sel.best_records[s].reached();
    for (auto& row : sel.rows) result.rows.push_back(std::move(row));
    return outcome;
  };

  auto outcome = evaluate(spec.start_size);
  const bool start_ok = outcome.success;
  result.outcomes.push_back(outcome);
  if (!start_ok) {
    result.start_failed = true;
    return result;
  }

  std::size_t current = spec.start_size;
  while (current > spec.size_step) {
    const std::size_t next = current - spec.size_step;
    outcome = evaluate(next);
    result.outcomes.push_back(outcome);
    if (!outcome.success) break;
    current = next;
  }
  result.minimal_size = current;

  std::vector<double> per_seed;
  for (const auto& [seed, by_size] : seed_reached) {
    std::optional<std::size_t> smallest;
    for (const auto& [size, reached] : by_size)
      if (reached && (!smallest || size < *smallest)) smallest = size;
    if (smallest) per_seed.push_back(static_cast<double>(*smallest));
  }
  if (!per_seed.empty()) result.per_seed_minimal = summarize(per_seed);
  return result;
}

std::uint64_t replay_seed(std::uint64_t dlr_seed) { return derive_seed(dlr_seed, 0x7265706c61ULL); }

ReplayResult replay_experiment(const ReplaySpec& spec, const Dataset& train, const Dataset& test) {
  if (!is_dlr(spec.dlr.opt.algo))
    throw std::invalid_argument("replay_experiment: the probe cohort must use a dlr algorithm");
  if (spec.seeds.empty()) throw std::invalid_argument("replay_experiment: no seeds");

  std::vector<TrialConfig> dlr_configs;
  dlr_configs.reserve(spec.seeds.size());
  for (const auto seed : spec.seeds) {
    TrialConfig cfg = spec.dlr;
    cfg.seed = seed;
    dlr_configs.push_back(std::move(cfg));
  }
  const auto dlr_records = run_trials(dlr_configs, train, test, spec.workers);

  ReplayResult result;
  std::vector<TrialConfig> replay_configs;
  std::vector<std::pair<FitResult, FitResult>> fits;
  for (const auto& rec : dlr_records) {
    if (rec.traces.size() != 2) throw std::logic_error("replay_experiment: missing rate traces");
    FitResult f1 = fit_schedule(rec.traces[0]);
    FitResult f2 = fit_schedule(rec.traces[1]);
    if (!f1.converged || !f2.converged)
      throw std::runtime_error(
          "replay_experiment: schedule fit did not converge (layer " +
          std::string(!f1.converged ? "1" : "2") + ", seed " + std::to_string(rec.config.seed) +
          ", sse " + std::to_string(!f1.converged ? f1.sse : f2.sse) + ")");
    TrialConfig cfg = spec.dlr;
    cfg.opt.algo = Algorithm::Scheduled;
    cfg.opt.sched1 = f1.params;
    cfg.opt.sched2 = f2.params;
    cfg.seed = replay_seed(rec.config.seed);
    replay_configs.push_back(std::move(cfg));
    fits.emplace_back(std::move(f1), std::move(f2));
  }
  const auto replay_records = run_trials(replay_configs, train, test, spec.workers);

  std::vector<double> dlr_reached, replay_reached;
  for (std::size_t i = 0; i < dlr_records.size(); ++i) {
    const auto& d = dlr_records[i];
    const auto& r = replay_records[i];
    if (d.reached()) dlr_reached.push_back(*d.epochs_to_threshold);
    else ++result.dlr_not_reached;
    if (r.reached()) replay_reached.push_back(*r.epochs_to_threshold);
    else ++result.replay_not_reached;
    result.rows.push_back(make_row("replay-dlr", d.config.opt.algo, d.config.hidden_units, {}, d));
    result.rows.push_back(
        make_row("replay-scheduled", Algorithm::Scheduled, r.config.hidden_units, {}, r));
    result.pairs.push_back(ReplayPair{d, fits[i].first, fits[i].second, r});
  }
  if (!dlr_reached.empty()) result.dlr_epochs = summarize(dlr_reached);
  if (!replay_reached.empty()) result.replay_epochs = summarize(replay_reached);
  result.dlr_median_curve = median_curve(dlr_records);
  result.replay_median_curve = median_curve(replay_records);
  return result;
}

}  // namespace dlrlab
