#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlrlab/artifacts.hpp"
#include "dlrlab/experiments.hpp"
#include "dlrlab/rng.hpp"

using namespace dlrlab;

namespace {

/// Three separable classes on a 6-pixel input: class c lights pixels 2c and
/// 2c+1 plus noise. Easy enough that every optimizer converges in a few
/// hundred updates.
Dataset blobs(std::size_t count, std::uint64_t seed) {
  Matrix pixels(count, 6);
  std::vector<std::uint8_t> labels(count);
  Rng rng(seed);
  for (std::size_t n = 0; n < count; ++n) {
    const auto cls = static_cast<std::uint8_t>(n % 3);
    labels[n] = cls;
    for (double& p : pixels.row(n)) p = rng.next_double(0.0, 0.15);
    pixels(n, 2 * cls) = rng.next_double(0.8, 1.0);
    pixels(n, 2 * cls + 1) = rng.next_double(0.8, 1.0);
  }
  ImageSet images{count, 1, 6, std::move(pixels)};
  LabelSet label_set{count, std::move(labels)};
  return make_dataset(std::move(images), std::move(label_set));
}

TrialConfig blob_config(Algorithm algo, std::uint64_t seed = 1) {
  TrialConfig cfg;
  cfg.hidden_units = 8;
  cfg.opt.algo = algo;
  cfg.opt.eta = 3.0;
  cfg.opt.eta0 = 3.0;
  cfg.opt.alpha = 3.0;
  cfg.batch_size = 10;
  cfg.threshold = 0.95;
  cfg.max_epochs = 40.0;
  cfg.eval_interval = 6;  // one checkpoint per 60 samples
  cfg.seed = seed;
  return cfg;
}

bool curves_equal(const std::vector<CurvePoint>& a, const std::vector<CurvePoint>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].t != b[i].t || a[i].accuracy != b[i].accuracy) return false;
  return true;
}

}  // namespace

TEST_CASE("train_to_threshold: zero threshold stops at the first checkpoint") {
  const auto train = blobs(120, 9);
  const auto test = blobs(60, 10);
  auto cfg = blob_config(Algorithm::Sgd);
  cfg.threshold = 0.0;
  const auto rec = train_to_threshold(cfg, train, test);
  REQUIRE(rec.curve.size() == 1);
  CHECK(rec.reached());
  CHECK(*rec.epochs_to_threshold == rec.curve[0].t);
  CHECK(rec.curve[0].t == doctest::Approx(6.0 * 10.0 / 120.0));
}

TEST_CASE("train_to_threshold: zero budget returns an empty, unreached record") {
  const auto train = blobs(120, 9);
  const auto test = blobs(60, 10);
  auto cfg = blob_config(Algorithm::Sgd);
  cfg.max_epochs = 0.0;
  const auto rec = train_to_threshold(cfg, train, test);
  CHECK(!rec.reached());
  CHECK(rec.curve.empty());
  CHECK(rec.final_accuracy >= 0.0);
}

TEST_CASE("train_to_threshold is deterministic and its record is self-consistent") {
  const auto train = blobs(300, 9);
  const auto test = blobs(150, 10);
  const auto cfg = blob_config(Algorithm::DlrPre, 4);
  const auto a = train_to_threshold(cfg, train, test);
  const auto b = train_to_threshold(cfg, train, test);
  CHECK(curves_equal(a.curve, b.curve));
  CHECK(a.epochs_to_threshold == b.epochs_to_threshold);
  REQUIRE(a.reached());

  // first crossing in the curve equals the reported epochs-to-threshold
  double first_cross = -1.0;
  for (const auto& p : a.curve)
    if (p.accuracy >= cfg.threshold) {
      first_cross = p.t;
      break;
    }
  CHECK(first_cross == *a.epochs_to_threshold);

  // DLR runs carry strictly increasing traces for both layers
  REQUIRE(a.traces.size() == 2);
  for (const auto& trace : a.traces) {
    REQUIRE(trace.size() == a.curve.size());
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) CHECK(trace.t[i] < trace.t[i + 1]);
    for (double r : trace.mean_rate) {
      CHECK(r > 0.0);
      CHECK(r <= cfg.opt.eta0);
    }
  }
}

TEST_CASE("validation rejects out-of-range trial parameters") {
  const auto train = blobs(60, 9);
  const auto test = blobs(30, 10);
  auto cfg = blob_config(Algorithm::Sgd);
  cfg.threshold = 1.5;
  CHECK_THROWS_AS(train_to_threshold(cfg, train, test), std::invalid_argument);
  cfg = blob_config(Algorithm::Sgd);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_to_threshold(cfg, train, test), std::invalid_argument);
  cfg = blob_config(Algorithm::Sgd);
  cfg.eval_interval = 0;
  CHECK_THROWS_AS(train_to_threshold(cfg, train, test), std::invalid_argument);
}

TEST_CASE("scheduled training with a constant schedule is bitwise sgd") {
  const auto train = blobs(300, 9);
  const auto test = blobs(150, 10);
  auto sgd_cfg = blob_config(Algorithm::Sgd, 7);
  auto sched_cfg = sgd_cfg;
  sched_cfg.opt.algo = Algorithm::Scheduled;
  sched_cfg.opt.sched1 = {0.0, 0.0, 0.0, sgd_cfg.opt.eta};
  sched_cfg.opt.sched2 = {0.0, 0.0, 0.0, sgd_cfg.opt.eta};
  const auto a = train_to_threshold(sgd_cfg, train, test);
  const auto b = train_to_threshold(sched_cfg, train, test);
  CHECK(curves_equal(a.curve, b.curve));
  CHECK(a.epochs_to_threshold == b.epochs_to_threshold);
}

TEST_CASE("run_trials: parallel equals sequential") {
  const auto train = blobs(300, 9);
  const auto test = blobs(150, 10);
  std::vector<TrialConfig> configs;
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    configs.push_back(blob_config(seed % 2 ? Algorithm::DlrPre : Algorithm::Sgd, seed));
  const auto seq = run_trials(configs, train, test, 1);
  const auto par = run_trials(configs, train, test, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(curves_equal(seq[i].curve, par[i].curve));
    CHECK(seq[i].epochs_to_threshold == par[i].epochs_to_threshold);
  }
}

TEST_CASE("summarize: hand arithmetic, n=1, empty") {
  const auto stats = summarize({2.0, 4.0, 6.0});
  CHECK(stats.mean == 4.0);
  REQUIRE(stats.stddev.has_value());
  CHECK(*stats.stddev == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(stats.median == 4.0);
  CHECK(stats.count == 3);

  const auto single = summarize({5.0});
  CHECK(single.mean == 5.0);
  CHECK(!single.stddev.has_value());
  CHECK(single.median == 5.0);

  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("median_curve conventions") {
  TrialRecord lo, mid, hi;
  for (int i = 1; i <= 4; ++i) {
    const double t = 0.1 * i;
    lo.curve.push_back({t, 0.1});
    mid.curve.push_back({t, 0.5});
    hi.curve.push_back({t, 0.9});
  }
  const auto one = median_curve(std::vector<TrialRecord>{mid});
  CHECK(curves_equal(one, mid.curve));

  const auto three = median_curve(std::vector<TrialRecord>{hi, lo, mid});
  for (const auto& p : three) CHECK(p.accuracy == 0.5);

  const auto two = median_curve(std::vector<TrialRecord>{lo, mid});
  for (const auto& p : two) CHECK(p.accuracy == doctest::Approx(0.3).epsilon(1e-15));

  // truncation to the shortest record
  TrialRecord shorter = mid;
  shorter.curve.resize(2);
  CHECK(median_curve(std::vector<TrialRecord>{mid, shorter}).size() == 2);

  TrialRecord offset = mid;
  offset.curve[1].t += 1e-3;
  CHECK_THROWS_AS(median_curve(std::vector<TrialRecord>{mid, offset}), std::invalid_argument);
}

TEST_CASE("expand_grid is a canonical cartesian product") {
  ParamGrid grid{{{"eta", {3.0, 1.0}}, {"mu", {0.9, 0.5}}}};
  const auto points = expand_grid(grid);
  REQUIRE(points.size() == 4);
  CHECK(points[0] == ParamPoint{{"eta", 1.0}, {"mu", 0.5}});
  CHECK(points[1] == ParamPoint{{"eta", 1.0}, {"mu", 0.9}});
  CHECK(points[2] == ParamPoint{{"eta", 3.0}, {"mu", 0.5}});
  CHECK(points[3] == ParamPoint{{"eta", 3.0}, {"mu", 0.9}});

  CHECK(param_json(points[0]) == R"({"eta":1.0,"mu":0.5})");
  CHECK_THROWS_AS(expand_grid(ParamGrid{{{"eta", {}}}}), std::invalid_argument);
}

TEST_CASE("select_best is order-independent and applies the winning params") {
  const auto train = blobs(300, 9);
  const auto test = blobs(150, 10);
  const auto base = blob_config(Algorithm::Sgd);
  const std::vector<std::uint64_t> seeds{1, 2, 3};

  ParamGrid forward{{{"eta", {0.03, 3.0}}}};
  ParamGrid backward{{{"eta", {3.0, 0.03}}}};
  const auto a = select_best(Algorithm::Sgd, forward, 8, base, seeds, train, test, 2, "t");
  const auto b = select_best(Algorithm::Sgd, backward, 8, base, seeds, train, test, 2, "t");
  CHECK(a.best == b.best);
  CHECK(a.best.at("eta") == 3.0);  // the small rate cannot converge as fast
  CHECK(a.rows.size() == 2 * seeds.size());
  CHECK(a.best_records.size() == seeds.size());
}

TEST_CASE("speed_comparison echoes single-point stats and pins the sgd ratio at 1") {
  const auto train = blobs(300, 9);
  const auto test = blobs(150, 10);
  SpeedSpec spec;
  spec.algorithms = {Algorithm::Sgd, Algorithm::DlrPre};
  spec.grids[Algorithm::Sgd] = ParamGrid{{{"eta", {3.0}}}};
  spec.grids[Algorithm::DlrPre] = ParamGrid{{{"eta0", {3.0}}, {"alpha", {3.0}}}};
  spec.sizes = {8};
  spec.seeds = {1, 2, 3};
  spec.base = blob_config(Algorithm::Sgd);
  spec.workers = 2;
  const auto result = speed_comparison(spec, train, test);
  REQUIRE(result.cells.size() == 2);
  const auto& sgd_cell = result.cells[0];
  REQUIRE(sgd_cell.epochs.has_value());
  CHECK(sgd_cell.epochs->count == 3);
  REQUIRE(sgd_cell.ratio_to_sgd.has_value());
  CHECK(*sgd_cell.ratio_to_sgd == 1.0);
  CHECK(result.rows.size() == 6);

  SpeedSpec empty = spec;
  empty.sizes = {};
  CHECK_THROWS_AS(speed_comparison(empty, train, test), std::invalid_argument);
}

TEST_CASE("min_size_scan: zero threshold reaches the floor; zero budget fails the start") {
  const auto train = blobs(120, 9);
  const auto test = blobs(60, 10);
  MinSizeSpec spec;
  spec.algo = Algorithm::Sgd;
  spec.grid = ParamGrid{{{"eta", {3.0}}}};
  spec.start_size = 5;
  spec.size_step = 2;
  spec.seeds = {1, 2};
  spec.base = blob_config(Algorithm::Sgd);
  spec.base.threshold = 0.0;
  spec.base.max_epochs = 1.0;
  spec.workers = 2;
  const auto floor_result = min_size_scan(spec, train, test);
  CHECK(!floor_result.start_failed);
  REQUIRE(floor_result.minimal_size.has_value());
  CHECK(*floor_result.minimal_size == 1);  // 5 -> 3 -> 1
  REQUIRE(floor_result.per_seed_minimal.has_value());
  CHECK(floor_result.per_seed_minimal->mean == 1.0);

  spec.base.threshold = 0.9;
  spec.base.max_epochs = 0.0;
  const auto failed = min_size_scan(spec, train, test);
  CHECK(failed.start_failed);
  CHECK(!failed.minimal_size.has_value());
}

TEST_CASE("replay_experiment pairs fits with fresh-seed scheduled runs") {
  const auto train = blobs(600, 9);
  const auto test = blobs(200, 10);
  ReplaySpec spec;
  spec.dlr = blob_config(Algorithm::DlrPre);
  spec.dlr.opt.eta0 = 1.0;
  spec.dlr.opt.alpha = 3.0;
  spec.dlr.threshold = 0.9;
  spec.dlr.eval_interval = 3;
  spec.seeds = {1, 2, 3};
  spec.workers = 2;
  const auto result = replay_experiment(spec, train, test);
  REQUIRE(result.pairs.size() == 3);
  for (const auto& pair : result.pairs) {
    CHECK(pair.fit1.converged);
    CHECK(pair.fit2.converged);
    CHECK(pair.replay_run.config.opt.algo == Algorithm::Scheduled);
    CHECK(pair.replay_run.config.seed == replay_seed(pair.dlr_run.config.seed));
    CHECK(pair.replay_run.config.seed != pair.dlr_run.config.seed);
  }
  CHECK(result.rows.size() == 6);
  REQUIRE(result.dlr_epochs.has_value());
  CHECK(!result.dlr_median_curve.empty());
  CHECK(!result.replay_median_curve.empty());

  ReplaySpec bad = spec;
  bad.dlr.opt.algo = Algorithm::Sgd;
  CHECK_THROWS_AS(replay_experiment(bad, train, test), std::invalid_argument);
}

TEST_CASE("csv quoting and artifact formatting") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote(R"({"a":1,"b":2})") == "\"{\"\"a\"\":1,\"\"b\"\":2}\"");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("results and curves CSVs are written with the documented schemas") {
  const std::string dir = "./test_artifacts_tmp";
  std::filesystem::create_directories(dir);

  TrialRow row;
  row.experiment = "speed";
  row.algo = Algorithm::DlrPre;
  row.hidden = 100;
  row.params = {{"alpha", 10.0}, {"eta0", 1.0}};
  row.seed = 3;
  row.epochs_to_threshold = 0.75;
  row.final_accuracy = 0.9612;
  write_results_csv(dir + "/results.csv", {row});
  std::ifstream results(dir + "/results.csv");
  std::string header, line;
  std::getline(results, header);
  CHECK(header ==
        "experiment,algorithm,hidden_units,param_json,seed,epochs_to_threshold,reached,"
        "final_accuracy");
  std::getline(results, line);
  CHECK(line == "speed,dlr-pre,100,\"{\"\"alpha\"\":10.0,\"\"eta0\"\":1.0}\",3,0.75,true,0.9612");

  std::vector<CurvePoint> curve{{0.1, 0.5}, {0.2, 0.75}};
  write_curves_csv(dir + "/curves.csv", {{"run1", &curve}});
  std::ifstream curves(dir + "/curves.csv");
  std::getline(curves, header);
  CHECK(header == "run_id,t_epochs,test_accuracy");
  std::getline(curves, line);
  CHECK(line == "run1,0.1,0.5");

  std::filesystem::remove_all(dir);
}
