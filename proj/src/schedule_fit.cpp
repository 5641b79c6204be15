#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dlrlab/nelder_mead.hpp"
#include "dlrlab/rate_trace.hpp"
#include "dlrlab/rng.hpp"

namespace dlrlab {

double schedule_value(double t, const ScheduleParams& params) {
  return params.a * std::exp(params.b * std::cbrt(t) + params.c * t) + params.d;
}

namespace {

constexpr std::uint64_t kMultiStartSeed = 0x7261746566697421ULL;
constexpr int kStarts = 8;

double sse_of(const std::vector<double>& p, const RateTrace& trace) {
  double sse = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double e = p[1] * std::cbrt(trace.t[i]) + p[2] * trace.t[i];
    if (e > 700.0) return 1e300;  // exp would overflow; treat as hopeless
    const double r = trace.mean_rate[i] - (p[0] * std::exp(e) + p[3]);
    sse += r * r;
  }
  return std::isfinite(sse) ? sse : 1e300;
}

ScheduleParams to_params(const std::vector<double>& x) {
  return ScheduleParams{x[0], x[1], x[2], x[3]};
}

bool positive_on_trace_range(const ScheduleParams& p, const RateTrace& trace) {
  // Dense check from 0 (replay horizons start there) through the last sample.
  return schedule_positive_over(p, trace.t.back());
}

}  // namespace

FitResult fit_schedule(const RateTrace& trace) {
  if (trace.size() < 8)
    throw std::invalid_argument("fit_schedule: need >= 8 samples, got " +
                                std::to_string(trace.size()));
  const auto [t_min_it, t_max_it] = std::minmax_element(trace.t.begin(), trace.t.end());
  if (*t_min_it == *t_max_it)
    throw std::invalid_argument("fit_schedule: all sample times identical");

  double mean = 0.0;
  for (double v : trace.mean_rate) mean += v;
  mean /= static_cast<double>(trace.size());
  const double v_first = trace.mean_rate.front();
  const double v_last = trace.mean_rate.back();
  const double t_span = *t_max_it;

  std::vector<std::vector<double>> starts;
  starts.push_back({0.0, 0.0, 0.0, mean});  // the constant fit lives in the family
  starts.push_back({v_first - v_last, -1.0, -1.0 / t_span, v_last});
  Rng rng(kMultiStartSeed);
  while (starts.size() < kStarts) {
    const double a = (v_first - v_last) * rng.next_double(0.25, 2.0) +
                     rng.next_double(-0.1, 0.1) * std::abs(mean);
    const double b = -rng.next_double(0.1, 4.0);
    const double c = -rng.next_double(0.1, 4.0) / t_span;
    const double d = v_last * rng.next_double(0.25, 1.5);
    starts.push_back({a, b, c, d});
  }

  const auto objective = [&trace](const std::vector<double>& p) { return sse_of(p, trace); };

  FitResult best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    const auto run = nelder_mead(objective, start);
    const auto params = to_params(run.x);
    if (!positive_on_trace_range(params, trace)) continue;
    if (run.fval < best_sse) {
      best_sse = run.fval;
      best = FitResult{params, run.fval, run.converged, run.iterations};
    }
  }
  // The constant start always yields a positive curve, so a candidate exists.
  return best;
}

}  // namespace dlrlab
