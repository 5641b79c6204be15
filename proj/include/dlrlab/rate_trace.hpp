#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dlrlab/matrix.hpp"
#include "dlrlab/optimizers.hpp"

namespace dlrlab {

/// Mean per-synapse learning rate of one weight layer, sampled over training
/// time (fractional epochs, strictly increasing).
struct RateTrace {
  int layer_id = 1;  // 1 = input->hidden, 2 = hidden->output
  std::vector<double> t;
  std::vector<double> mean_rate;

  std::size_t size() const { return t.size(); }
};

double matrix_mean(const Matrix& m);

/// Appends (t, mean over all entries of rates). t must exceed the last sample.
void record(RateTrace& trace, double t, const Matrix& rates);

/// CSV schema: layer_id,t_epochs,mean_rate with full float precision.
void write_traces_csv(std::ostream& out, const std::vector<RateTrace>& traces);
void write_traces_csv(const std::string& path, const std::vector<RateTrace>& traces);
std::vector<RateTrace> read_traces_csv(std::istream& in);
std::vector<RateTrace> read_traces_csv(const std::string& path);

struct FitResult {
  ScheduleParams params;
  double sse = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Least-squares fit of the trace to a*exp(b*t^(1/3)+c*t)+d via seeded
/// multi-start Nelder-Mead. Requires >= 8 samples. The fitted curve is kept
/// positive over the trace's t-range; the returned SSE never exceeds that of
/// the best constant fit (the constant is one of the starts).
FitResult fit_schedule(const RateTrace& trace);

double schedule_value(double t, const ScheduleParams& params);

}  // namespace dlrlab
