#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlrlab/matrix.hpp"
#include "dlrlab/mlp.hpp"

namespace dlrlab {

// ---------------------------------------------------------------------------
// Update rules on a single weight tensor. These are the unit-testable
// primitives; the Optimizer classes below compose them over both layers.
// ---------------------------------------------------------------------------

/// w <- w - eta * g
void sgd_step(Matrix& weights, const Matrix& grads, double eta);

enum class DlrMode {
  PreNorm,   // denominator uses the column norm: all outgoing weights of pre-synaptic neuron j
  PostNorm,  // denominator uses the row norm: all incoming weights of post-synaptic neuron i
};

struct DlrConfig {
  double eta0 = 1.0;
  double alpha = 10.0;
  DlrMode mode = DlrMode::PreNorm;

  void validate() const;
};

/// L2 norms of the weight vectors the DLR denominator sums over: one value per
/// column (PreNorm) or per row (PostNorm).
std::vector<double> neuron_norms(const Matrix& weights, DlrMode mode);

/// Per-synapse rates eta0 * (|w_ij| + alpha) / (norm + alpha), computed from
/// the current weights only. Every rate lies in (0, eta0].
Matrix dlr_rates(const Matrix& weights, const DlrConfig& config);
void dlr_rates(const Matrix& weights, const DlrConfig& config, Matrix& rates_out);

/// Descent step w_ij <- w_ij - rate_ij * g_ij with rates evaluated on the
/// pre-update weights. Returns the rates used so observers never have to
/// recompute them.
Matrix dlr_step(Matrix& weights, const Matrix& grads, const DlrConfig& config);
void dlr_step(Matrix& weights, const Matrix& grads, const DlrConfig& config, Matrix& rates_out);

struct MomentumState {
  double mu = 0.9;
  double eta = 0.1;
  Matrix velocity;  // zero-initialized, same shape as the weights
};

/// Nesterov momentum, lookahead form: g = grad_fn(w + mu*v); v <- mu*v - eta*g;
/// w <- w + v. The callback makes the lookahead evaluation point explicit.
void nesterov_step(MomentumState& state, Matrix& weights,
                   const std::function<Matrix(const Matrix&)>& grad_fn);

struct AdamState {
  double alpha_step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Matrix m, v;  // zero-initialized moments
  std::int64_t t = 0;
};

/// Adam with bias correction.
void adam_step(AdamState& state, Matrix& weights, const Matrix& grads);

struct ScheduleParams {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

/// a * exp(b * t^(1/3) + c * t) + d. Throws if the value is not positive.
double scheduled_rate(double t, const ScheduleParams& params);

/// True when the schedule stays positive on [0, t_max] (checked densely).
bool schedule_positive_over(const ScheduleParams& params, double t_max);

/// Uniform within the layer: w <- w - scheduled_rate(t) * g.
void scheduled_step(Matrix& weights, const Matrix& grads, double t, const ScheduleParams& params);

// ---------------------------------------------------------------------------
// Whole-network optimizers with a uniform step interface.
// ---------------------------------------------------------------------------

enum class Algorithm { Sgd, Nesterov, Adam, DlrPre, DlrPost, Scheduled };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);
bool is_dlr(Algorithm algo);

struct OptimizerConfig {
  Algorithm algo = Algorithm::Sgd;
  double eta = 0.1;          // sgd / nesterov
  double mu = 0.9;           // nesterov
  double adam_alpha = 1e-3;  // adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double eta0 = 1.0;  // dlr
  double alpha = 10.0;
  ScheduleParams sched1, sched2;  // scheduled replay, one tuple per layer

  void validate() const;
  DlrConfig dlr_config() const;
};

/// Sets a flat numeric config key (eta, mu, adam_alpha, beta1, beta2, epsilon,
/// eta0, alpha, a1..d1, a2..d2). Throws on unknown keys.
void set_param(OptimizerConfig& config, const std::string& key, double value);

/// Advances the network by one minibatch. t_epochs is the training time
/// elapsed before this update, in fractional epochs.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(Mlp& net, const Matrix& x, const Matrix& y, double t_epochs) = 0;
  /// Rates applied by the most recent step for layer 1 or 2; null when the
  /// rule has no per-synapse rates.
  virtual const Matrix* last_rates(int /*layer*/) const { return nullptr; }
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config, const Mlp& net);

/// Warning text when alpha fails the intended regime alpha > max_j ||w_j|| at
/// initialization, otherwise nullopt.
std::optional<std::string> dlr_alpha_warning(const Mlp& net, const DlrConfig& config);

}  // namespace dlrlab
