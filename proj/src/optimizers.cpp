#include "dlrlab/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlrlab {

void sgd_step(Matrix& weights, const Matrix& grads, double eta) {
  require_same_shape(weights, grads, "sgd_step");
  double* w = weights.data();
  const double* g = grads.data();
  for (std::size_t i = 0; i < weights.size(); ++i) w[i] -= eta * g[i];
}

void DlrConfig::validate() const {
  if (!(eta0 > 0.0)) throw std::invalid_argument("dlr: eta0 must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("dlr: alpha must be > 0");
}

std::vector<double> neuron_norms(const Matrix& weights, DlrMode mode) {
  if (mode == DlrMode::PreNorm) {
    std::vector<double> acc(weights.cols(), 0.0);
    for (std::size_t i = 0; i < weights.rows(); ++i) {
      auto row = weights.row(i);
      for (std::size_t j = 0; j < weights.cols(); ++j) acc[j] += row[j] * row[j];
    }
    for (double& v : acc) v = std::sqrt(v);
    return acc;
  }
  std::vector<double> norms(weights.rows());
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto row = weights.row(i);
    norms[i] = std::sqrt(dot(row, row));
  }
  return norms;
}

void dlr_rates(const Matrix& weights, const DlrConfig& config, Matrix& rates_out) {
  config.validate();
  if (!rates_out.same_shape(weights)) rates_out = Matrix(weights.rows(), weights.cols());
  const auto norms = neuron_norms(weights, config.mode);
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto w = weights.row(i);
    auto r = rates_out.row(i);
    if (config.mode == DlrMode::PreNorm) {
      for (std::size_t j = 0; j < weights.cols(); ++j)
        r[j] = config.eta0 * (std::abs(w[j]) + config.alpha) / (norms[j] + config.alpha);
    } else {
      const double denom = norms[i] + config.alpha;
      for (std::size_t j = 0; j < weights.cols(); ++j)
        r[j] = config.eta0 * (std::abs(w[j]) + config.alpha) / denom;
    }
  }
}

Matrix dlr_rates(const Matrix& weights, const DlrConfig& config) {
  Matrix rates;
  dlr_rates(weights, config, rates);
  return rates;
}

void dlr_step(Matrix& weights, const Matrix& grads, const DlrConfig& config, Matrix& rates_out) {
  require_same_shape(weights, grads, "dlr_step");
  dlr_rates(weights, config, rates_out);
  double* w = weights.data();
  const double* g = grads.data();
  const double* r = rates_out.data();
  for (std::size_t i = 0; i < weights.size(); ++i) w[i] -= r[i] * g[i];
}

Matrix dlr_step(Matrix& weights, const Matrix& grads, const DlrConfig& config) {
  Matrix rates;
  dlr_step(weights, grads, config, rates);
  return rates;
}

void nesterov_step(MomentumState& state, Matrix& weights,
                   const std::function<Matrix(const Matrix&)>& grad_fn) {
  if (state.velocity.empty()) state.velocity = Matrix(weights.rows(), weights.cols());
  require_same_shape(weights, state.velocity, "nesterov_step");
  Matrix lookahead = weights;
  {
    double* l = lookahead.data();
    const double* v = state.velocity.data();
    for (std::size_t i = 0; i < lookahead.size(); ++i) l[i] += state.mu * v[i];
  }
  const Matrix grads = grad_fn(lookahead);
  require_same_shape(weights, grads, "nesterov_step");
  double* w = weights.data();
  double* v = state.velocity.data();
  const double* g = grads.data();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    v[i] = state.mu * v[i] - state.eta * g[i];
    w[i] += v[i];
  }
}

void adam_step(AdamState& state, Matrix& weights, const Matrix& grads) {
  require_same_shape(weights, grads, "adam_step");
  if (state.m.empty()) {
    state.m = Matrix(weights.rows(), weights.cols());
    state.v = Matrix(weights.rows(), weights.cols());
  }
  require_same_shape(weights, state.m, "adam_step");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  double* w = weights.data();
  double* m = state.m.data();
  double* v = state.v.data();
  const double* g = grads.data();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    w[i] -= state.alpha_step * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

double scheduled_rate(double t, const ScheduleParams& params) {
  const double rate = params.a * std::exp(params.b * std::cbrt(t) + params.c * t) + params.d;
  if (!(rate > 0.0))
    throw std::domain_error("scheduled_rate: schedule is not positive at t=" + std::to_string(t));
  return rate;
}

bool schedule_positive_over(const ScheduleParams& params, double t_max) {
  constexpr int kSamples = 1024;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = t_max * static_cast<double>(i) / kSamples;
    const double rate = params.a * std::exp(params.b * std::cbrt(t) + params.c * t) + params.d;
    if (!(rate > 0.0) || !std::isfinite(rate)) return false;
  }
  return true;
}

void scheduled_step(Matrix& weights, const Matrix& grads, double t, const ScheduleParams& params) {
  sgd_step(weights, grads, scheduled_rate(t, params));
}

// ---------------------------------------------------------------------------

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Sgd: return "sgd";
    case Algorithm::Nesterov: return "nesterov";
    case Algorithm::Adam: return "adam";
    case Algorithm::DlrPre: return "dlr-pre";
    case Algorithm::DlrPost: return "dlr-post";
    case Algorithm::Scheduled: return "scheduled";
  }
  throw std::logic_error("to_string: bad Algorithm");
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "sgd") return Algorithm::Sgd;
  if (name == "nesterov") return Algorithm::Nesterov;
  if (name == "adam") return Algorithm::Adam;
  if (name == "dlr-pre") return Algorithm::DlrPre;
  if (name == "dlr-post") return Algorithm::DlrPost;
  if (name == "scheduled") return Algorithm::Scheduled;
  throw std::invalid_argument(
      "unknown algorithm '" + name +
      "' (expected one of: sgd, nesterov, adam, dlr-pre, dlr-post, scheduled)");
}

bool is_dlr(Algorithm algo) { return algo == Algorithm::DlrPre || algo == Algorithm::DlrPost; }

void OptimizerConfig::validate() const {
  switch (algo) {
    case Algorithm::Sgd:
      if (!(eta > 0.0)) throw std::invalid_argument("sgd: eta must be > 0");
      break;
    case Algorithm::Nesterov:
      if (!(eta > 0.0)) throw std::invalid_argument("nesterov: eta must be > 0");
      if (mu < 0.0 || mu >= 1.0) throw std::invalid_argument("nesterov: mu must be in [0,1)");
      break;
    case Algorithm::Adam:
      if (!(adam_alpha > 0.0)) throw std::invalid_argument("adam: alpha must be > 0");
      if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("adam: beta1 must be in [0,1)");
      if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("adam: beta2 must be in [0,1)");
      if (!(epsilon > 0.0)) throw std::invalid_argument("adam: epsilon must be > 0");
      break;
    case Algorithm::DlrPre:
    case Algorithm::DlrPost:
      dlr_config().validate();
      break;
    case Algorithm::Scheduled:
      break;  // positivity is horizon-dependent, checked by the trainer
  }
}

DlrConfig OptimizerConfig::dlr_config() const {
  return DlrConfig{eta0, alpha,
                   algo == Algorithm::DlrPost ? DlrMode::PostNorm : DlrMode::PreNorm};
}

void set_param(OptimizerConfig& config, const std::string& key, double value) {
  if (key == "eta") config.eta = value;
  else if (key == "mu") config.mu = value;
  else if (key == "adam_alpha") config.adam_alpha = value;
  else if (key == "beta1") config.beta1 = value;
  else if (key == "beta2") config.beta2 = value;
  else if (key == "epsilon") config.epsilon = value;
  else if (key == "eta0") config.eta0 = value;
  else if (key == "alpha") config.alpha = value;
  else if (key == "a1") config.sched1.a = value;
  else if (key == "b1") config.sched1.b = value;
  else if (key == "c1") config.sched1.c = value;
  else if (key == "d1") config.sched1.d = value;
  else if (key == "a2") config.sched2.a = value;
  else if (key == "b2") config.sched2.b = value;
  else if (key == "c2") config.sched2.c = value;
  else if (key == "d2") config.sched2.d = value;
  else throw std::invalid_argument("unknown optimizer parameter '" + key + "'");
}

namespace {

class SgdOptimizer final : public Optimizer {
 public:
  explicit SgdOptimizer(double eta) : eta_(eta) {}

  void step(Mlp& net, const Matrix& x, const Matrix& y, double) override {
    forward(net, x, trace_);
    backward(net, trace_, x, y, grads_);
    sgd_step(net.w1, grads_.g1, eta_);
    sgd_step(net.w2, grads_.g2, eta_);
  }

 private:
  double eta_;
  ForwardTrace trace_;
  Gradients grads_;
};

class NesterovOptimizer final : public Optimizer {
 public:
  NesterovOptimizer(double eta, double mu, const Mlp& net) {
    s1_ = MomentumState{mu, eta, Matrix(net.w1.rows(), net.w1.cols())};
    s2_ = MomentumState{mu, eta, Matrix(net.w2.rows(), net.w2.cols())};
  }

  void step(Mlp& net, const Matrix& x, const Matrix& y, double) override {
    // Joint lookahead: the minibatch gradient is evaluated once with both
    // layers shifted by mu * velocity.
    Mlp ahead;
    ahead.w1 = shifted(net.w1, s1_);
    ahead.w2 = shifted(net.w2, s2_);
    forward(ahead, x, trace_);
    backward(ahead, trace_, x, y, grads_);
    apply(s1_, net.w1, grads_.g1);
    apply(s2_, net.w2, grads_.g2);
  }

 private:
  static Matrix shifted(const Matrix& w, const MomentumState& s) {
    Matrix out = w;
    double* o = out.data();
    const double* v = s.velocity.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] += s.mu * v[i];
    return out;
  }

  static void apply(MomentumState& s, Matrix& w, const Matrix& g) {
    double* wp = w.data();
    double* vp = s.velocity.data();
    const double* gp = g.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      vp[i] = s.mu * vp[i] - s.eta * gp[i];
      wp[i] += vp[i];
    }
  }

  MomentumState s1_, s2_;
  ForwardTrace trace_;
  Gradients grads_;
};

class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(const OptimizerConfig& cfg) {
    s1_ = AdamState{cfg.adam_alpha, cfg.beta1, cfg.beta2, cfg.epsilon};
    s2_ = s1_;
  }

  void step(Mlp& net, const Matrix& x, const Matrix& y, double) override {
    forward(net, x, trace_);
    backward(net, trace_, x, y, grads_);
    adam_step(s1_, net.w1, grads_.g1);
    adam_step(s2_, net.w2, grads_.g2);
  }

 private:
  AdamState s1_, s2_;
  ForwardTrace trace_;
  Gradients grads_;
};

class DlrOptimizer final : public Optimizer {
 public:
  explicit DlrOptimizer(const DlrConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  void step(Mlp& net, const Matrix& x, const Matrix& y, double) override {
    forward(net, x, trace_);
    backward(net, trace_, x, y, grads_);
    dlr_step(net.w1, grads_.g1, cfg_, rates1_);
    dlr_step(net.w2, grads_.g2, cfg_, rates2_);
  }

  const Matrix* last_rates(int layer) const override {
    if (rates1_.empty()) return nullptr;  // no step taken yet
    return layer == 1 ? &rates1_ : &rates2_;
  }

 private:
  DlrConfig cfg_;
  ForwardTrace trace_;
  Gradients grads_;
  Matrix rates1_, rates2_;
};

class ScheduledOptimizer final : public Optimizer {
 public:
  ScheduledOptimizer(const ScheduleParams& p1, const ScheduleParams& p2) : p1_(p1), p2_(p2) {}

  void step(Mlp& net, const Matrix& x, const Matrix& y, double t_epochs) override {
    forward(net, x, trace_);
    backward(net, trace_, x, y, grads_);
    scheduled_step(net.w1, grads_.g1, t_epochs, p1_);
    scheduled_step(net.w2, grads_.g2, t_epochs, p2_);
  }

 private:
  ScheduleParams p1_, p2_;
  ForwardTrace trace_;
  Gradients grads_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& config, const Mlp& net) {
  config.validate();
  switch (config.algo) {
    case Algorithm::Sgd: return std::make_unique<SgdOptimizer>(config.eta);
    case Algorithm::Nesterov:
      return std::make_unique<NesterovOptimizer>(config.eta, config.mu, net);
    case Algorithm::Adam: return std::make_unique<AdamOptimizer>(config);
    case Algorithm::DlrPre:
    case Algorithm::DlrPost: return std::make_unique<DlrOptimizer>(config.dlr_config());
    case Algorithm::Scheduled:
      return std::make_unique<ScheduledOptimizer>(config.sched1, config.sched2);
  }
  throw std::logic_error("make_optimizer: bad Algorithm");
}

std::optional<std::string> dlr_alpha_warning(const Mlp& net, const DlrConfig& config) {
  double max_norm = 0.0;
  for (const Matrix* w : {&net.w1, &net.w2}) {
    const auto norms = neuron_norms(*w, config.mode);
    for (double n : norms) max_norm = std::max(max_norm, n);
  }
  if (config.alpha <= max_norm)
    return "dlr: alpha=" + std::to_string(config.alpha) +
           " does not dominate the largest initial neuron norm " + std::to_string(max_norm) +
           "; rates will not start uniform";
  return std::nullopt;
}

}  // namespace dlrlab
