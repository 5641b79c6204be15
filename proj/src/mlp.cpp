#include "dlrlab/mlp.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dlrlab/rng.hpp"

namespace dlrlab {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Mlp init_mlp(std::size_t hidden, const InitSpec& spec, std::size_t input_dim,
             std::size_t output_dim) {
  if (hidden == 0) throw std::invalid_argument("init_mlp: hidden layer must have >= 1 unit");
  Mlp net;
  net.w1 = Matrix(hidden, input_dim);
  net.w2 = Matrix(output_dim, hidden);
  Rng rng(derive_seed(spec.seed, 0x11));
  const double b1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (std::size_t i = 0; i < hidden; ++i)
    for (double& w : net.w1.row(i)) w = rng.next_double(-b1, b1);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t i = 0; i < output_dim; ++i)
    for (double& w : net.w2.row(i)) w = rng.next_double(-b2, b2);
  return net;
}

namespace {

void sigmoid_of(const Matrix& z, Matrix& a) {
  if (!a.same_shape(z)) a = Matrix(z.rows(), z.cols());
  const double* src = z.data();
  double* dst = a.data();
  for (std::size_t i = 0; i < z.size(); ++i) dst[i] = logistic(src[i]);
}

}  // namespace

void forward(const Mlp& net, const Matrix& x, ForwardTrace& trace) {
  if (x.cols() != net.input_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                " features, network expects " + std::to_string(net.input_dim()));
  matmul_nt(x, net.w1, trace.z1);
  sigmoid_of(trace.z1, trace.a1);
  matmul_nt(trace.a1, net.w2, trace.z2);
  sigmoid_of(trace.z2, trace.a2);
}

ForwardTrace forward(const Mlp& net, const Matrix& x) {
  ForwardTrace trace;
  forward(net, x, trace);
  return trace;
}

double mse_loss(const Matrix& a2, const Matrix& y) {
  require_same_shape(a2, y, "mse_loss");
  if (a2.rows() == 0) throw std::invalid_argument("mse_loss: empty batch");
  double total = 0.0;
  const double* a = a2.data();
  const double* t = y.data();
  for (std::size_t i = 0; i < a2.size(); ++i) {
    const double r = a[i] - t[i];
    total += r * r;
  }
  return 0.5 * total / static_cast<double>(a2.rows());
}

void backward(const Mlp& net, const ForwardTrace& trace, const Matrix& x, const Matrix& y,
              Gradients& grads) {
  require_same_shape(trace.a2, y, "backward");
  if (x.rows() != y.rows()) throw std::invalid_argument("backward: batch size mismatch");
  const std::size_t batch = x.rows();
  const std::size_t hidden = net.hidden_dim();
  const std::size_t out = net.output_dim();

  // delta2 = (a2 - y) .* a2 (1 - a2)
  Matrix delta2(batch, out);
  for (std::size_t b = 0; b < batch; ++b) {
    auto a2 = trace.a2.row(b);
    auto yb = y.row(b);
    auto d2 = delta2.row(b);
    for (std::size_t k = 0; k < out; ++k) d2[k] = (a2[k] - yb[k]) * a2[k] * (1.0 - a2[k]);
  }

  // delta1 = (delta2 w2) .* a1 (1 - a1)
  Matrix delta1(batch, hidden);
  for (std::size_t b = 0; b < batch; ++b) {
    auto d1 = delta1.row(b);
    auto d2 = delta2.row(b);
    for (std::size_t k = 0; k < out; ++k) axpy(d2[k], net.w2.row(k), d1);
    auto a1 = trace.a1.row(b);
    for (std::size_t h = 0; h < hidden; ++h) d1[h] *= a1[h] * (1.0 - a1[h]);
  }

  const double inv_batch = 1.0 / static_cast<double>(batch);
  matmul_tn_scaled(delta2, trace.a1, inv_batch, grads.g2);
  matmul_tn_scaled(delta1, x, inv_batch, grads.g1);
}

Gradients backward(const Mlp& net, const ForwardTrace& trace, const Matrix& x, const Matrix& y) {
  Gradients grads;
  backward(net, trace, x, y, grads);
  return grads;
}

double accuracy(const Mlp& net, const Dataset& data) {
  if (data.count() == 0) throw std::invalid_argument("accuracy: empty dataset");
  const std::size_t hidden = net.hidden_dim();
  const std::size_t out = net.output_dim();
  std::vector<double> a1(hidden), z2(out);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < data.count(); ++n) {
    auto xn = data.images.pixels.row(n);
    for (std::size_t h = 0; h < hidden; ++h) a1[h] = logistic(dot(xn, net.w1.row(h)));
    // argmax of z2 equals argmax of a2: sigma is monotone
    std::size_t best = 0;
    for (std::size_t k = 0; k < out; ++k) z2[k] = dot({a1.data(), hidden}, net.w2.row(k));
    for (std::size_t k = 1; k < out; ++k)
      if (z2[k] > z2[best]) best = k;
    if (best == data.labels.labels[n]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.count());
}

namespace {

void write_value(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.put(' ');
      write_value(out, row[j]);
    }
    out.put('\n');
  }
}

void read_matrix(std::istream& in, Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!(in >> m(i, j))) throw std::runtime_error("mlp checkpoint: truncated weight data");
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& net, std::uint64_t seed) {
  out << "dlrlab-mlp 1\n";
  out << net.input_dim() << ' ' << net.hidden_dim() << ' ' << net.output_dim() << ' ' << seed
      << '\n';
  write_matrix(out, net.w1);
  write_matrix(out, net.w2);
}

void save_mlp(const std::string& path, const Mlp& net, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  save_mlp(out, net, seed);
}

Mlp load_mlp(std::istream& in, std::uint64_t* seed_out) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "dlrlab-mlp" || version != 1)
    throw std::runtime_error("mlp checkpoint: unrecognized header");
  std::size_t d = 0, h = 0, k = 0;
  std::uint64_t seed = 0;
  if (!(in >> d >> h >> k >> seed)) throw std::runtime_error("mlp checkpoint: bad dimensions");
  Mlp net;
  net.w1 = Matrix(h, d);
  net.w2 = Matrix(k, h);
  read_matrix(in, net.w1);
  read_matrix(in, net.w2);
  if (seed_out) *seed_out = seed;
  return net;
}

Mlp load_mlp(const std::string& path, std::uint64_t* seed_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load_mlp(in, seed_out);
}

}  // namespace dlrlab
