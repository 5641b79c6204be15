#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dlrlab/idx.hpp"
#include "dlrlab/matrix.hpp"

namespace dlrlab {

/// Numerically stable logistic sigmoid 1/(1+e^-z).
double logistic(double z);

/// Two-layer perceptron with logistic units and no bias terms.
/// w1 maps input -> hidden (H x D), w2 maps hidden -> output (K x H).
struct Mlp {
  Matrix w1;
  Matrix w2;

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t output_dim() const { return w2.rows(); }
};

struct InitSpec {
  std::uint64_t seed = 0;
};

/// Weights drawn uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer,
/// deterministically in the seed.
Mlp init_mlp(std::size_t hidden, const InitSpec& spec, std::size_t input_dim = 784,
             std::size_t output_dim = 10);

/// Batched intermediate quantities kept for backprop. Rows are samples.
struct ForwardTrace {
  Matrix z1, a1;  // B x H
  Matrix z2, a2;  // B x K
};

struct Gradients {
  Matrix g1;  // H x D, dC/dw1 averaged over the batch
  Matrix g2;  // K x H
};

/// z1 = x w1^T, a1 = sigma(z1), z2 = a1 w2^T, a2 = sigma(z2).
void forward(const Mlp& net, const Matrix& x, ForwardTrace& trace);
ForwardTrace forward(const Mlp& net, const Matrix& x);

/// Mean over the batch of (1/2) * sum_k (a2_k - y_k)^2.
double mse_loss(const Matrix& a2, const Matrix& y);

/// Backprop of mse_loss through the trace; gradients averaged over the batch.
void backward(const Mlp& net, const ForwardTrace& trace, const Matrix& x, const Matrix& y,
              Gradients& grads);
Gradients backward(const Mlp& net, const ForwardTrace& trace, const Matrix& x, const Matrix& y);

/// Fraction of samples whose argmax output matches the label. Ties go to the
/// lowest index.
double accuracy(const Mlp& net, const Dataset& data);

/// Textual checkpoint, stable across versions:
///   line 1: "dlrlab-mlp 1"
///   line 2: "D H K seed"
///   then H rows of w1 (D values each), then K rows of w2 (H values each),
///   every value formatted as the shortest round-trippable decimal.
void save_mlp(std::ostream& out, const Mlp& net, std::uint64_t seed);
void save_mlp(const std::string& path, const Mlp& net, std::uint64_t seed);
Mlp load_mlp(std::istream& in, std::uint64_t* seed_out = nullptr);
Mlp load_mlp(const std::string& path, std::uint64_t* seed_out = nullptr);

}  // namespace dlrlab
