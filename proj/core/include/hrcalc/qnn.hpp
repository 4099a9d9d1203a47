#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hrcalc/adaptive.hpp"
#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

struct Activation {
  std::string name;
  QScalarMap f;
};

// "identity", "split_tanh" or "split_sigmoid"; UsageError otherwise.
Activation activation_by_name(const std::string& name);

struct QnnLayer {
  QMatrix W;  // N_l x N_{l-1}
  QVector b;  // N_l
  Activation activation;
};

struct QnnNetwork {
  std::vector<QnnLayer> layers;
  double gamma = 0.0;
  std::uint64_t seed = 0;  // recorded in checkpoints

  std::size_t input_size() const;
  std::size_t output_size() const;
};

// Throws UsageError when layer dimensions do not chain or gamma is negative.
// gamma = 0 is accepted and makes every training step a no-op.
void validate_network(const QnnNetwork& net);

// Layer sizes N_0, ..., N_L; weights and biases component-wise uniform in
// [-1/sqrt(4 N_{l-1}), 1/sqrt(4 N_{l-1})] from mt19937_64(seed).
QnnNetwork init_network(const std::vector<std::size_t>& sizes, const std::string& activation,
                        double gamma, std::uint64_t seed);

struct ForwardTrace {
  QVector x0;
  std::vector<QVector> y;  // pre-activations, layers 1..L
  std::vector<QVector> x;  // activations, layers 1..L
};

// y_l = W_l x_{l-1} + b_l, x_l = f(y_l). Non-finite activations raise
// NumericError naming the layer.
ForwardTrace forward(const QnnNetwork& net, const QVector& x0);

struct BackwardResult {
  std::vector<QVector> deltas;  // layers 1..L
  double cost = 0.0;            // J = 1/2 Σ |d_m - x_{L,m}|^2
};

// delta_L = d - x_L; delta_{l,m} = Σ_n (W_{l+1,n,m} x_{l+1,n})* delta_{l+1,n}.
BackwardResult backward(const QnnNetwork& net, const ForwardTrace& trace, const QVector& d);

double qnn_cost(const QnnNetwork& net, const QVector& x0, const QVector& d);

struct TrainResult {
  QnnNetwork net;
  double cost = 0.0;       // before the update
  double grad_norm = 0.0;  // Euclidean norm of the update divided by gamma
};

// Output layer: W += gamma delta x_{L-1}^H, b += gamma delta. Hidden layers:
// the same with delta replaced by Σ_zeta delta^zeta = 4 Re(delta).
TrainResult train_step(const QnnNetwork& net, const QVector& x0, const QVector& d,
                       std::size_t step = 0);

struct TrainingSample {
  QVector x0, d;
};

// Every weight and bias moves along -gamma dJ/dw* with the derivative from
// numeric HR calculus; J is summed over the batch.
TrainResult numeric_grad_train_step(const QnnNetwork& net, const std::vector<TrainingSample>& batch,
                                    std::size_t step = 0);
TrainResult numeric_grad_train_step(const QnnNetwork& net, const QVector& x0, const QVector& d,
                                    std::size_t step = 0);

// All weights then biases, layer by layer.
QVector flatten_parameters(const QnnNetwork& net);
QnnNetwork with_parameters(const QnnNetwork& net, const QVector& params);

// Checkpoint: `layers`, `activation`, `seed`, `gamma` header lines followed by
// `[W{l}]` and `[b{l}]` matrix CSV blocks.
void write_checkpoint(std::ostream& os, const QnnNetwork& net);
QnnNetwork read_checkpoint(std::istream& is);

// Training log CSV: step, J, grad_norm.
class TrainingLogWriter {
 public:
  explicit TrainingLogWriter(std::ostream& os);
  void row(std::size_t step, double cost, double grad_norm);

 private:
  std::ostream& os_;
};

}  // namespace hrcalc
