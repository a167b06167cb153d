#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace acok {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Weights and biases of a tanh feed-forward network with a linear output layer.
///
/// Layer i maps width layer_sizes[i] to layer_sizes[i + 1]. Inputs pass through
/// a fixed affine map p_hat = (p - input_shift) * input_scale before the first
/// layer; the identity map is the default. The flat parameter order is, per
/// layer, the row-major weight matrix followed by the bias vector.
class MlpParams {
 public:
  MlpParams() = default;
  /// Zero weights and biases, identity input map.
  explicit MlpParams(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return layer_sizes_; }
  std::size_t num_layers() const noexcept { return weights_.size(); }
  int input_width() const { return layer_sizes_.front(); }
  int output_width() const { return layer_sizes_.back(); }

  Eigen::MatrixXd& weights(std::size_t layer) { return weights_[layer]; }
  const Eigen::MatrixXd& weights(std::size_t layer) const { return weights_[layer]; }
  Eigen::VectorXd& biases(std::size_t layer) { return biases_[layer]; }
  const Eigen::VectorXd& biases(std::size_t layer) const { return biases_[layer]; }

  Eigen::VectorXd& input_shift() { return input_shift_; }
  const Eigen::VectorXd& input_shift() const { return input_shift_; }
  Eigen::VectorXd& input_scale() { return input_scale_; }
  const Eigen::VectorXd& input_scale() const { return input_scale_; }

  std::size_t parameter_count() const noexcept;
  void copy_to(std::span<double> flat) const;
  void assign_from(std::span<const double> flat);
  std::vector<double> flatten() const;

  /// Throws std::invalid_argument on shape mismatch or non-finite entries.
  void validate() const;

  bool operator==(const MlpParams& other) const;

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Eigen::VectorXd input_shift_;
  Eigen::VectorXd input_scale_;
};

/// Checks layer_sizes has >= 3 positive entries.
void validate_layer_sizes(const std::vector<int>& layer_sizes);

/// Xavier-uniform weights, zero biases; deterministic per seed.
MlpParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Layer recursion a^i = tanh(W^i a^{i-1} + b^i), identity on the last layer.
Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input);

/// Outputs of a (t, x) -> (u, nu) network with the input derivatives the
/// residual needs.
struct NetworkJet {
  double u = 0.0;
  double nu = 0.0;
  double u_t = 0.0;
  double u_x = 0.0;
  double u_xx = 0.0;
  double nu_xx = 0.0;
};

/// Exact jet of a Net_u-shaped network (2 inputs, 2 outputs) at (t, x).
NetworkJet forward_jet(const MlpParams& params, double t, double x);

/// Network outputs over a batch: row r is output r, column j is point j.
struct JetOutputs {
  RowMatrix value;
  RowMatrix d_t;
  RowMatrix d_x;
  RowMatrix d_xx;

  static JetOutputs zeros(Eigen::Index outputs, Eigen::Index batch);
};

/// Forward pass of (value, d/dt, d/dx, d2/dx2) jets for a two-input network,
/// retaining every layer so the parameter gradient of any function of the
/// outputs can be pulled back.
class JetTape {
 public:
  JetTape(const MlpParams& params, std::span<const double> t, std::span<const double> x);

  const JetOutputs& outputs() const noexcept { return outputs_; }
  Eigen::Index batch() const noexcept { return batch_; }

  /// grad += d(loss)/d(params), where `adjoint` holds d(loss)/d(outputs).
  void backward(const MlpParams& params, const JetOutputs& adjoint, std::span<double> grad) const;

 private:
  Eigen::Index batch_ = 0;
  // Stacked [value | d_t | d_x | d_xx] column blocks.
  std::vector<Eigen::MatrixXd> inputs_;  // input of each layer
  std::vector<Eigen::MatrixXd> hidden_;  // [tanh(z) | z_t | z_x | z_xx] per hidden layer
  JetOutputs outputs_;
};

/// Value-only forward pass over a batch (inputs are columns), with reverse sweep.
class ValueTape {
 public:
  ValueTape(const MlpParams& params, const Eigen::MatrixXd& inputs);

  const RowMatrix& outputs() const noexcept { return outputs_; }

  void backward(const MlpParams& params, const RowMatrix& adjoint, std::span<double> grad) const;

 private:
  std::vector<Eigen::MatrixXd> inputs_;
  std::vector<Eigen::MatrixXd> hidden_;  // tanh(z)
  RowMatrix outputs_;
};

struct LossAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Loss defined on the jets at a fixed batch of points. Returns the loss and
/// fills `adjoint` (pre-zeroed, same shape as outputs) with d(loss)/d(outputs).
using JetLoss = std::function<double(const JetOutputs& outputs, JetOutputs& adjoint)>;

/// Value and exact parameter gradient of a jet loss. Throws DivergenceError
/// when the loss is not finite.
LossAndGradient loss_gradient(const MlpParams& params, std::span<const double> t,
                              std::span<const double> x, const JetLoss& loss);

/// Text snapshot ("acok-mlp 1"); numbers carry 17 significant digits, so a
/// read after a write reproduces every parameter bit for bit.
void write_mlp(std::ostream& out, const MlpParams& params);
MlpParams read_mlp(std::istream& in);

}  // namespace acok
