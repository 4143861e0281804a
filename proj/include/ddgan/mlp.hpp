#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ddgan {

enum class Activation { hardswish, leaky_relu, identity };

struct ActivationSpec {
  Activation kind = Activation::hardswish;
  double alpha = 0.2;  // leaky_relu slope for negative inputs
  friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

double act_hardswish(double x);
double act_leaky_relu(double x, double alpha);

/// First and second derivative of an activation. Kinks: leaky_relu'(0) = alpha,
/// hardswish'(+-3) comes from the quadratic branch.
double activation_value(const ActivationSpec& a, double x);
double activation_d1(const ActivationSpec& a, double x);
double activation_d2(const ActivationSpec& a, double x);

struct MlpSpec {
  int input_dim = 1;
  int output_dim = 1;
  int hidden_layers = 1;
  int units = 1;
  ActivationSpec activation{};  // hidden layers; the output layer is affine

  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Intermediate values of a batched forward pass. Columns are batch elements.
/// `k` indexes forward-mode tangent directions seeded at the input.
struct MlpTape {
  std::vector<Eigen::MatrixXd> layer_inputs;                     // a^(l-1)
  std::vector<std::vector<Eigen::MatrixXd>> layer_input_tangents;  // [l][k]
  std::vector<Eigen::MatrixXd> pre_activations;                  // z^(l)
  std::vector<std::vector<Eigen::MatrixXd>> pre_tangents;        // [l][k]
  Eigen::MatrixXd output;                                        // out x B
  std::vector<Eigen::MatrixXd> output_tangents;                  // [k], out x B

  int tangent_count() const { return static_cast<int>(output_tangents.size()); }
  Eigen::Index batch() const { return output.cols(); }
};

struct MlpGradient {
  Eigen::VectorXd params;  // flattened like Mlp::flatten()
  Eigen::MatrixXd inputs;  // adjoint of the inputs, in x B
};

/// Feed-forward network y = W_L act(... act(W_1 x + b_1) ...) + b_L.
class Mlp {
 public:
  explicit Mlp(const MlpSpec& spec);  // all parameters zero

  /// Glorot-uniform weights, zero biases. Weight j of the flattened vector uses
  /// counter j of CounterRng(seed, stream).
  static Mlp glorot(const MlpSpec& spec, std::uint64_t seed, std::uint64_t stream);

  const MlpSpec& spec() const noexcept { return spec_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  std::size_t parameter_count() const noexcept { return parameter_count_; }

  /// Per layer: weight (column-major), then bias.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::Ref<const Eigen::VectorXd>& theta);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  /// d y_i / d x_j, output_dim x input_dim.
  Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& x) const;

  /// Batched forward pass. Each seed is an input_dim x B tangent direction; the
  /// tape records d(.)/d(seed) for every intermediate.
  MlpTape record(const Eigen::MatrixXd& inputs, std::span<const Eigen::MatrixXd> seeds = {}) const;

  /// Reverse pass over a tape. `tangent_adjoints` is either empty or holds one
  /// out x B matrix per recorded tangent; anything else throws
  /// UnsupportedComposition.
  MlpGradient backward(const MlpTape& tape, const Eigen::MatrixXd& output_adjoint,
                       std::span<const Eigen::MatrixXd> tangent_adjoints = {}) const;

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
  std::size_t parameter_count_ = 0;
};

/// Unit input directions e_0 ... e_{d-1}, broadcast over a batch.
std::vector<Eigen::MatrixXd> unit_seeds(int input_dim, Eigen::Index batch);

/// A scalar loss of the network outputs and output tangents. It returns the loss
/// and writes dL/d(output) and dL/d(output tangent k); leaving the tangent
/// adjoints empty means the loss does not depend on them.
using TapeLoss =
    std::function<double(const MlpTape&, Eigen::MatrixXd& output_adjoint, std::vector<Eigen::MatrixXd>& tangent_adjoints)>;

struct LossAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

LossAndGradient loss_gradient(const Mlp& net, const Eigen::MatrixXd& inputs, std::span<const Eigen::MatrixXd> seeds,
                              const TapeLoss& loss);

// Parameter checkpoints ------------------------------------------------------

struct CheckpointHeader {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  friend bool operator==(const CheckpointHeader&, const CheckpointHeader&) = default;
};

struct Checkpoint {
  CheckpointHeader header;
  std::vector<Mlp> nets;
};

/// "DDGANCK1", u32 version, u32 net count, u64 seed, u64 epoch, then per net the
/// spec (5 x i32, f64 alpha), u64 parameter count and the float64 parameters,
/// closed by an FNV-1a 64 checksum of everything before it. Little-endian.
void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     std::span<const Mlp* const> nets);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ddgan
