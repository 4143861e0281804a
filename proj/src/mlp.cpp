#include "ddgan/mlp.hpp"

#include <cmath>
#include <string>

#include "ddgan/error.hpp"
#include "ddgan/rng.hpp"
#include "detail/bytes.hpp"

namespace ddgan {

double act_hardswish(double x) {
  if (x <= -3.0) return 0.0;
  if (x >= 3.0) return x;
  return (x * x + 3.0 * x) / 6.0;
}

double act_leaky_relu(double x, double alpha) { return x >= 0.0 ? x : alpha * x; }

double activation_value(const ActivationSpec& a, double x) {
  switch (a.kind) {
    case Activation::hardswish: return act_hardswish(x);
    case Activation::leaky_relu: return act_leaky_relu(x, a.alpha);
    case Activation::identity: return x;
  }
  return x;
}

double activation_d1(const ActivationSpec& a, double x) {
  switch (a.kind) {
    case Activation::hardswish:
      if (x < -3.0) return 0.0;
      if (x > 3.0) return 1.0;
      return (2.0 * x + 3.0) / 6.0;
    case Activation::leaky_relu: return x > 0.0 ? 1.0 : a.alpha;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

double activation_d2(const ActivationSpec& a, double x) {
  if (a.kind == Activation::hardswish && x >= -3.0 && x <= 3.0) return 1.0 / 3.0;
  return 0.0;
}

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1 || hidden_layers < 0 || (hidden_layers > 0 && units < 1)) {
    throw InvalidInput("MlpSpec: dimensions must be positive");
  }
  if (activation.kind == Activation::leaky_relu && !std::isfinite(activation.alpha)) {
    throw InvalidInput("MlpSpec: leaky_relu slope must be finite");
  }
}

Mlp::Mlp(const MlpSpec& spec) : spec_(spec) {
  spec_.validate();
  int fan_in = spec.input_dim;
  for (int l = 0; l <= spec.hidden_layers; ++l) {
    const int fan_out = l == spec.hidden_layers ? spec.output_dim : spec.units;
    layers_.push_back({Eigen::MatrixXd::Zero(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)});
    parameter_count_ += static_cast<std::size_t>(fan_out) * (fan_in + 1);
    fan_in = fan_out;
  }
}

Mlp Mlp::glorot(const MlpSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  Mlp net(spec);
  const CounterRng rng(seed, stream);
  std::uint64_t counter = 0;
  for (DenseLayer& layer : net.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    for (Eigen::Index j = 0; j < layer.weight.size(); ++j) {
      layer.weight.data()[j] = rng.uniform(counter++, -limit, limit);
    }
    counter += static_cast<std::uint64_t>(layer.bias.size());
  }
  return net;
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count_));
  Eigen::Index pos = 0;
  for (const DenseLayer& layer : layers_) {
    theta.segment(pos, layer.weight.size()) = Eigen::Map<const Eigen::VectorXd>(layer.weight.data(), layer.weight.size());
    pos += layer.weight.size();
    theta.segment(pos, layer.bias.size()) = layer.bias;
    pos += layer.bias.size();
  }
  return theta;
}

void Mlp::unflatten(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (static_cast<std::size_t>(theta.size()) != parameter_count_) {
    throw InvalidInput("unflatten: expected " + std::to_string(parameter_count_) + " parameters, got " +
                       std::to_string(theta.size()));
  }
  Eigen::Index pos = 0;
  for (DenseLayer& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.weight.data(), layer.weight.size()) = theta.segment(pos, layer.weight.size());
    pos += layer.weight.size();
    layer.bias = theta.segment(pos, layer.bias.size());
    pos += layer.bias.size();
  }
}

namespace {

const ActivationSpec kIdentity{Activation::identity, 0.0};

Eigen::MatrixXd apply(const ActivationSpec& a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([&a](double x) { return activation_value(a, x); });
}

Eigen::MatrixXd apply_d1(const ActivationSpec& a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([&a](double x) { return activation_d1(a, x); });
}

Eigen::MatrixXd apply_d2(const ActivationSpec& a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([&a](double x) { return activation_d2(a, x); });
}

}  // namespace

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != spec_.input_dim) throw InvalidInput("forward: input dimension mismatch");
  if (!x.allFinite()) throw InvalidInput("forward: non-finite input");
  return record(x).output.col(0);
}

Eigen::MatrixXd Mlp::input_jacobian(const Eigen::VectorXd& x) const {
  if (x.size() != spec_.input_dim) throw InvalidInput("input_jacobian: input dimension mismatch");
  const auto seeds = unit_seeds(spec_.input_dim, 1);
  const MlpTape tape = record(x, seeds);
  Eigen::MatrixXd jac(spec_.output_dim, spec_.input_dim);
  for (int k = 0; k < spec_.input_dim; ++k) jac.col(k) = tape.output_tangents[k].col(0);
  return jac;
}

MlpTape Mlp::record(const Eigen::MatrixXd& inputs, std::span<const Eigen::MatrixXd> seeds) const {
  if (inputs.rows() != spec_.input_dim) throw InvalidInput("record: input dimension mismatch");
  const Eigen::Index batch = inputs.cols();
  for (const auto& s : seeds) {
    if (s.rows() != spec_.input_dim || s.cols() != batch) throw InvalidInput("record: tangent seed shape mismatch");
  }
  const std::size_t n_layers = layers_.size();
  MlpTape tape;
  tape.layer_inputs.reserve(n_layers);
  tape.layer_input_tangents.reserve(n_layers);
  tape.pre_activations.reserve(n_layers);
  tape.pre_tangents.reserve(n_layers);

  Eigen::MatrixXd a = inputs;
  std::vector<Eigen::MatrixXd> a_dot(seeds.begin(), seeds.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = layers_[l];
    const ActivationSpec& act = l + 1 == n_layers ? kIdentity : spec_.activation;

    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    std::vector<Eigen::MatrixXd> z_dot;
    z_dot.reserve(a_dot.size());
    for (const auto& t : a_dot) z_dot.push_back(layer.weight * t);

    Eigen::MatrixXd next;
    std::vector<Eigen::MatrixXd> next_dot;
    if (act.kind == Activation::identity) {
      next = z;
      next_dot = z_dot;
    } else {
      next = apply(act, z);
      if (!z_dot.empty()) {
        const Eigen::MatrixXd d1 = apply_d1(act, z);
        for (const auto& t : z_dot) next_dot.push_back(d1.cwiseProduct(t));
      }
    }
    tape.layer_inputs.push_back(std::move(a));
    tape.layer_input_tangents.push_back(std::move(a_dot));
    tape.pre_activations.push_back(std::move(z));
    tape.pre_tangents.push_back(std::move(z_dot));
    a = std::move(next);
    a_dot = std::move(next_dot);
  }
  tape.output = std::move(a);
  tape.output_tangents = std::move(a_dot);
  return tape;
}

// Reverse pass through  z = W a + b,  z_k' = W a_k',  a+ = act(z),  a+_k' = act'(z) . z_k'.
//   zbar    = a+bar . act'(z) + sum_k a+_k'bar . act''(z) . z_k'
//   z_k'bar = a+_k'bar . act'(z)
//   Wbar    = zbar a^T + sum_k z_k'bar a_k'^T,   bbar = sum over batch of zbar
//   abar    = W^T zbar,   a_k'bar = W^T z_k'bar
MlpGradient Mlp::backward(const MlpTape& tape, const Eigen::MatrixXd& output_adjoint,
                          std::span<const Eigen::MatrixXd> tangent_adjoints) const {
  const Eigen::Index batch = tape.batch();
  if (tape.layer_inputs.size() != layers_.size()) throw InvalidInput("backward: tape does not match network");
  if (output_adjoint.rows() != spec_.output_dim || output_adjoint.cols() != batch) {
    throw InvalidInput("backward: output adjoint shape mismatch");
  }
  if (!tangent_adjoints.empty()) {
    if (static_cast<int>(tangent_adjoints.size()) != tape.tangent_count()) {
      throw UnsupportedComposition("backward: loss depends on " + std::to_string(tangent_adjoints.size()) +
                                   " input derivatives but the forward pass recorded " +
                                   std::to_string(tape.tangent_count()));
    }
    for (const auto& t : tangent_adjoints) {
      if (t.rows() != spec_.output_dim || t.cols() != batch) throw InvalidInput("backward: tangent adjoint shape mismatch");
    }
  }
  const bool with_tangents = !tangent_adjoints.empty();

  MlpGradient grad;
  grad.params.resize(static_cast<Eigen::Index>(parameter_count_));
  std::vector<Eigen::Index> offsets(layers_.size());
  {
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      offsets[l] = pos;
      pos += layers_[l].weight.size() + layers_[l].bias.size();
    }
  }

  Eigen::MatrixXd abar = output_adjoint;
  std::vector<Eigen::MatrixXd> adot_bar;
  if (with_tangents) adot_bar.assign(tangent_adjoints.begin(), tangent_adjoints.end());

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const DenseLayer& layer = layers_[li];
    const ActivationSpec& act = li + 1 == layers_.size() ? kIdentity : spec_.activation;
    const Eigen::MatrixXd& z = tape.pre_activations[li];
    const auto& z_dot = tape.pre_tangents[li];

    Eigen::MatrixXd zbar;
    std::vector<Eigen::MatrixXd> zdot_bar;
    if (act.kind == Activation::identity) {
      zbar = std::move(abar);
      zdot_bar = std::move(adot_bar);
    } else {
      const Eigen::MatrixXd d1 = apply_d1(act, z);
      zbar = abar.cwiseProduct(d1);
      if (with_tangents) {
        const bool curved = act.kind == Activation::hardswish;
        Eigen::MatrixXd d2;
        if (curved) d2 = apply_d2(act, z);
        for (std::size_t k = 0; k < adot_bar.size(); ++k) {
          if (curved) zbar += adot_bar[k].cwiseProduct(d2).cwiseProduct(z_dot[k]);
          zdot_bar.push_back(adot_bar[k].cwiseProduct(d1));
        }
      }
    }

    const Eigen::MatrixXd& a_in = tape.layer_inputs[li];
    Eigen::MatrixXd w_grad = zbar * a_in.transpose();
    for (std::size_t k = 0; k < zdot_bar.size(); ++k) {
      w_grad.noalias() += zdot_bar[k] * tape.layer_input_tangents[li][k].transpose();
    }
    grad.params.segment(offsets[li], w_grad.size()) = Eigen::Map<const Eigen::VectorXd>(w_grad.data(), w_grad.size());
    grad.params.segment(offsets[li] + w_grad.size(), layer.bias.size()) = zbar.rowwise().sum();

    abar = layer.weight.transpose() * zbar;
    adot_bar.clear();
    if (li > 0) {
      for (const auto& t : zdot_bar) adot_bar.push_back(layer.weight.transpose() * t);
    }
  }
  grad.inputs = std::move(abar);
  return grad;
}

std::vector<Eigen::MatrixXd> unit_seeds(int input_dim, Eigen::Index batch) {
  std::vector<Eigen::MatrixXd> seeds;
  for (int k = 0; k < input_dim; ++k) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(input_dim, batch);
    s.row(k).setOnes();
    seeds.push_back(std::move(s));
  }
  return seeds;
}

LossAndGradient loss_gradient(const Mlp& net, const Eigen::MatrixXd& inputs, std::span<const Eigen::MatrixXd> seeds,
                              const TapeLoss& loss) {
  const MlpTape tape = net.record(inputs, seeds);
  Eigen::MatrixXd ybar = Eigen::MatrixXd::Zero(tape.output.rows(), tape.output.cols());
  std::vector<Eigen::MatrixXd> ydot_bar;
  LossAndGradient out;
  out.value = loss(tape, ybar, ydot_bar);
  out.gradient = net.backward(tape, ybar, ydot_bar).params;
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kCheckpointMagic = "DDGANCK1";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     std::span<const Mlp* const> nets) {
  detail::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(nets.size()));
  w.u64(header.seed);
  w.u64(header.epoch);
  for (const Mlp* net : nets) {
    const MlpSpec& s = net->spec();
    w.i32(s.input_dim);
    w.i32(s.output_dim);
    w.i32(s.hidden_layers);
    w.i32(s.units);
    w.i32(static_cast<std::int32_t>(s.activation.kind));
    w.f64(s.activation.alpha);
    w.u64(net->parameter_count());
    const Eigen::VectorXd theta = net->flatten();
    for (Eigen::Index i = 0; i < theta.size(); ++i) w.f64(theta[i]);
  }
  w.u64(detail::fnv1a(w.bytes()));
  if (!detail::write_file(path, w.bytes())) throw IoError("cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (!bytes) throw IoError("cannot open checkpoint " + path.string());
  const std::string_view view(*bytes);
  if (view.size() < kCheckpointMagic.size() + 8 || view.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw IoError("not a checkpoint file: " + path.string());
  }
  detail::ByteReader tail(view.substr(view.size() - 8));
  if (detail::fnv1a(view.substr(0, view.size() - 8)) != tail.u64()) {
    throw IoError("checkpoint checksum mismatch: " + path.string());
  }
  detail::ByteReader r(view.substr(kCheckpointMagic.size(), view.size() - 8 - kCheckpointMagic.size()));
  if (r.u32() != kCheckpointVersion) throw IoError("unsupported checkpoint version");
  const std::uint32_t count = r.u32();
  Checkpoint ck;
  ck.header.seed = r.u64();
  ck.header.epoch = r.u64();
  for (std::uint32_t n = 0; n < count && r.ok(); ++n) {
    MlpSpec s;
    s.input_dim = r.i32();
    s.output_dim = r.i32();
    s.hidden_layers = r.i32();
    s.units = r.i32();
    const std::int32_t kind = r.i32();
    if (kind < 0 || kind > static_cast<std::int32_t>(Activation::identity)) throw IoError("bad activation in checkpoint");
    s.activation.kind = static_cast<Activation>(kind);
    s.activation.alpha = r.f64();
    const std::uint64_t n_params = r.u64();
    if (!r.ok()) break;
    Mlp net(s);
    if (n_params != net.parameter_count() || n_params > r.remaining() / 8) {
      throw IoError("checkpoint parameter count does not match its network spec");
    }
    Eigen::VectorXd theta(static_cast<Eigen::Index>(n_params));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = r.f64();
    net.unflatten(theta);
    ck.nets.push_back(std::move(net));
  }
  if (!r.ok() || r.remaining() != 0) throw IoError("malformed checkpoint " + path.string());
  return ck;
}

}  // namespace ddgan
