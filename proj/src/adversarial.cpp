#include "ddgan/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "ddgan/error.hpp"
#include "ddgan/rng.hpp"

namespace ddgan {
namespace {

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

void require_same_batch(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake) {
  if (real.rows() != 6 || fake.rows() != 6) throw InvalidInput("critic batches must have 6 rows");
  if (real.cols() != fake.cols()) throw InvalidInput("real and fake batches differ in length");
  if (real.cols() == 0) throw InvalidInput("empty critic batch");
}

std::span<const double> as_span(const Eigen::RowVectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

CriticFeatures::CriticFeatures(CriticInput mode, const MetricMatrix& metric)
    : mode_(mode), transform_(mode == CriticInput::whitened ? metric.r() : Matrix6d::Identity()) {}

Eigen::MatrixXd CriticFeatures::apply(std::span<const PhaseState> zs) const {
  Eigen::MatrixXd y(6, static_cast<Eigen::Index>(zs.size()));
  for (std::size_t i = 0; i < zs.size(); ++i) y.col(static_cast<Eigen::Index>(i)) = apply(zs[i]);
  return y;
}

Critic::Critic(CriticSpec spec) : net_(spec.net), sigmoid_output_(spec.sigmoid_output) {
  if (spec.net.input_dim != 6 || spec.net.output_dim != 1) throw InvalidInput("critic must map 6 inputs to 1 output");
}

Critic::Critic(Mlp net, bool sigmoid_output) : net_(std::move(net)), sigmoid_output_(sigmoid_output) {
  if (net_.spec().input_dim != 6 || net_.spec().output_dim != 1) {
    throw InvalidInput("critic must map 6 inputs to 1 output");
  }
}

Critic Critic::initialized(CriticSpec spec, std::uint64_t seed) {
  Critic c(spec);
  c.net_ = Mlp::glorot(spec.net, seed, (rng_streams::init << 8) | 0x80);
  return c;
}

Eigen::RowVectorXd Critic::logits(const Eigen::MatrixXd& y) const { return net_.record(y).output.row(0); }

Eigen::RowVectorXd Critic::scores(const Eigen::MatrixXd& y) const {
  Eigen::RowVectorXd s = logits(y);
  if (sigmoid_output_) s = s.unaryExpr([](double v) { return sigmoid(v); });
  return s;
}

double vanilla_gan_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw InvalidInput("vanilla_gan_loss: empty batch");
  bool clamped = false;
  auto clamp = [&clamped](double d) {
    if (!(d >= kProbabilityClamp && d <= 1.0 - kProbabilityClamp)) {
      clamped = true;
      return std::clamp(std::isnan(d) ? 0.5 : d, kProbabilityClamp, 1.0 - kProbabilityClamp);
    }
    return d;
  };
  double real_term = 0.0;
  for (double d : d_real) real_term += std::log(clamp(d));
  double fake_term = 0.0;
  for (double d : d_fake) fake_term += std::log(1.0 - clamp(d));
  if (clamped) std::clog << "warning: discriminator output clamped to [1e-7, 1 - 1e-7]\n";
  return real_term / static_cast<double>(d_real.size()) + fake_term / static_cast<double>(d_fake.size());
}

double vanilla_gan_loss(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake) {
  if (!critic.sigmoid_output()) throw InvalidInput("vanilla_gan_loss needs a critic with a terminal sigmoid");
  const Eigen::RowVectorXd dr = critic.scores(real);
  const Eigen::RowVectorXd df = critic.scores(fake);
  return vanilla_gan_loss(as_span(dr), as_span(df));
}

WganLosses wgan_loss(std::span<const double> d_real, std::span<const double> d_fake, double physics_loss_value) {
  if (d_real.size() != d_fake.size()) throw InvalidInput("wgan_loss: batch lengths differ");
  if (d_real.empty()) throw InvalidInput("wgan_loss: empty batch");
  double real_mean = 0.0;
  for (double d : d_real) real_mean += d;
  real_mean /= static_cast<double>(d_real.size());
  double fake_mean = 0.0;
  for (double d : d_fake) fake_mean += d;
  fake_mean /= static_cast<double>(d_fake.size());
  return {fake_mean - real_mean, real_mean - fake_mean + physics_loss_value};
}

WganLosses wgan_loss(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                     double physics_loss_value) {
  require_same_batch(real, fake);
  const Eigen::RowVectorXd dr = critic.scores(real);
  const Eigen::RowVectorXd df = critic.scores(fake);
  return wgan_loss(as_span(dr), as_span(df), physics_loss_value);
}

std::vector<double> draw_deltas(std::size_t n, std::uint64_t seed, std::uint64_t step) {
  const CounterRng rng(seed, rng_streams::gradient_penalty);
  std::vector<double> deltas(n);
  for (std::size_t i = 0; i < n; ++i) deltas[i] = rng.uniform(step * n + i);
  return deltas;
}

GpSample interpolate(const Vector6d& real, const Vector6d& fake, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidInput("interpolate: delta must lie in [0, 1]");
  GpSample s;
  s.delta = delta;
  s.mix = delta * real + (1.0 - delta) * fake;
  return s;
}

Eigen::MatrixXd interpolate(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake, std::span<const double> deltas) {
  require_same_batch(real, fake);
  if (static_cast<Eigen::Index>(deltas.size()) != real.cols()) throw InvalidInput("interpolate: one delta per pair");
  Eigen::MatrixXd mix(6, real.cols());
  for (Eigen::Index i = 0; i < real.cols(); ++i) {
    mix.col(i) = interpolate(real.col(i), fake.col(i), deltas[static_cast<std::size_t>(i)]).mix;
  }
  return mix;
}

ValueAndGradient gradient_penalty(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                  std::span<const double> deltas, bool with_gradient) {
  if (critic.sigmoid_output()) throw InvalidInput("gradient_penalty expects an unbounded critic");
  const Eigen::MatrixXd mix = interpolate(real, fake, deltas);
  const Eigen::Index batch = mix.cols();
  const auto seeds = unit_seeds(6, batch);

  auto penalty = [batch](const MlpTape& tape, Eigen::MatrixXd&, std::vector<Eigen::MatrixXd>& tangent_bar) {
    double total = 0.0;
    tangent_bar.assign(6, Eigen::MatrixXd::Zero(1, batch));
    const double w = 1.0 / static_cast<double>(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
      double sq = 0.0;
      for (int k = 0; k < 6; ++k) sq += tape.output_tangents[k](0, i) * tape.output_tangents[k](0, i);
      const double norm = std::sqrt(sq);
      total += w * (norm - 1.0) * (norm - 1.0);
      if (norm > 0.0) {
        const double scale = 2.0 * w * (norm - 1.0) / norm;
        for (int k = 0; k < 6; ++k) tangent_bar[k](0, i) = scale * tape.output_tangents[k](0, i);
      }
    }
    return total;
  };

  ValueAndGradient out;
  if (with_gradient) {
    const LossAndGradient lg = loss_gradient(critic.net(), mix, seeds, penalty);
    out.value = lg.value;
    out.gradient = lg.gradient;
  } else {
    const MlpTape tape = critic.net().record(mix, seeds);
    Eigen::MatrixXd unused;
    std::vector<Eigen::MatrixXd> unused_t;
    out.value = penalty(tape, unused, unused_t);
  }
  return out;
}

CriticObjective wgan_gp_objective(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                  std::span<const double> deltas, double gp_weight, bool with_gradient) {
  if (!(gp_weight >= 0.0)) throw InvalidInput("gradient penalty weight must be >= 0");
  if (critic.sigmoid_output()) throw InvalidInput("wgan_gp_objective expects an unbounded critic");
  require_same_batch(real, fake);
  const Eigen::Index batch = real.cols();
  const double w = 1.0 / static_cast<double>(batch);

  CriticObjective obj;
  const MlpTape real_tape = critic.net().record(real);
  const MlpTape fake_tape = critic.net().record(fake);
  obj.adversarial = fake_tape.output.mean() - real_tape.output.mean();
  if (gp_weight > 0.0) {
    const ValueAndGradient gp = gradient_penalty(critic, real, fake, deltas, with_gradient);
    obj.penalty = gp.value;
    if (with_gradient) obj.gradient = gp_weight * gp.gradient;
  } else {
    obj.penalty = gradient_penalty(critic, real, fake, deltas, false).value;
  }
  obj.total = obj.adversarial + gp_weight * obj.penalty;

  if (with_gradient) {
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(1, batch, w);
    Eigen::VectorXd g = critic.net().backward(fake_tape, ones).params - critic.net().backward(real_tape, ones).params;
    if (obj.gradient.size() == 0) {
      obj.gradient = std::move(g);
    } else {
      obj.gradient += g;
    }
  }
  return obj;
}

CriticObjective vanilla_critic_objective(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                         bool with_gradient) {
  if (!critic.sigmoid_output()) throw InvalidInput("vanilla objective needs a critic with a terminal sigmoid");
  require_same_batch(real, fake);
  const MlpTape real_tape = critic.net().record(real);
  const MlpTape fake_tape = critic.net().record(fake);
  const Eigen::RowVectorXd pr = real_tape.output.row(0).unaryExpr([](double s) { return sigmoid(s); });
  const Eigen::RowVectorXd pf = fake_tape.output.row(0).unaryExpr([](double s) { return sigmoid(s); });

  CriticObjective obj;
  obj.adversarial = -vanilla_gan_loss(as_span(pr), as_span(pf));
  obj.total = obj.adversarial;
  if (with_gradient) {
    // d/ds ln sigmoid(s) = 1 - sigmoid(s);  d/ds ln(1 - sigmoid(s)) = -sigmoid(s).
    const double w = 1.0 / static_cast<double>(real.cols());
    const Eigen::MatrixXd real_bar = (-w * (1.0 - pr.array())).matrix();
    const Eigen::MatrixXd fake_bar = (w * pf.array()).matrix();
    obj.gradient = critic.net().backward(real_tape, real_bar).params + critic.net().backward(fake_tape, fake_bar).params;
  }
  return obj;
}

GeneratorTerm generator_adversarial_term(const Critic& critic, const Eigen::MatrixXd& fake, AdversarialMode mode) {
  if (fake.rows() != 6 || fake.cols() == 0) throw InvalidInput("generator term: bad batch");
  const MlpTape tape = critic.net().record(fake);
  const double w = 1.0 / static_cast<double>(fake.cols());
  GeneratorTerm term;
  Eigen::MatrixXd out_bar(1, fake.cols());
  if (mode == AdversarialMode::wgan_gp) {
    term.value = -tape.output.mean();
    out_bar.setConstant(-w);
  } else {
    const Eigen::RowVectorXd p = tape.output.row(0).unaryExpr([](double s) { return sigmoid(s); });
    term.value = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) term.value += w * std::log(std::max(1.0 - p[i], kProbabilityClamp));
    out_bar = (-w * p.array()).matrix();
  }
  term.input_gradient = critic.net().backward(tape, out_bar).inputs;
  return term;
}

}  // namespace ddgan
