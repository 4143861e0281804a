#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ddgan/mlp.hpp"
#include "ddgan/phase_space.hpp"

namespace ddgan {

enum class AdversarialMode { wgan_gp, vanilla };

/// What the critic sees of a phase state: whitened coordinates R z or raw Voigt z.
enum class CriticInput { whitened, raw };

class CriticFeatures {
 public:
  CriticFeatures(CriticInput mode, const MetricMatrix& metric);

  CriticInput mode() const noexcept { return mode_; }
  /// Linear map z -> y.
  const Matrix6d& transform() const noexcept { return transform_; }
  Vector6d apply(const PhaseState& z) const { return transform_ * z.packed(); }
  Eigen::MatrixXd apply(std::span<const PhaseState> zs) const;  // 6 x B

 private:
  CriticInput mode_;
  Matrix6d transform_;
};

struct CriticSpec {
  MlpSpec net{6, 1, 3, 16, {Activation::leaky_relu, 0.2}};
  /// Terminal sigmoid, used only by the vanilla objective.
  bool sigmoid_output = false;
};

class Critic {
 public:
  explicit Critic(CriticSpec spec = {});
  Critic(Mlp net, bool sigmoid_output);
  static Critic initialized(CriticSpec spec, std::uint64_t seed);

  const Mlp& net() const noexcept { return net_; }
  Mlp& net() noexcept { return net_; }
  bool sigmoid_output() const noexcept { return sigmoid_output_; }

  /// Raw network output (logit when sigmoid_output), one per column of y.
  Eigen::RowVectorXd logits(const Eigen::MatrixXd& y) const;
  /// D(y): the raw output in WGAN mode, sigmoid(logit) otherwise.
  Eigen::RowVectorXd scores(const Eigen::MatrixXd& y) const;

 private:
  Mlp net_;
  bool sigmoid_output_ = false;
};

// Vanilla GAN ----------------------------------------------------------------

inline constexpr double kProbabilityClamp = 1e-7;

/// E[ln D(real)] + E[ln(1 - D(fake))] from discriminator probabilities. Values
/// outside [1e-7, 1 - 1e-7] are clamped and a warning is logged.
double vanilla_gan_loss(std::span<const double> d_real, std::span<const double> d_fake);
double vanilla_gan_loss(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake);

// WGAN -----------------------------------------------------------------------

/// Both entries are minimized by their owner:
///   critic    = E[D(fake)] - E[D(real)]          (the critic maximizes E[D(real)] - E[D(fake)])
///   generator = E[D(real)] - E[D(fake)] + L_C    (the E[D(real)] term is generator-independent)
struct WganLosses {
  double critic = 0.0;
  double generator = 0.0;
};

WganLosses wgan_loss(std::span<const double> d_real, std::span<const double> d_fake, double physics_loss_value);
WganLosses wgan_loss(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                     double physics_loss_value);

// Gradient penalty -------------------------------------------------------------

struct GpSample {
  double delta = 0.0;
  Vector6d mix = Vector6d::Zero();
};

/// delta_i ~ U[0, 1) for pair i of critic step `step`.
std::vector<double> draw_deltas(std::size_t n, std::uint64_t seed, std::uint64_t step);

GpSample interpolate(const Vector6d& real, const Vector6d& fake, double delta);
Eigen::MatrixXd interpolate(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake, std::span<const double> deltas);

struct ValueAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;  // flattened critic parameters; empty if not requested
};

/// E[(|grad_y D(y~)|_2 - 1)^2] over the mixes y~ = delta y_real + (1 - delta) y_fake.
ValueAndGradient gradient_penalty(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                  std::span<const double> deltas, bool with_gradient = false);

// Combined critic objectives ---------------------------------------------------

struct CriticObjective {
  double adversarial = 0.0;  // E[D(fake)] - E[D(real)], or the negated vanilla objective
  double penalty = 0.0;      // GP (WGAN-GP only)
  double total = 0.0;        // adversarial + gp_weight * penalty
  Eigen::VectorXd gradient;
};

/// The critic's loss for WGAN-GP: E[D(fake)] - E[D(real)] + gp_weight * GP.
CriticObjective wgan_gp_objective(const Critic& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                                  std::span<const double> deltas, double gp_weight, bool with_gradient = true);

/// The critic's loss for the vanilla GAN: -(E[ln D(real)] + E[ln(1 - D(fake))]).
CriticObjective vanilla_critic_objective(const Critic& critic, const Eigen::MatrixXd& real,
                                         const Eigen::MatrixXd& fake, bool with_gradient = true);

/// The generator-dependent adversarial term and its derivative with respect to
/// the critic inputs (6 x B):
///   wgan_gp: -E[D(fake)]           vanilla: E[ln(1 - D(fake))]
struct GeneratorTerm {
  double value = 0.0;
  Eigen::MatrixXd input_gradient;
};

GeneratorTerm generator_adversarial_term(const Critic& critic, const Eigen::MatrixXd& fake, AdversarialMode mode);

}  // namespace ddgan
