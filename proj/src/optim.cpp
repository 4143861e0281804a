#include "ddgan/optim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ddgan/error.hpp"

namespace ddgan {

void AdamConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("adam: learning rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

AdamState::AdamState(std::size_t n, AdamConfig cfg)
    : config(cfg), m(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))), v(m) {
  config.validate();
}

void adam_step(AdamState& s, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
  if (params.size() != s.m.size() || grad.size() != s.m.size()) throw InvalidInput("adam_step: shape mismatch");
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      std::ostringstream msg;
      msg << "adam_step: non-finite gradient entry " << i << " = " << grad[i] << " at step " << s.t + 1;
      throw DivergenceError(msg.str());
    }
  }
  const AdamConfig& c = s.config;
  s.t += 1;
  s.m = c.beta1 * s.m + (1.0 - c.beta1) * grad;
  s.v = c.beta2 * s.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.t));
  params.array() -= c.lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + c.eps);
}

void OneCycleSchedule::validate() const {
  if (!(max_lr > 0.0)) throw ConfigError("schedule: max_lr must be positive");
  if (total_steps == 0) throw ConfigError("schedule: total_steps must be positive");
  if (!(pct_start > 0.0 && pct_start < 1.0)) throw ConfigError("schedule: pct_start must lie in (0, 1)");
  if (!(div_factor > 0.0) || !(final_div_factor > 0.0)) throw ConfigError("schedule: factors must be positive");
}

double lr_at(std::size_t step, const OneCycleSchedule& s) {
  s.validate();
  const double initial = s.max_lr / s.div_factor;
  const double final_lr = s.max_lr / s.final_div_factor;
  const double peak_step = s.pct_start * static_cast<double>(s.total_steps);
  const auto k = static_cast<double>(step);
  if (k <= peak_step) return initial + (s.max_lr - initial) * k / peak_step;
  const double progress = std::min(1.0, (k - peak_step) / (static_cast<double>(s.total_steps) - peak_step));
  return final_lr + (s.max_lr - final_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace ddgan
