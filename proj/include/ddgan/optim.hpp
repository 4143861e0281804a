#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace ddgan {

struct AdamConfig {
  double lr = 0.02;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Adam with bias correction. The learning rate stored here is the one
/// adam_step uses; schedules overwrite it before each step.
struct AdamState {
  AdamState() = default;
  AdamState(std::size_t n, AdamConfig config);

  AdamConfig config;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t t = 0;
};

/// Throws DivergenceError (naming the first offending entry) on a non-finite gradient.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

/// Linear warm-up from max_lr / div_factor to max_lr over the first pct_start of
/// total_steps, then cosine decay to max_lr / final_div_factor. Steps past the
/// end hold the final value.
struct OneCycleSchedule {
  double max_lr = 0.02;
  std::size_t total_steps = 200;
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  void validate() const;
};

double lr_at(std::size_t step, const OneCycleSchedule& schedule);

}  // namespace ddgan
