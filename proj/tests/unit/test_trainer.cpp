#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ddgan/error.hpp"
#include "ddgan/material.hpp"
#include "ddgan/optim.hpp"
#include "ddgan/trainer.hpp"
#include "support.hpp"

namespace ddgan {
namespace {

TEST(Adam, ZeroGradientLeavesParameters) {
  AdamState s(3, {});
  Eigen::VectorXd p(3);
  p << 1, -2, 3;
  const Eigen::VectorXd before = p;
  adam_step(s, p, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.t, 1u);
}

TEST(Adam, FirstStepIsLearningRate) {
  AdamState s(1, {0.02, 0.5, 0.999, 1e-8});
  Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 0.7);
  adam_step(s, p, Eigen::VectorXd::Constant(1, 1.0));
  // m_hat = 1, v_hat = 1: step = 0.02 / (1 + 1e-8)
  EXPECT_NEAR(p[0], 0.7 - 0.02 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, FirstStepOpposesGradientSign) {
  AdamState s(4, {});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd g(4);
  g << 3.0, -0.001, 1e5, -7.0;
  adam_step(s, p, g);
  for (int i = 0; i < 4; ++i) EXPECT_LT(p[i] * g[i], 0.0);
}

TEST(Adam, SecondStepHandComputed) {
  AdamState s(1, {0.1, 0.5, 0.999, 1e-8});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  adam_step(s, p, Eigen::VectorXd::Constant(1, 1.0));
  adam_step(s, p, Eigen::VectorXd::Constant(1, 3.0));
  const double m = 0.5 * 0.5 + 0.5 * 3.0, v = 0.999 * 0.001 + 0.001 * 9.0;
  const double mh = m / (1 - 0.25), vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], -0.1 / (1 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8), 1e-14);
}

TEST(Adam, NonFiniteGradientAborts) {
  AdamState s(2, {});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd g(2);
  g << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(s, p, g), DivergenceError);
  EXPECT_THROW(adam_step(s, p, Eigen::VectorXd::Zero(3)), InvalidInput);
}

TEST(Adam, ConfigValidation) {
  EXPECT_THROW((AdamConfig{0.01, 1.0, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{0.01, 0.5, -0.1, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{-1.0, 0.5, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_NO_THROW(AdamConfig{}.validate());
}

TEST(OneCycle, Landmarks) {
  const OneCycleSchedule s;
  EXPECT_NEAR(lr_at(0, s), 0.0008, 1e-18);
  EXPECT_NEAR(lr_at(60, s), 0.02, 1e-18);
  EXPECT_NEAR(lr_at(30, s), 0.0008 + 0.5 * (0.02 - 0.0008), 1e-15);
  EXPECT_NEAR(lr_at(200, s), 0.02 / 1e4, 1e-18);
  EXPECT_EQ(lr_at(500, s), lr_at(200, s));
  // Cosine midpoint of the decay phase.
  EXPECT_NEAR(lr_at(130, s), 0.5 * (0.02 + 2e-6), 1e-15);
}

TEST(OneCycle, MonotoneAfterPeak) {
  const OneCycleSchedule s;
  for (std::size_t k = 0; k < 60; ++k) EXPECT_LT(lr_at(k, s), lr_at(k + 1, s));
  for (std::size_t k = 60; k < 250; ++k) EXPECT_LE(lr_at(k + 1, s), lr_at(k, s));
}

TEST(OneCycle, Validation) {
  EXPECT_THROW((OneCycleSchedule{0.02, 0, 0.3, 25, 1e4}.validate()), ConfigError);
  EXPECT_THROW((OneCycleSchedule{0.02, 10, 1.0, 25, 1e4}.validate()), ConfigError);
  EXPECT_THROW((OneCycleSchedule{-1, 10, 0.3, 25, 1e4}.validate()), ConfigError);
}

struct Toy {
  GeneratorSpec gen_spec;
  CriticSpec critic_spec;
  MaterialDatabase db = synthesize_dataset(1000, 0.005, 0, {});
  std::vector<Point2> collocation = sample_interior(16 * 16).points;
  SoftBoundary boundary;
  TrainConfig config;

  Toy() {
    gen_spec.net = {2, 1, 2, 16, {Activation::hardswish, 0}};
    boundary = SoftBoundary::from(sample_boundary(16), gen_spec);
    config.epochs = 3;
    config.batch_size = 64;
    config.seed = 11;
  }
};

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.critic_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.gp_weight = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  EXPECT_EQ(c.effective_schedule().total_steps, 200u);
}

TEST(Train, ZeroEpochsIsANoOp) {
  Toy t;
  t.config.epochs = 0;
  Generator g = Generator::initialized(t.gen_spec, 1);
  Critic c = Critic::initialized(t.critic_spec, 1);
  const Eigen::VectorXd g0 = g.flatten(), c0 = c.net().flatten();
  const TrainingLog log = train(t.config, g, c, t.db, t.collocation, t.boundary);
  EXPECT_TRUE(log.epochs.empty());
  EXPECT_EQ(g.flatten(), g0);
  EXPECT_EQ(c.net().flatten(), c0);
}

TEST(Train, DeterministicLogsAndParameters) {
  Toy t;
  auto run = [&] {
    Generator g = Generator::initialized(t.gen_spec, 1);
    Critic c = Critic::initialized(t.critic_spec, 1);
    const TrainingLog log = train(t.config, g, c, t.db, t.collocation, t.boundary);
    return std::tuple{log.to_csv(), g.flatten(), c.net().flatten()};
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(std::get<0>(a), std::get<0>(b));
  EXPECT_EQ(std::get<1>(a), std::get<1>(b));
  EXPECT_EQ(std::get<2>(a), std::get<2>(b));
}

TEST(Train, RecordsOneRowPerEpochWithRanges) {
  Toy t;
  Generator g = Generator::initialized(t.gen_spec, 2);
  Critic c = Critic::initialized(t.critic_spec, 2);
  std::size_t callbacks = 0;
  const TrainingLog log =
      train(t.config, g, c, t.db, t.collocation, t.boundary, [&](const EpochRecord&) { ++callbacks; });
  ASSERT_EQ(log.epochs.size(), 3u);
  EXPECT_EQ(callbacks, 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    const EpochRecord& r = log.epochs[e];
    EXPECT_EQ(r.epoch, e + 1);
    EXPECT_LE(r.d_loss_min, r.d_loss_mean);
    EXPECT_LE(r.d_loss_mean, r.d_loss_max);
    EXPECT_LE(r.g_loss_min, r.g_loss_mean);
    EXPECT_LE(r.g_loss_mean, r.g_loss_max);
    EXPECT_GT(r.mean_distance, 0.0);
    EXPECT_GE(r.physics_loss, 0.0);
  }
}

TEST(Train, VanillaModeRuns) {
  Toy t;
  t.config.mode = AdversarialMode::vanilla;
  t.critic_spec.sigmoid_output = true;
  Generator g = Generator::initialized(t.gen_spec, 3);
  Critic c = Critic::initialized(t.critic_spec, 3);
  const TrainingLog log = train(t.config, g, c, t.db, t.collocation, t.boundary);
  ASSERT_EQ(log.epochs.size(), 3u);
  for (const EpochRecord& r : log.epochs) EXPECT_TRUE(std::isfinite(r.d_loss_mean) && std::isfinite(r.g_loss_mean));
  Critic wrong = Critic::initialized(CriticSpec{}, 3);
  EXPECT_THROW(train(t.config, g, wrong, t.db, t.collocation, t.boundary), ConfigError);
}

TEST(Train, DivergenceGuard) {
  Toy t;
  t.gen_spec.traction.amplitude = 1e9;
  t.boundary = SoftBoundary::from(sample_boundary(16), t.gen_spec);
  Generator g = Generator::initialized(t.gen_spec, 1);
  Critic c = Critic::initialized(t.critic_spec, 1);
  EXPECT_THROW(train(t.config, g, c, t.db, t.collocation, t.boundary), DivergenceError);
}

TEST(Train, ToyRunReducesDistance) {
  Toy t;
  t.gen_spec = GeneratorSpec{};
  t.boundary = SoftBoundary::from(sample_boundary(64), t.gen_spec);
  t.config.epochs = 30;
  t.config.batch_size = 16;
  Generator g = Generator::initialized(t.gen_spec, 0);
  Critic c = Critic::initialized(t.critic_spec, 0);
  const TrainingLog log = train(t.config, g, c, t.db, t.collocation, t.boundary);
  ASSERT_EQ(log.epochs.size(), 30u);
  EXPECT_LT(log.epochs.back().mean_distance, log.epochs.front().mean_distance);
  EXPECT_GT(log.epochs.back().mean_distance, 0.0);
  EXPECT_LT(log.epochs.back().physics_loss, log.epochs.front().physics_loss);
}

TEST(TrainingLog, CsvHeaderAndLosslessRoundTrip) {
  TrainingLog log;
  log.epochs.push_back({1, 0.1, -0.2, 0.3, 1.0 / 3.0, -1e-300, 1e300, 123.456, std::sqrt(2.0)});
  log.epochs.push_back({2, -5, -6, -4, 7, 6, 8, 0.0, 0.5});
  const std::string csv = log.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,d_loss_mean,d_loss_min,d_loss_max,g_loss_mean,g_loss_min,g_loss_max,phys_loss,mean_distance");
  const TrainingLog back = TrainingLog::parse_csv(csv);
  EXPECT_EQ(back.epochs, log.epochs);
  EXPECT_THROW(TrainingLog::parse_csv("nope\n"), IoError);
}

TEST(MeanDistance, NonNegativeAndZeroOnData) {
  Toy t;
  const Generator g(t.gen_spec);  // zero parameters
  const double d = mean_distance(g, t.db, t.collocation);
  EXPECT_GT(d, 0.0);
  // A database holding exactly the generated states.
  std::vector<PhaseState> states;
  for (const GeneratorOutput& o : g.evaluate(t.collocation)) states.push_back(o.state());
  const MaterialDatabase exact(states, t.db.metric());
  EXPECT_EQ(mean_distance(g, exact, t.collocation), 0.0);
}

TEST(TrainingCheckpoint, RoundTripAndSpecMismatch) {
  Toy t;
  const auto dir = testing::scratch_dir("training_checkpoint");
  const Generator g = Generator::initialized(t.gen_spec, 4);
  const Critic c = Critic::initialized(t.critic_spec, 4);
  save_training_checkpoint(dir / "ck.bin", 4, 17, g, c);
  const TrainingCheckpoint ck = load_training_checkpoint(dir / "ck.bin", t.gen_spec, t.critic_spec);
  EXPECT_EQ(ck.header, (CheckpointHeader{4, 17}));
  EXPECT_EQ(ck.generator.flatten(), g.flatten());
  EXPECT_EQ(ck.critic.net().flatten(), c.net().flatten());
  EXPECT_THROW(load_training_checkpoint(dir / "ck.bin", GeneratorSpec{}, t.critic_spec), ConfigError);
  EXPECT_THROW(load_training_checkpoint(dir / "missing.bin", t.gen_spec, t.critic_spec), IoError);
}

}  // namespace
}  // namespace ddgan
