#include "ddgan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "ddgan/error.hpp"
#include "ddgan/rng.hpp"
#include "detail/bytes.hpp"

namespace ddgan {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (critic_steps == 0) throw ConfigError("train: critic_steps must be positive");
  if (!(gp_weight >= 0.0) || !std::isfinite(gp_weight)) throw ConfigError("train: gp_weight must be >= 0");
  adam.validate();
  if (epochs > 0) effective_schedule().validate();
}

OneCycleSchedule TrainConfig::effective_schedule() const {
  OneCycleSchedule s = schedule;
  if (s.total_steps == 0) s.total_steps = std::max<std::size_t>(epochs, 1);
  return s;
}

namespace {

const char* kLogHeader = "epoch,d_loss_mean,d_loss_min,d_loss_max,g_loss_mean,g_loss_min,g_loss_max,phys_loss,mean_distance";

void guard(double value, const char* what, std::size_t epoch) {
  if (!std::isfinite(value) || std::abs(value) > kDivergenceLimit) {
    std::ostringstream msg;
    msg << "training diverged: " << what << " = " << value << " in epoch " << epoch;
    throw DivergenceError(msg.str());
  }
}

struct Range {
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch, bool shuffle) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!shuffle) return order;
  const CounterRng rng(seed, rng_streams::shuffle);
  for (std::size_t i = n; i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.uniform(static_cast<std::uint64_t>(epoch) * n + i) *
                                            static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  return order;
}

}  // namespace

TrainingLog train(const TrainConfig& config, Generator& generator, Critic& critic, const MaterialDatabase& database,
                  std::span<const Point2> collocation, const SoftBoundary& boundary, const EpochCallback& on_epoch) {
  config.validate();
  TrainingLog log;
  if (config.epochs == 0) return log;
  if (collocation.empty()) throw InvalidInput("train: empty collocation set");
  if (database.empty()) throw DatasetError(DatasetError::Kind::empty, "train: empty database");
  const bool wgan = config.mode == AdversarialMode::wgan_gp;
  if (wgan == critic.sigmoid_output()) {
    throw ConfigError(wgan ? "train: WGAN-GP needs an unbounded critic" : "train: vanilla GAN needs a sigmoid critic");
  }

  const CriticFeatures features(config.critic_input, database.metric());
  const OneCycleSchedule schedule = config.effective_schedule();
  AdamState gen_opt(generator.parameter_count(), config.adam);
  AdamState critic_opt(critic.net().parameter_count(), config.adam);
  Eigen::VectorXd gen_theta = generator.flatten();
  Eigen::VectorXd critic_theta = critic.net().flatten();

  const std::size_t n = collocation.size();
  const std::size_t batch_size = std::min(config.batch_size, n);
  std::uint64_t critic_step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, schedule);
    gen_opt.config.lr = lr;
    critic_opt.config.lr = lr;

    const std::vector<std::size_t> order = epoch_order(n, config.seed, epoch, config.shuffle);
    Range d_range, g_range, phys_range;
    double distance_sum = 0.0;

    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t b = std::min(batch_size, n - start);
      std::vector<Point2> points;
      points.reserve(b + boundary.size());
      for (std::size_t i = 0; i < b; ++i) points.push_back(collocation[order[start + i]]);
      points.insert(points.end(), boundary.points.begin(), boundary.points.end());

      const Generator::Pass pass = generator.forward(points);
      std::vector<PhaseState> generated(b);
      for (std::size_t i = 0; i < b; ++i) generated[i] = pass.fields.state(static_cast<Eigen::Index>(i));
      const std::vector<NearestResult> nearest = database.nearest_batch(generated);
      std::vector<PhaseState> data(b);
      for (std::size_t i = 0; i < b; ++i) {
        data[i] = nearest[i].state;
        distance_sum += std::sqrt(nearest[i].sq_dist);
      }
      const Eigen::MatrixXd real = features.apply(data);
      const Eigen::MatrixXd fake = features.apply(generated);

      double d_loss = 0.0;
      for (std::size_t c = 0; c < config.critic_steps; ++c) {
        const CriticObjective obj =
            wgan ? wgan_gp_objective(critic, real, fake, draw_deltas(b, config.seed, critic_step), config.gp_weight)
                 : vanilla_critic_objective(critic, real, fake);
        ++critic_step;
        guard(obj.total, "critic loss", epoch + 1);
        d_loss = obj.total;
        adam_step(critic_opt, critic_theta, obj.gradient);
        critic.net().unflatten(critic_theta);
      }

      FieldBatch adjoint = FieldBatch::zeros(pass.fields.size());
      const PhysicsTerms phys = accumulate_physics_loss(pass.fields, static_cast<Eigen::Index>(b), boundary, &adjoint);
      const GeneratorTerm adv = generator_adversarial_term(critic, fake, config.mode);
      const Matrix6d& t = features.transform();
      for (std::size_t i = 0; i < b; ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        adjoint.add_state_adjoint(col, t.transpose() * adv.input_gradient.col(col));
      }
      double g_loss = adv.value + phys.total();
      if (wgan) g_loss += critic.scores(real).mean();
      guard(phys.total(), "physics loss", epoch + 1);
      guard(g_loss, "generator loss", epoch + 1);

      adam_step(gen_opt, gen_theta, generator.backward(pass, adjoint));
      generator.unflatten(gen_theta);

      d_range.add(d_loss);
      g_range.add(g_loss);
      phys_range.add(phys.total());
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.d_loss_mean = d_range.mean();
    rec.d_loss_min = d_range.min;
    rec.d_loss_max = d_range.max;
    rec.g_loss_mean = g_range.mean();
    rec.g_loss_min = g_range.min;
    rec.g_loss_max = g_range.max;
    rec.physics_loss = phys_range.mean();
    rec.mean_distance = distance_sum / static_cast<double>(n);
    guard(rec.mean_distance, "mean distance", rec.epoch);
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return log;
}

double mean_distance(const Generator& generator, const MaterialDatabase& database, std::span<const Point2> points) {
  if (points.empty()) throw InvalidInput("mean_distance: no points");
  const Generator::Pass pass = generator.forward(points);
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += std::sqrt(database.nearest(pass.fields.state(static_cast<Eigen::Index>(i))).sq_dist);
  }
  return sum / static_cast<double>(points.size());
}

std::string TrainingLog::to_csv() const {
  std::ostringstream out;
  out << kLogHeader << '\n' << std::setprecision(17);
  for (const EpochRecord& r : epochs) {
    out << r.epoch << ',' << r.d_loss_mean << ',' << r.d_loss_min << ',' << r.d_loss_max << ',' << r.g_loss_mean << ','
        << r.g_loss_min << ',' << r.g_loss_max << ',' << r.physics_loss << ',' << r.mean_distance << '\n';
  }
  return out.str();
}

void TrainingLog::write_csv(const std::filesystem::path& path) const {
  if (!detail::write_file(path, to_csv())) throw IoError("cannot write " + path.string());
}

TrainingLog TrainingLog::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader) throw IoError("training log: unexpected header");
  TrainingLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("training log: bad number '" + cell + "'");
      }
    }
    if (v.size() != 9) throw IoError("training log: expected 9 columns");
    EpochRecord r;
    r.epoch = static_cast<std::size_t>(v[0]);
    r.d_loss_mean = v[1];
    r.d_loss_min = v[2];
    r.d_loss_max = v[3];
    r.g_loss_mean = v[4];
    r.g_loss_min = v[5];
    r.g_loss_max = v[6];
    r.physics_loss = v[7];
    r.mean_distance = v[8];
    log.epochs.push_back(r);
  }
  return log;
}

void save_training_checkpoint(const std::filesystem::path& path, std::uint64_t seed, std::uint64_t epoch,
                              const Generator& generator, const Critic& critic) {
  std::vector<const Mlp*> nets;
  for (const Mlp& net : generator.nets()) nets.push_back(&net);
  nets.push_back(&critic.net());
  save_checkpoint(path, {seed, epoch}, nets);
}

TrainingCheckpoint load_training_checkpoint(const std::filesystem::path& path, const GeneratorSpec& gen_spec,
                                            const CriticSpec& critic_spec) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.nets.size() != kFieldCount + 1) throw IoError("checkpoint does not hold a generator and a critic");
  for (int f = 0; f < kFieldCount; ++f) {
    if (!(ck.nets[f].spec() == gen_spec.net)) throw ConfigError("checkpoint generator spec does not match the configuration");
  }
  if (!(ck.nets.back().spec() == critic_spec.net)) throw ConfigError("checkpoint critic spec does not match the configuration");
  TrainingCheckpoint out{ck.header, Generator(gen_spec), Critic(std::move(ck.nets.back()), critic_spec.sigmoid_output)};
  for (int f = 0; f < kFieldCount; ++f) out.generator.nets()[f] = std::move(ck.nets[f]);
  return out;
}

}  // namespace ddgan
