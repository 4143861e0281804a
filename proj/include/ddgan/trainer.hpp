#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ddgan/adversarial.hpp"
#include "ddgan/dataset.hpp"
#include "ddgan/generator.hpp"
#include "ddgan/optim.hpp"

namespace ddgan {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 1024;
  std::size_t critic_steps = 5;  // critic updates per generator update
  double gp_weight = 10.0;
  AdamConfig adam{};  // adam.lr is replaced by the schedule every epoch
  /// total_steps == 0 means "one step per epoch over all epochs".
  OneCycleSchedule schedule{0.02, 0, 0.3, 25.0, 1e4};
  AdversarialMode mode = AdversarialMode::wgan_gp;
  CriticInput critic_input = CriticInput::whitened;
  std::uint64_t seed = 0;  // batch shuffling and gradient-penalty mixes
  bool shuffle = true;

  void validate() const;
  OneCycleSchedule effective_schedule() const;
};

/// Loss ranges over the batches of one epoch.
struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double d_loss_mean = 0.0, d_loss_min = 0.0, d_loss_max = 0.0;
  double g_loss_mean = 0.0, g_loss_min = 0.0, g_loss_max = 0.0;
  double physics_loss = 0.0;   // batch mean of L_C
  double mean_distance = 0.0;  // mean over collocation points of d(z, nearest data point)

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;

  /// epoch,d_loss_mean,d_loss_min,d_loss_max,g_loss_mean,g_loss_min,g_loss_max,phys_loss,mean_distance
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  static TrainingLog parse_csv(const std::string& text);
};

/// Training guard: any loss that is non-finite or exceeds this throws DivergenceError.
inline constexpr double kDivergenceLimit = 1e12;

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adversarial training. For each batch of collocation points: evaluate the
/// generator, look up the nearest data states, run `critic_steps` critic updates
/// on (nearest, generated) and one generator update on the adversarial term + L_C.
TrainingLog train(const TrainConfig& config, Generator& generator, Critic& critic, const MaterialDatabase& database,
                  std::span<const Point2> collocation, const SoftBoundary& boundary, const EpochCallback& on_epoch = {});

/// Mean of sqrt(squared whitened distance) from generated states to their nearest data state.
double mean_distance(const Generator& generator, const MaterialDatabase& database, std::span<const Point2> points);

/// Generator nets (Field order) followed by the critic net.
void save_training_checkpoint(const std::filesystem::path& path, std::uint64_t seed, std::uint64_t epoch,
                              const Generator& generator, const Critic& critic);

struct TrainingCheckpoint {
  CheckpointHeader header;
  Generator generator;
  Critic critic;
};

/// Throws IoError for unreadable or malformed files and ConfigError when the
/// stored networks do not match `gen_spec` / `critic_spec`.
TrainingCheckpoint load_training_checkpoint(const std::filesystem::path& path, const GeneratorSpec& gen_spec,
                                            const CriticSpec& critic_spec);

}  // namespace ddgan
