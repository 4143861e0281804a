#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ddgan/adversarial.hpp"
#include "ddgan/generator.hpp"
#include "ddgan/material.hpp"
#include "ddgan/trainer.hpp"

namespace ddgan {

/// Everything a benchmark run needs. Defaults reproduce the published setup:
/// Table-style material parameters, 100^3 data points with strain std 0.005,
/// 4 x 64 hardswish generator nets, 3 x 16 leaky-ReLU(0.2) critic, Adam(0.02,
/// betas 0.5/0.999), one-cycle over 200 steps, 200 epochs, 128^2 Sobol
/// collocation points and 256^2 uniform test points.
struct RunConfig {
  MaterialParams material{};
  std::size_t dataset_size = 1'000'000;
  double dataset_std = 0.005;
  std::uint64_t data_seed = 0;

  GeneratorSpec generator{};
  CriticSpec critic{};
  TrainConfig train{};  // train.seed also seeds network initialization

  std::size_t collocation = 128 * 128;
  std::size_t test_points = 256 * 256;
  std::uint64_t test_seed = 1;
  std::size_t boundary_per_edge = 64;
  bool dump_points = false;

  std::filesystem::path out_dir = "run";
  std::optional<std::filesystem::path> data_path;
  std::optional<std::filesystem::path> checkpoint_path;

  std::filesystem::path data_file() const { return data_path.value_or(out_dir / "dataset.bin"); }
  std::filesystem::path checkpoint_file() const { return checkpoint_path.value_or(out_dir / "checkpoint.bin"); }
  std::filesystem::path log_file() const { return out_dir / "train_log.csv"; }
  std::filesystem::path fields_file() const { return out_dir / "fields.csv"; }
  std::filesystem::path summary_file() const { return out_dir / "summary.json"; }

  /// Sets one dotted key, e.g. "train.epochs" or "material.E". Throws ConfigError
  /// for unknown keys and unparsable values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

/// `key = value` lines; blank lines and '#' comments are ignored.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace ddgan
