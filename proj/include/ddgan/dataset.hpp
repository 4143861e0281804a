#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ddgan/material.hpp"
#include "ddgan/phase_space.hpp"

namespace ddgan {

/// Provenance stored alongside a synthesized dataset.
struct DatasetMeta {
  std::uint64_t seed = 0;
  MaterialParams params{};
  double strain_std = 0.0;
  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct NearestResult {
  std::size_t index = 0;
  PhaseState state;
  double sq_dist = 0.0;  // squared Euclidean distance in whitened coordinates
};

/// Exact nearest-neighbour kd-tree over row-major 6-D points. Ties resolve to
/// the smallest index.
class KdTree {
 public:
  static constexpr int kDim = 6;

  KdTree() = default;
  /// `points` must outlive the tree.
  explicit KdTree(std::span<const double> points, std::size_t leaf_size = 12);

  bool empty() const noexcept { return count_ == 0; }

  /// Returns (index, squared distance).
  std::pair<std::size_t, double> nearest(const double* query) const;

 private:
  struct Node {
    // Leaves: [begin, end) into order_. Inner nodes: split_dim >= 0.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    int split_dim = -1;
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const double* q, double* offsets, double rd,
              std::size_t& best_index, double& best_dist) const;

  std::span<const double> points_;
  std::size_t count_ = 0;
  std::size_t leaf_size_ = 12;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// The finite material data set with its metric and a search index over the
/// whitened states. Immutable after construction.
class MaterialDatabase {
 public:
  MaterialDatabase(std::vector<PhaseState> states, MetricMatrix metric, DatasetMeta meta = {});

  MaterialDatabase(const MaterialDatabase& other);
  MaterialDatabase& operator=(const MaterialDatabase& other);
  MaterialDatabase(MaterialDatabase&&) noexcept = default;
  MaterialDatabase& operator=(MaterialDatabase&&) noexcept = default;

  std::size_t size() const noexcept { return states_.size(); }
  bool empty() const noexcept { return states_.empty(); }
  const std::vector<PhaseState>& states() const noexcept { return states_; }
  const MetricMatrix& metric() const noexcept { return metric_; }
  const DatasetMeta& meta() const noexcept { return meta_; }
  Vector6d whitened(std::size_t i) const;

  NearestResult nearest(const PhaseState& z) const;
  std::vector<NearestResult> nearest_batch(std::span<const PhaseState> zs) const;
  /// Exhaustive scan with the same distance arithmetic as the tree.
  NearestResult nearest_brute_force(const PhaseState& z) const;

 private:
  NearestResult result(std::size_t index, double sq_dist) const;

  std::vector<PhaseState> states_;
  MetricMatrix metric_;
  DatasetMeta meta_;
  std::vector<double> whitened_;
  KdTree tree_;
};

/// Binary layout, little-endian throughout:
///   char[8]  magic "DDGANDB1"
///   u32      version (1)        u32 reserved (0)
///   u64      n_e
///   f64[9]   metric C, row-major
///   u64      seed
///   f64[5]   E, nu, a, p, strain std
///   u64      FNV-1a 64 over every preceding byte and the payload
///   f64[6 n_e] payload (e_xx, e_yy, g_xy, s_xx, s_yy, s_xy) per state
void save_dataset(const MaterialDatabase& db, const std::filesystem::path& path);
MaterialDatabase load_dataset(const std::filesystem::path& path);

/// CSV with header e_xx,e_yy,g_xy,s_xx,s_yy,s_xy.
void save_dataset_csv(const MaterialDatabase& db, const std::filesystem::path& path);
MaterialDatabase load_dataset_csv(const std::filesystem::path& path, const MetricMatrix& metric);

}  // namespace ddgan
