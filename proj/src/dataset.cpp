#include "ddgan/dataset.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "ddgan/error.hpp"
#include "detail/bytes.hpp"

namespace ddgan {
namespace {

inline double sq_dist6(const double* a, const double* b) {
  double s = 0.0;
  for (int k = 0; k < KdTree::kDim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

inline bool better(double dist, std::size_t index, double best_dist, std::size_t best_index) {
  return dist < best_dist || (dist == best_dist && index < best_index);
}

}  // namespace

KdTree::KdTree(std::span<const double> points, std::size_t leaf_size)
    : points_(points), count_(points.size() / kDim), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points.size() % kDim != 0) throw InvalidInput("KdTree: point buffer is not a multiple of 6");
  if (count_ > std::numeric_limits<std::uint32_t>::max()) throw InvalidInput("KdTree: too many points");
  order_.resize(count_);
  std::iota(order_.begin(), order_.end(), 0U);
  if (count_ > 0) {
    nodes_.reserve(2 * count_ / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(count_));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the dimension of largest spread at the median.
  std::array<double, kDim> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (std::uint32_t i = begin; i < end; ++i) {
    const double* p = &points_[static_cast<std::size_t>(order_[i]) * kDim];
    for (int k = 0; k < kDim; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  int dim = 0;
  for (int k = 1; k < kDim; ++k) {
    if (hi[k] - lo[k] > hi[dim] - lo[dim]) dim = k;
  }
  if (hi[dim] - lo[dim] == 0.0) return id;  // all points identical

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[static_cast<std::size_t>(a) * kDim + dim] <
                            points_[static_cast<std::size_t>(b) * kDim + dim];
                   });
  const double split = points_[static_cast<std::size_t>(order_[mid]) * kDim + dim];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.split_dim = dim;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::pair<std::size_t, double> KdTree::nearest(const double* query) const {
  if (count_ == 0) throw DatasetError(DatasetError::Kind::empty, "nearest: empty database");
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  double best_dist = std::numeric_limits<double>::infinity();
  std::array<double, kDim> offsets{};
  search(0, query, offsets.data(), 0.0, best_index, best_dist);
  return {best_index, best_dist};
}

// Left children hold coordinates <= split, right children >= split, so the
// squared offset to the far half-space is a valid lower bound. Subtrees whose
// bound equals the current best are still visited to honour index tie-breaks.
void KdTree::search(std::int32_t id, const double* q, double* offsets, double rd,
                    std::size_t& best_index, double& best_dist) const {
  const Node& node = nodes_[id];
  if (node.split_dim < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::size_t index = order_[i];
      const double d = sq_dist6(&points_[index * kDim], q);
      if (better(d, index, best_dist, best_index)) {
        best_dist = d;
        best_index = index;
      }
    }
    return;
  }
  const int dim = node.split_dim;
  const double diff = q[dim] - node.split;
  const std::int32_t near = diff <= 0.0 ? node.left : node.right;
  const std::int32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, q, offsets, rd, best_index, best_dist);

  const double old = offsets[dim];
  const double far_rd = rd - old * old + diff * diff;
  if (far_rd <= best_dist) {
    offsets[dim] = diff;
    search(far, q, offsets, far_rd, best_index, best_dist);
    offsets[dim] = old;
  }
}

MaterialDatabase::MaterialDatabase(std::vector<PhaseState> states, MetricMatrix metric, DatasetMeta meta)
    : states_(std::move(states)), metric_(std::move(metric)), meta_(meta) {
  whitened_.resize(states_.size() * KdTree::kDim);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const Vector6d w = ddgan::whiten(states_[i], metric_);
    std::copy(w.data(), w.data() + KdTree::kDim, whitened_.begin() + static_cast<std::ptrdiff_t>(i * KdTree::kDim));
  }
  tree_ = KdTree(whitened_);
}

MaterialDatabase::MaterialDatabase(const MaterialDatabase& other)
    : states_(other.states_), metric_(other.metric_), meta_(other.meta_), whitened_(other.whitened_) {
  tree_ = KdTree(whitened_);
}

MaterialDatabase& MaterialDatabase::operator=(const MaterialDatabase& other) {
  if (this != &other) {
    MaterialDatabase copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Vector6d MaterialDatabase::whitened(std::size_t i) const {
  return Eigen::Map<const Vector6d>(&whitened_.at(i * KdTree::kDim));
}

NearestResult MaterialDatabase::result(std::size_t index, double sq_dist) const {
  return {index, states_[index], sq_dist};
}

NearestResult MaterialDatabase::nearest(const PhaseState& z) const {
  if (empty()) throw DatasetError(DatasetError::Kind::empty, "nearest: empty database");
  const Vector6d q = ddgan::whiten(z, metric_);
  const auto [index, d] = tree_.nearest(q.data());
  return result(index, d);
}

std::vector<NearestResult> MaterialDatabase::nearest_batch(std::span<const PhaseState> zs) const {
  std::vector<NearestResult> out;
  out.reserve(zs.size());
  for (const PhaseState& z : zs) out.push_back(nearest(z));
  return out;
}

NearestResult MaterialDatabase::nearest_brute_force(const PhaseState& z) const {
  if (empty()) throw DatasetError(DatasetError::Kind::empty, "nearest: empty database");
  const Vector6d q = ddgan::whiten(z, metric_);
  std::size_t best_index = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = sq_dist6(&whitened_[i * KdTree::kDim], q.data());
    if (d < best) {
      best = d;
      best_index = i;
    }
  }
  return result(best_index, best);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'D', 'D', 'G', 'A', 'N', 'D', 'B', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8 + 9 * 8 + 8 + 5 * 8 + 8;

using detail::ByteReader;
using detail::ByteWriter;

std::string read_file(const std::filesystem::path& path) {
  auto bytes = detail::read_file(path);
  if (!bytes) throw DatasetError(DatasetError::Kind::io, "cannot open " + path.string());
  return std::move(*bytes);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (!detail::write_file(path, bytes)) throw DatasetError(DatasetError::Kind::io, "cannot write " + path.string());
}

}  // namespace

void save_dataset(const MaterialDatabase& db, const std::filesystem::path& path) {
  ByteWriter header;
  header.raw(std::string_view(kMagic, sizeof kMagic));
  header.u32(kVersion);
  header.u32(0);
  header.u64(db.size());
  const Eigen::Matrix3d& c = db.metric().c();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) header.f64(c(i, j));
  const DatasetMeta& meta = db.meta();
  header.u64(meta.seed);
  header.f64(meta.params.E);
  header.f64(meta.params.nu);
  header.f64(meta.params.a);
  header.f64(meta.params.p);
  header.f64(meta.strain_std);

  ByteWriter payload;
  payload.bytes().reserve(db.size() * 48);
  for (const PhaseState& s : db.states()) {
    const Vector6d v = s.packed();
    for (int k = 0; k < 6; ++k) payload.f64(v[k]);
  }
  header.u64(detail::fnv1a(payload.bytes(), detail::fnv1a(header.bytes())));
  header.bytes() += payload.bytes();
  write_file(path, header.bytes());
}

MaterialDatabase load_dataset(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  using Kind = DatasetError::Kind;
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DatasetError(Kind::format, "not a dataset file (bad magic): " + path.string());
  }
  if (bytes.size() < kHeaderBytes) throw DatasetError(Kind::truncated, "truncated dataset header");

  ByteReader r(std::string_view(bytes).substr(sizeof kMagic));
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw DatasetError(Kind::format, "unsupported dataset version " + std::to_string(version));
  if (r.u32() != 0) throw DatasetError(Kind::format, "malformed dataset header");
  const std::uint64_t n = r.u64();
  Eigen::Matrix3d c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = r.f64();
  DatasetMeta meta;
  meta.seed = r.u64();
  meta.params.E = r.f64();
  meta.params.nu = r.f64();
  meta.params.a = r.f64();
  meta.params.p = r.f64();
  meta.strain_std = r.f64();
  const std::uint64_t checksum = r.u64();

  if (n > (bytes.size() - kHeaderBytes) / 48 || bytes.size() != kHeaderBytes + n * 48) {
    if (bytes.size() < kHeaderBytes + n * 48) throw DatasetError(Kind::truncated, "truncated dataset payload");
    throw DatasetError(Kind::format, "trailing bytes after dataset payload");
  }
  const std::string_view view(bytes);
  if (detail::fnv1a(view.substr(kHeaderBytes), detail::fnv1a(view.substr(0, kHeaderBytes - 8))) != checksum) {
    throw DatasetError(Kind::checksum, "dataset checksum mismatch");
  }

  std::vector<PhaseState> states(n);
  ByteReader payload(view.substr(kHeaderBytes));
  for (auto& s : states) {
    Vector6d v;
    for (int k = 0; k < 6; ++k) v[k] = payload.f64();
    s = PhaseState::unpack(v);
  }
  try {
    return MaterialDatabase(std::move(states), MetricMatrix(c), meta);
  } catch (const InvalidInput& e) {
    throw DatasetError(Kind::format, std::string("invalid dataset contents: ") + e.what());
  }
}

void save_dataset_csv(const MaterialDatabase& db, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "e_xx,e_yy,g_xy,s_xx,s_yy,s_xy\n" << std::setprecision(17);
  for (const PhaseState& s : db.states()) {
    out << s.strain.e_xx << ',' << s.strain.e_yy << ',' << s.strain.g_xy << ',' << s.stress.s_xx << ','
        << s.stress.s_yy << ',' << s.stress.s_xy << '\n';
  }
  write_file(path, out.str());
}

MaterialDatabase load_dataset_csv(const std::filesystem::path& path, const MetricMatrix& metric) {
  using Kind = DatasetError::Kind;
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DatasetError(Kind::format, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "e_xx,e_yy,g_xy,s_xx,s_yy,s_xy") throw DatasetError(Kind::format, "unexpected CSV header: " + line);

  std::vector<PhaseState> states;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Vector6d v;
    std::istringstream row(line);
    std::string cell;
    int k = 0;
    while (std::getline(row, cell, ',')) {
      if (k >= 6) throw DatasetError(Kind::format, "too many columns on line " + std::to_string(line_no));
      try {
        std::size_t used = 0;
        v[k] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DatasetError(Kind::format, "bad number '" + cell + "' on line " + std::to_string(line_no));
      }
      ++k;
    }
    if (k != 6) throw DatasetError(Kind::format, "expected 6 columns on line " + std::to_string(line_no));
    states.push_back(PhaseState::unpack(v));
  }
  if (states.empty()) throw DatasetError(Kind::empty, "CSV has no data rows: " + path.string());
  return MaterialDatabase(std::move(states), metric);
}

}  // namespace ddgan
