#include "ddgan/geometry.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ddgan/error.hpp"
#include "ddgan/rng.hpp"
#include "detail/bytes.hpp"

namespace ddgan {

bool QuarterPlate::contains(const Point2& p, double tol) const {
  return p.x >= -tol && p.y >= -tol && p.x <= side + tol && p.y <= side + tol &&
         p.x * p.x + p.y * p.y >= hole_radius * hole_radius - tol;
}

bool QuarterPlate::accepts(const Point2& p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= side && p.y <= side && p.x * p.x + p.y * p.y > hole_radius * hole_radius;
}

namespace {

constexpr int kBits = 32;

struct Directions {
  std::array<std::uint32_t, kBits> dim1{};
  std::array<std::uint32_t, kBits> dim2{};
};

constexpr Directions make_directions() {
  Directions d;
  for (int k = 0; k < kBits; ++k) d.dim1[k] = 1U << (kBits - 1 - k);
  // Primitive polynomial x + 1 (degree 1, a = 0): v_k = v_{k-1} ^ (v_{k-1} >> 1).
  d.dim2[0] = 1U << (kBits - 1);
  for (int k = 1; k < kBits; ++k) d.dim2[k] = d.dim2[k - 1] ^ (d.dim2[k - 1] >> 1);
  return d;
}

constexpr Directions kDirections = make_directions();

}  // namespace

Point2 sobol_point(std::uint64_t index) {
  if (index >= (std::uint64_t{1} << kBits)) throw InvalidInput("sobol_point: index exceeds 2^32");
  const std::uint64_t gray = index ^ (index >> 1);
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  for (int k = 0; k < kBits; ++k) {
    if ((gray >> k) & 1U) {
      x ^= kDirections.dim1[k];
      y ^= kDirections.dim2[k];
    }
  }
  constexpr double scale = 0x1.0p-32;
  return {x * scale, y * scale};
}

std::vector<Point2> sobol_2d(std::size_t n, std::size_t skip) {
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sobol_point(skip + i + 1));
  return out;
}

InteriorSample sample_interior(std::size_t n_target, const QuarterPlate& plate) {
  InteriorSample s;
  s.points.reserve(n_target);
  std::uint64_t index = 1;
  while (s.points.size() < n_target) {
    Point2 p = sobol_point(index++);
    p.x *= plate.side;
    p.y *= plate.side;
    ++s.candidates;
    if (plate.accepts(p)) s.points.push_back(p);
  }
  return s;
}

std::vector<Point2> sample_test(std::size_t n, std::uint64_t seed, const QuarterPlate& plate) {
  const CounterRng rng(seed, rng_streams::test_points);
  std::vector<Point2> out;
  out.reserve(n);
  for (std::uint64_t j = 0; out.size() < n; ++j) {
    const Point2 p{plate.side * rng.uniform(2 * j), plate.side * rng.uniform(2 * j + 1)};
    if (plate.accepts(p)) out.push_back(p);
  }
  return out;
}

BoundarySets sample_boundary(std::size_t n_per_edge, const QuarterPlate& plate) {
  BoundarySets b;
  const double r = plate.hole_radius;
  const double s = plate.side;
  auto fraction = [n_per_edge](std::size_t i) {
    return n_per_edge == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n_per_edge - 1);
  };
  for (std::size_t i = 0; i < n_per_edge; ++i) {
    const double t = fraction(i);
    b.left.push_back({0.0, r + (s - r) * t});
    b.bottom.push_back({r + (s - r) * t, 0.0});
    b.right.push_back({s, s * t});
    b.top.push_back({s * t, s});
    const double angle = 0.5 * std::numbers::pi * t;
    b.hole.push_back({r * std::cos(angle), r * std::sin(angle)});
  }
  return b;
}

void write_points_csv(const std::filesystem::path& path, std::span<const Point2> points) {
  std::ostringstream out;
  out << "x,y\n" << std::setprecision(17);
  for (const Point2& p : points) out << p.x << ',' << p.y << '\n';
  if (!detail::write_file(path, out.str())) throw IoError("cannot write " + path.string());
}

}  // namespace ddgan
