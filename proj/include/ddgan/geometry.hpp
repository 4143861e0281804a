#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ddgan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Upper-right quarter of a square plate of side 2 with a centred hole of radius 0.5.
struct QuarterPlate {
  double side = 1.0;
  double hole_radius = 0.5;

  /// Closed domain test, boundary included to within `tol`.
  bool contains(const Point2& p, double tol = 1e-12) const;
  /// Inside the square and strictly outside the hole.
  bool accepts(const Point2& p) const;
};

/// Two-dimensional Sobol points with the Joe-Kuo direction numbers (dimension 1
/// is van der Corput, dimension 2 uses x + 1, m_1 = 1), in Gray-code order.
/// Returns points skip+1 ... skip+n; index 0 is the origin and never returned.
std::vector<Point2> sobol_2d(std::size_t n, std::size_t skip = 0);
Point2 sobol_point(std::uint64_t index);

struct InteriorSample {
  std::vector<Point2> points;
  std::size_t candidates = 0;  // Sobol points drawn, accepted or not

  double acceptance() const { return candidates ? static_cast<double>(points.size()) / candidates : 0.0; }
};

/// First n_target Sobol points outside the hole (rejection, x^2 + y^2 <= r^2 dropped).
InteriorSample sample_interior(std::size_t n_target, const QuarterPlate& plate = {});

/// Seeded uniform points over the domain with the same rejection rule.
std::vector<Point2> sample_test(std::size_t n, std::uint64_t seed, const QuarterPlate& plate = {});

struct BoundarySets {
  std::vector<Point2> left;    // x = 0, y in [r, side]
  std::vector<Point2> bottom;  // y = 0, x in [r, side]
  std::vector<Point2> right;   // x = side
  std::vector<Point2> top;     // y = side
  std::vector<Point2> hole;    // quarter arc of radius r
};

/// Equispaced points (endpoints included) on each straight edge and equiangular
/// points on the arc, n_per_edge on each.
BoundarySets sample_boundary(std::size_t n_per_edge, const QuarterPlate& plate = {});

void write_points_csv(const std::filesystem::path& path, std::span<const Point2> points);

}  // namespace ddgan
