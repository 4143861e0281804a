#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ddgan/geometry.hpp"
#include "ddgan/mlp.hpp"
#include "ddgan/phase_space.hpp"

namespace ddgan {

/// Distributed load on the edge x = 1: t(y) = amplitude cos(pi y / 2), MPa.
struct Traction {
  double amplitude = 200.0;

  double operator()(double y) const;
  double derivative(double y) const;
};

double traction(double y);

/// Output order of the five field networks.
enum class Field : int { u_x = 0, u_y = 1, s_xx = 2, s_yy = 3, s_xy = 4 };
inline constexpr int kFieldCount = 5;

struct GeneratorSpec {
  MlpSpec net{2, 1, 4, 64, {Activation::hardswish, 0.0}};
  QuarterPlate plate{};
  Traction traction{};
};

/// Field values and first spatial derivatives over a batch, one entry per column.
/// Suffix _x / _y is d/dx / d/dy.
struct FieldBatch {
  Eigen::RowVectorXd u_x, u_y, s_xx, s_yy, s_xy;
  Eigen::RowVectorXd u_x_x, u_x_y, u_y_x, u_y_y;
  Eigen::RowVectorXd s_xx_x, s_xx_y, s_yy_x, s_yy_y, s_xy_x, s_xy_y;

  static FieldBatch zeros(Eigen::Index batch);
  Eigen::Index size() const { return u_x.size(); }

  StrainVoigt strain(Eigen::Index i) const;
  StressVoigt stress(Eigen::Index i) const;
  PhaseState state(Eigen::Index i) const { return {strain(i), stress(i)}; }
  /// div(sigma) with zero body force.
  Eigen::Vector2d equilibrium_residual(Eigen::Index i) const;

  /// Adds dL/dz for z = (e_xx, e_yy, g_xy, s_xx, s_yy, s_xy) at column i.
  void add_state_adjoint(Eigen::Index i, const Vector6d& z_bar);
};

struct GeneratorOutput {
  Point2 point;
  double u_x = 0.0;
  double u_y = 0.0;
  StrainVoigt strain;
  StressVoigt stress;
  Eigen::Vector2d equilibrium_residual = Eigen::Vector2d::Zero();

  PhaseState state() const { return {strain, stress}; }
};

/// Five scalar networks (u_x, u_y, s_xx, s_yy, s_xy) of (x, y) with outputs
/// transformed so the Dirichlet data and part of the Neumann data hold exactly:
///   u_x  = x N_ux                       u_y  = y N_uy
///   s_xx = x t(y) + (1 - x) N_sxx       s_yy = (1 - y) N_syy
///   s_xy = x y (x^2 + y^2 - 1/4) N_sxy
/// Strains come from differentiating the transformed displacements.
class Generator {
 public:
  explicit Generator(GeneratorSpec spec = {});  // zero parameters

  static Generator initialized(GeneratorSpec spec, std::uint64_t seed);

  const GeneratorSpec& spec() const noexcept { return spec_; }
  const std::array<Mlp, kFieldCount>& nets() const noexcept { return nets_; }
  std::array<Mlp, kFieldCount>& nets() noexcept { return nets_; }
  Mlp& net(Field f) { return nets_[static_cast<int>(f)]; }

  std::size_t parameter_count() const;
  /// Concatenation in Field order.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::Ref<const Eigen::VectorXd>& theta);

  /// Throws InvalidInput for points outside the closed quarter plate.
  GeneratorOutput evaluate(const Point2& p) const;
  std::vector<GeneratorOutput> evaluate(std::span<const Point2> points) const;

  struct Pass {
    Eigen::MatrixXd coords;  // 2 x B
    std::array<MlpTape, kFieldCount> tapes;
    FieldBatch fields;
  };

  /// Batched forward pass with tapes for backward(); no domain check.
  Pass forward(std::span<const Point2> points) const;
  /// Flattened parameter gradient given adjoints of every field quantity.
  Eigen::VectorXd backward(const Pass& pass, const FieldBatch& adjoint) const;

 private:
  GeneratorSpec spec_;
  std::array<Mlp, kFieldCount> nets_;
};

/// Boundary points whose traction condition is not built into the transforms:
/// the loaded edge x = 1 (shear), the top edge y = 1 (shear) and the hole.
/// On the hole only the normal traction n . sigma . n is penalized.
struct SoftBoundary {
  std::vector<Point2> points;
  std::vector<Eigen::Vector2d> normals;
  std::vector<Eigen::Vector2d> tractions;  // prescribed sigma . n
  std::vector<char> normal_only;           // residual n . (sigma n - t) instead of sigma n - t

  static SoftBoundary from(const BoundarySets& sets, const GeneratorSpec& spec);
  std::size_t size() const { return points.size(); }
};

struct PhysicsTerms {
  double interior = 0.0;  // mean |div sigma|^2 over the interior points
  double boundary = 0.0;  // mean squared traction residual over the soft boundary points

  double total() const { return interior + boundary; }
};

/// Physics loss on a pass whose first `n_interior` columns are interior points
/// and whose next `boundary.size()` columns are the soft boundary points.
/// When `adjoint` is given, scale * dL/d(fields) is added to it.
PhysicsTerms accumulate_physics_loss(const FieldBatch& fields, Eigen::Index n_interior, const SoftBoundary& boundary,
                                     FieldBatch* adjoint, double scale = 1.0);

struct PhysicsLoss {
  PhysicsTerms terms;
  Eigen::VectorXd gradient;  // empty unless requested

  double value() const { return terms.total(); }
};

/// L_C = L_Omega + L_Gamma. Throws InvalidInput if `interior` is empty.
PhysicsLoss physics_loss(const Generator& gen, std::span<const Point2> interior, const SoftBoundary& boundary,
                         bool with_gradient = true);

/// Rows x, y, u_x, u_y, s_xx, s_yy, s_xy.
void write_fields_csv(const std::filesystem::path& path, std::span<const GeneratorOutput> fields);

}  // namespace ddgan
