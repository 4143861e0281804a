#pragma once

#include <Eigen/Dense>

namespace ddgan {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Plane strain in Voigt order (e_xx, e_yy, g_xy) with engineering shear g_xy = 2 eps_xy.
struct StrainVoigt {
  double e_xx = 0.0;
  double e_yy = 0.0;
  double g_xy = 0.0;

  Eigen::Vector3d vec() const { return {e_xx, e_yy, g_xy}; }
  static StrainVoigt from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
  bool finite() const;
  friend bool operator==(const StrainVoigt&, const StrainVoigt&) = default;
};

/// Stress in Voigt order (s_xx, s_yy, s_xy), MPa.
struct StressVoigt {
  double s_xx = 0.0;
  double s_yy = 0.0;
  double s_xy = 0.0;

  Eigen::Vector3d vec() const { return {s_xx, s_yy, s_xy}; }
  static StressVoigt from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
  bool finite() const;
  friend bool operator==(const StressVoigt&, const StressVoigt&) = default;
};

/// A local strain-stress state z = (eps, sigma).
struct PhaseState {
  StrainVoigt strain;
  StressVoigt stress;

  /// (e_xx, e_yy, g_xy, s_xx, s_yy, s_xy)
  Vector6d packed() const;
  static PhaseState unpack(const Vector6d& v);
  bool finite() const { return strain.finite() && stress.finite(); }
  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// The energy metric d^2 = 1/2 de.C.de + 1/2 ds.C^-1.ds, together with an
/// upper-triangular factor R such that R^T R = blockdiag(C/2, C^-1/2).
class MetricMatrix {
 public:
  /// Throws InvalidInput unless `c` is finite, symmetric and positive definite.
  explicit MetricMatrix(const Eigen::Matrix3d& c);

  static MetricMatrix identity() { return MetricMatrix(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& c() const noexcept { return c_; }
  const Eigen::Matrix3d& c_inv() const noexcept { return c_inv_; }
  const Matrix6d& r() const noexcept { return r_; }

  /// blockdiag(C/2, C^-1/2)
  Matrix6d block() const;

 private:
  Eigen::Matrix3d c_;
  Eigen::Matrix3d c_inv_;
  Matrix6d r_;
};

double metric_sq_distance(const PhaseState& a, const PhaseState& b, const MetricMatrix& m);

/// Linear map into coordinates where the metric is Euclidean.
Vector6d whiten(const PhaseState& z, const MetricMatrix& m);

/// Symmetric part of a 2x2 displacement gradient, grad(i, j) = du_i/dx_j.
StrainVoigt voigt_pack(const Eigen::Matrix2d& u_grad);

}  // namespace ddgan
