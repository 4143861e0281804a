#include "ddgan/phase_space.hpp"

#include <cmath>

#include "ddgan/error.hpp"

namespace ddgan {

bool StrainVoigt::finite() const {
  return std::isfinite(e_xx) && std::isfinite(e_yy) && std::isfinite(g_xy);
}

bool StressVoigt::finite() const {
  return std::isfinite(s_xx) && std::isfinite(s_yy) && std::isfinite(s_xy);
}

Vector6d PhaseState::packed() const {
  Vector6d v;
  v << strain.e_xx, strain.e_yy, strain.g_xy, stress.s_xx, stress.s_yy, stress.s_xy;
  return v;
}

PhaseState PhaseState::unpack(const Vector6d& v) {
  return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

MetricMatrix::MetricMatrix(const Eigen::Matrix3d& c) : c_(c) {
  if (!c.allFinite()) throw InvalidInput("metric matrix has non-finite entries");
  const double scale = c.cwiseAbs().maxCoeff();
  if (scale == 0.0 || (c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("metric matrix is not symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(c);
  if (llt.info() != Eigen::Success) throw InvalidInput("metric matrix is not positive definite");
  c_inv_ = llt.solve(Eigen::Matrix3d::Identity());
  c_inv_ = 0.5 * (c_inv_ + c_inv_.transpose()).eval();

  Eigen::LLT<Eigen::Matrix3d> strain_part(0.5 * c_);
  Eigen::LLT<Eigen::Matrix3d> stress_part(0.5 * c_inv_);
  if (strain_part.info() != Eigen::Success || stress_part.info() != Eigen::Success) {
    throw InvalidInput("metric factorization failed");
  }
  r_.setZero();
  r_.topLeftCorner<3, 3>() = strain_part.matrixU();
  r_.bottomRightCorner<3, 3>() = stress_part.matrixU();
}

Matrix6d MetricMatrix::block() const {
  Matrix6d b = Matrix6d::Zero();
  b.topLeftCorner<3, 3>() = 0.5 * c_;
  b.bottomRightCorner<3, 3>() = 0.5 * c_inv_;
  return b;
}

double metric_sq_distance(const PhaseState& a, const PhaseState& b, const MetricMatrix& m) {
  if (!a.finite() || !b.finite()) throw InvalidInput("metric_sq_distance: non-finite phase state");
  const Eigen::Vector3d de = a.strain.vec() - b.strain.vec();
  const Eigen::Vector3d ds = a.stress.vec() - b.stress.vec();
  return 0.5 * de.dot(m.c() * de) + 0.5 * ds.dot(m.c_inv() * ds);
}

Vector6d whiten(const PhaseState& z, const MetricMatrix& m) {
  if (!z.finite()) throw InvalidInput("whiten: non-finite phase state");
  return m.r() * z.packed();
}

StrainVoigt voigt_pack(const Eigen::Matrix2d& u_grad) {
  return {u_grad(0, 0), u_grad(1, 1), u_grad(0, 1) + u_grad(1, 0)};
}

}  // namespace ddgan
