#include "ddgan/material.hpp"

#include <cmath>
#include <vector>

#include "ddgan/dataset.hpp"
#include "ddgan/error.hpp"
#include "ddgan/rng.hpp"

namespace ddgan {

void MaterialParams::validate() const {
  if (!(E > 0.0) || !std::isfinite(E)) throw InvalidInput("material: E must be positive");
  if (!(nu > 0.0 && nu < 0.5)) throw InvalidInput("material: nu must lie in (0, 0.5)");
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("material: a must be positive");
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("material: p must be positive");
}

double g_scalar(double x, double a, double p) {
  if (x == 0.0) return 0.0;
  const double magnitude = std::pow(std::abs(x) + a, p) - std::pow(a, p);
  return x > 0.0 ? magnitude : -magnitude;
}

DerivedConstants derive_constants(const MaterialParams& mp) {
  if (1.0 - 2.0 * mp.nu == 0.0) {
    throw InvalidInput("derive_constants: division by zero (nu = 0.5)");
  }
  mp.validate();
  const double E = mp.E;
  const double nu = mp.nu;
  DerivedConstants dc;
  dc.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  dc.mu = E / (2.0 * (1.0 + nu));
  dc.lambda_bar = (2.0 * nu * nu + 1.0) / (15.0 - 20.0 * nu * nu) * E;
  dc.c11 = 4.6875 * E;
  dc.g_perp = 0.3 * E;
  dc.g_par = 0.2 * E;
  return dc;
}

MetricMatrix build_elasticity_matrix(const DerivedConstants& dc, double nu) {
  const double c12 = 2.0 * nu * (dc.lambda_bar + dc.g_perp);
  Eigen::Matrix3d c;
  c << dc.c11, c12, 0.0,
       c12, dc.lambda_bar + 2.0 * dc.g_perp, 0.0,
       0.0, 0.0, dc.g_par;
  return MetricMatrix(c);
}

NonlinearOrthotropicMaterial::NonlinearOrthotropicMaterial(const MaterialParams& mp)
    : params_(mp),
      constants_(derive_constants(mp)),
      stiffness_(build_elasticity_matrix(constants_, mp.nu)) {}

StressVoigt NonlinearOrthotropicMaterial::stress(const StrainVoigt& eps) const {
  const double trace = eps.e_xx + eps.e_yy;
  const double volumetric = constants_.lambda * g_scalar(trace, params_.a, params_.p);
  const Eigen::Vector3d linear = stiffness_.c() * eps.vec();
  return {volumetric + constants_.mu * eps.e_xx + linear[0],
          volumetric + constants_.mu * eps.e_yy + linear[1],
          constants_.mu * 0.5 * eps.g_xy + linear[2]};
}

StressVoigt stress_from_strain(const StrainVoigt& eps, const MaterialParams& mp) {
  return NonlinearOrthotropicMaterial(mp).stress(eps);
}

MaterialDatabase synthesize_dataset(std::size_t n, double std, std::uint64_t seed,
                                    const MaterialParams& mp) {
  if (n == 0) throw DatasetError(DatasetError::Kind::empty, "synthesize_dataset: n must be >= 1");
  if (!(std > 0.0) || !std::isfinite(std)) throw InvalidInput("synthesize_dataset: std must be positive");
  const NonlinearOrthotropicMaterial material(mp);
  const CounterRng rng(seed, rng_streams::dataset);

  std::vector<PhaseState> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    StrainVoigt eps{std * rng.normal(3 * i), std * rng.normal(3 * i + 1), std * rng.normal(3 * i + 2)};
    states[i] = {eps, material.stress(eps)};
  }
  DatasetMeta meta{seed, mp, std};
  return MaterialDatabase(std::move(states), material.stiffness(), meta);
}

}  // namespace ddgan
