#pragma once

#include <cstddef>
#include <cstdint>

#include "ddgan/phase_space.hpp"

namespace ddgan {

class MaterialDatabase;

struct MaterialParams {
  double E = 1.0e4;   // MPa
  double nu = 0.3;
  double a = 0.001;
  double p = 0.005;

  /// Throws InvalidInput unless E > 0, 0 < nu < 0.5, a > 0, p > 0.
  void validate() const;
  friend bool operator==(const MaterialParams&, const MaterialParams&) = default;
};

/// Lame constants plus the orthotropic plane-strain coefficients.
struct DerivedConstants {
  double lambda = 0.0;
  double mu = 0.0;
  double lambda_bar = 0.0;
  double c11 = 0.0;
  double g_perp = 0.0;
  double g_par = 0.0;
};

/// g(x) = ((|x| + a)^p - a^p) sgn(x)
double g_scalar(double x, double a, double p);

DerivedConstants derive_constants(const MaterialParams& mp);

/// 3x3 plane-strain orthotropic stiffness wrapped as a metric. Throws
/// InvalidInput if the constants do not give an SPD matrix.
MetricMatrix build_elasticity_matrix(const DerivedConstants& dc, double nu);

/// sigma = lambda g(tr eps) I + mu eps + C eps, evaluated with plane-strain trace
/// and tensorial shear in the mu term.
class NonlinearOrthotropicMaterial {
 public:
  explicit NonlinearOrthotropicMaterial(const MaterialParams& mp);

  StressVoigt stress(const StrainVoigt& eps) const;

  const MaterialParams& params() const noexcept { return params_; }
  const DerivedConstants& constants() const noexcept { return constants_; }
  const MetricMatrix& stiffness() const noexcept { return stiffness_; }

 private:
  MaterialParams params_;
  DerivedConstants constants_;
  MetricMatrix stiffness_;
};

StressVoigt stress_from_strain(const StrainVoigt& eps, const MaterialParams& mp);

/// n i.i.d. strains with N(0, std^2) components, stresses from the material law,
/// metric from the stiffness matrix. Component k of point i uses normal draw 3i+k
/// of the dataset stream, so any index range can be generated independently.
MaterialDatabase synthesize_dataset(std::size_t n, double std, std::uint64_t seed,
                                    const MaterialParams& mp);

}  // namespace ddgan
