#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "tensorconc/spectrum.hpp"

namespace tensorconc {

enum class Family { gaussian, rademacher, sphere, student_t };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Named draw procedure; fixed for the lifetime of a build so that
/// (spec, n, seed) reproduces samples bit-for-bit.
inline constexpr const char* kGeneratorId = "mt19937_64-boxmuller-v1";

/// A centered distribution on R^d, calibrated so that the variance of
/// <X, v> equals <diag(spectrum) v, v> for every unit v. All four families
/// are symmetric; only student_t fails to be sub-Gaussian.
struct DistributionSpec {
  Family family = Family::gaussian;
  Spectrum spectrum = Spectrum::identity(1);
  double dof = 0.0;  // student_t only; must be > 2

  bool symmetric() const { return true; }
  bool sub_gaussian() const { return family != Family::student_t; }
  int dim() const { return spectrum.dim(); }

  void validate() const;
  /// Content hash used to tie samples back to the spec that produced them.
  std::uint64_t digest() const;

  nlohmann::json to_json() const;
  static DistributionSpec from_json(const nlohmann::json& j);
};

/// A block of n i.i.d. draws (rows) with full provenance.
struct Sample {
  Eigen::MatrixXd data;  // n x d, rows are draws
  int n = 0;
  std::uint64_t spec_digest = 0;
  std::uint64_t seed = 0;
  std::string generator_id = kGeneratorId;
};

/// Draws n rows from the spec. Rows are generated sequentially from one
/// stream, so for fixed (spec, seed) the first n1 rows of an n2 > n1 sample
/// coincide with the n1-row sample.
Sample draw_sample(const DistributionSpec& spec, int n, std::uint64_t seed);

/// <diag(spectrum) v, v> for unit v (within 1e-12).
double directional_variance(const DistributionSpec& spec, const Eigen::VectorXd& v);

/// m_p(v) = E<X,v>^p for unit v, by closed form or exact enumeration.
/// Odd p gives 0 for every supported family. Enumeration families
/// (rademacher, student_t) are capped at d <= 20; student_t needs p < dof.
double population_moment(const DistributionSpec& spec, const Eigen::VectorXd& v, int p);

/// E|<X,v>|^p. Same support matrix as population_moment except student_t
/// with odd p, which has no enumerable form here.
double population_abs_moment(const DistributionSpec& spec, const Eigen::VectorXd& v, int p);

/// M_p(v) = E <X,v>^{p-1} X, i.e. 1/p times the Euclidean gradient of the
/// homogeneous extension of m_p.
Eigen::VectorXd population_moment_gradient(const DistributionSpec& spec,
                                           const Eigen::VectorXd& v, int p);

/// E |<X,v>|^{p-1} sign(<X,v>) X, the matching gradient for the
/// absolute-value moment.
Eigen::VectorXd population_abs_moment_gradient(const DistributionSpec& spec,
                                               const Eigen::VectorXd& v, int p);

/// psi2 norm of <X,v> for unit v. Closed form sqrt(8/3)*sigma_v for the
/// gaussian family; rademacher and sphere delegate to the Orlicz bisection
/// with exact/quadrature expectations. Throws moment_error for student_t.
double psi2_directional(const DistributionSpec& spec, const Eigen::VectorXd& v);

/// E|Z|^q for a standard normal and real q >= 0: 2^{q/2} Gamma((q+1)/2) / sqrt(pi).
double gaussian_abs_moment(double q);

/// E|<theta, e1>|^q for theta uniform on the unit sphere of R^d.
double sphere_axis_abs_moment(int d, double q);

/// (p-1)!! for even p >= 0 (1 for p = 0).
double odd_double_factorial(int p);

}  // namespace tensorconc
