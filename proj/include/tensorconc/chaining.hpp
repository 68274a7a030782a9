#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "tensorconc/distribution.hpp"
#include "tensorconc/orlicz.hpp"

namespace tensorconc {

/// Finite point cloud with an explicit distance matrix. Symmetry, zero
/// diagonal and the triangle inequality (within 1e-9) are validated on
/// construction.
class FiniteMetricSpace {
public:
  explicit FiniteMetricSpace(Eigen::MatrixXd distances,
                             std::vector<Eigen::VectorXd> labels = {});

  int n_points() const { return static_cast<int>(dist_.rows()); }
  double distance(int i, int j) const { return dist_(i, j); }
  const Eigen::MatrixXd& distances() const { return dist_; }
  const std::vector<Eigen::VectorXd>& labels() const { return labels_; }

  /// Distance from point i to the nearest of `subset` (infinity-free:
  /// subset must be nonempty).
  double distance_to_set(int i, const std::vector<int>& subset) const;

  /// Restriction to a subset of points (used by monotonicity checks).
  FiniteMetricSpace restrict(const std::vector<int>& keep) const;

  nlohmann::json to_json() const;  // row-major distance matrix
  static FiniteMetricSpace from_json(const nlohmann::json& j);

private:
  Eigen::MatrixXd dist_;
  std::vector<Eigen::VectorXd> labels_;
};

/// Nested level sets F_0 subset F_1 subset ... with |F_0| = 1 and
/// |F_s| <= 2^{2^s}; the last level must exhaust the point set.
struct AdmissibleSequence {
  std::vector<std::vector<int>> levels;

  int final_level() const { return static_cast<int>(levels.size()) - 1; }
  /// Cardinality cap for level s (saturates instead of overflowing).
  static std::uint64_t level_cap(int s);
  /// Throws std::invalid_argument on any violated structural invariant.
  void validate(int n_points) const;

  nlohmann::json to_json() const;
};

enum class GammaMethod { greedy_ffp, exhaustive, net_based };

struct GammaEstimate {
  double value = 0.0;
  AdmissibleSequence sequence;
  GammaMethod method = GammaMethod::greedy_ffp;
};

/// Farthest-first admissible sequence: level 0 is the exhaustive metric
/// 1-center, later levels extend by farthest-first insertion up to the
/// cardinality cap.
AdmissibleSequence build_admissible_sequence(const FiniteMetricSpace& space);

/// Chaining functional sup_f sum_s 2^{s/2} d(f, F_s).
/// greedy_ffp/net_based evaluate the sum on a greedy sequence (upper bound
/// on the infimum); exhaustive enumerates every admissible sequence and is
/// limited to n_points <= 6.
GammaEstimate gamma2(const FiniteMetricSpace& space, GammaMethod method);

/// Entropy-number sum over the same greedy nets: sum_s 2^{s/2} e_s with e_s
/// the covering radius of the first min(2^{2^s}, n) greedy centers.
/// Dominates the greedy chaining value pointwise.
double dudley_sum(const FiniteMetricSpace& space);

/// ||<X, v>||_{L_q} for real q >= 1 and arbitrary (not necessarily unit) v.
/// Gaussian and sphere use closed forms; rademacher enumerates (d <= 20);
/// student_t supports d = 1 with q < dof.
double lp_norm(const DistributionSpec& spec, const Eigen::VectorXd& v, double q);

/// sup over 1 <= p <= q of lp_norm(p)/sqrt(p), by 0.25-step grid plus
/// golden-section refinement of the best cell.
double graded_norm(const DistributionSpec& spec, const Eigen::VectorXd& v, double q);

/// Linear function class {<., v> : v in V} with its psi2 geometry
/// precomputed.
struct FiniteFunctionClass {
  std::vector<Eigen::VectorXd> index_vectors;
  DistributionSpec base_spec;
  FiniteMetricSpace psi2_space;
  double d_psi2 = 0.0;   // sup of psi2 norms over the class
  bool symmetric = false;  // V closed under negation

  static FiniteFunctionClass build(std::vector<Eigen::VectorXd> vectors,
                                   DistributionSpec spec);
};

/// Pairwise psi2 distances ||<X, u - v>||_{psi2} for the vector class.
/// Gaussian uses the closed form; rademacher enumerates per pair (d <= 20).
FiniteMetricSpace psi2_metric(const std::vector<Eigen::VectorXd>& vectors,
                              const DistributionSpec& spec);

struct WidthEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo E max_{v in V} <G, v> with G centered Gaussian matching the
/// class spectrum.
WidthEstimate gaussian_width(const FiniteFunctionClass& cls, int trials,
                             std::uint64_t seed);

struct LambdaEstimate {
  double lambda = 0.0;
  double lambda_tilde = 0.0;
};

/// Graded-norm chaining sums evaluated on the greedy admissible sequence,
/// with the level-s projection taken nearest in the (u^2 2^s) graded norm.
/// Upper bounds of the corresponding infima.
LambdaEstimate lambda_functional(const FiniteFunctionClass& cls, int s0, double u);

/// Two-regime Young function and its inverse.
struct YoungPhi {
  int n = 1;       // sample-size parameter, >= 1
  double m = 1.0;  // tail exponent, >= 1
};

double phi(const YoungPhi& y, double x);
double phi_inverse(const YoungPhi& y, double z);

}  // namespace tensorconc
