#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "tensorconc/distribution.hpp"

namespace tensorconc {

/// Which per-draw transform the deviation uses: t^p or |t|^p.
enum class Variant { signed_power, absolute_power };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);

/// The sphere-constrained deviation instance: sup over unit v of
/// |N^-1 sum g(<X_i,v>) - E g(<X,v>)| with g fixed by the variant.
struct DeviationProblem {
  Sample sample;
  DistributionSpec spec;
  int p = 2;
  Variant variant = Variant::signed_power;

  void validate() const;
  int dim() const { return spec.dim(); }
};

struct SolverConfig {
  int restarts = 64;
  int max_iterations = 500;
  double convergence_tol = 1e-10;     // iterate movement
  double initial_step = 1.0;
  double step_shrink = 0.5;           // in (0,1)
  double sufficient_increase = 1e-4;  // Armijo constant
  int grid_resolution_2d = 100000;
  int grid_resolution_3d = 200000;

  void validate() const;
};

enum class SeedProvenance { random, data_direction, sample_cov_eigvec };
std::string to_string(SeedProvenance sp);

struct MaximizerResult {
  double value = 0.0;          // best |deviation| found, >= 0
  Eigen::VectorXd argmax;      // unit vector attaining it
  int sign_branch = +1;        // +1: maximized +objective, -1: -objective
  int iterations_used = 0;     // iterations of the winning restart
  int restarts_used = 0;
  SeedProvenance seed_provenance = SeedProvenance::random;
  bool converged = false;      // winning restart converged
  double restart_agreement = 0.0;  // fraction of winning-branch restarts
                                   // within 1e-6 of the best value

  nlohmann::json to_json() const;  // argmax at 17 significant digits
};

/// Signed deviation N^-1 sum g(<X_i,v>) - m(v) at a unit v (before the
/// absolute value of the outer supremum).
double deviation_objective(const DeviationProblem& prob, const Eigen::VectorXd& v);

/// Euclidean gradient of the homogeneous extension
/// ||v||^p * objective(v/||v||), evaluated at unit v. Kinks of the
/// absolute variant at <X_i,v> = 0 use subgradient value 0.
Eigen::VectorXd deviation_gradient(const DeviationProblem& prob, const Eigen::VectorXd& v);

/// Multi-start projected gradient ascent over both objective signs.
/// Starting points: one third uniform on the sphere, one third normalized
/// data rows (heaviest first), one third eigenvector seeds from the sample
/// covariance and from its deviation matrix. Deterministic given the seed;
/// non-convergence of individual restarts is recorded, not fatal.
MaximizerResult maximize_deviation(const DeviationProblem& prob, const SolverConfig& cfg,
                                   std::uint64_t seed);

/// Exact p = 2 value: spectral norm of the sample covariance deviation via
/// a dense symmetric eigensolver. Capped at d <= 2048.
double exact_oracle_p2(const Sample& sample, const DistributionSpec& spec);

/// Certified-by-grid value for d in {2, 3}. d = 2: angular grid over a half
/// circle plus golden-section refinement; d = 3: Fibonacci-sphere grid plus
/// gradient polish from the best 10 points.
double grid_oracle(const DeviationProblem& prob, int resolution);

/// Upper bound on the gap between grid_oracle's grid scan and the true
/// supremum, from a Lipschitz bound along grid angles. Conservative.
double grid_gap_bound(const DeviationProblem& prob, int resolution);

/// Supremum of the order-p multilinear deviation over a product of angular
/// grids, d = 2 only, p in {2, 3}, resolution <= 400.
double multilinear_grid_sup(const Sample& sample, const DistributionSpec& spec, int p,
                            int resolution);

/// Lipschitz gap bound matching multilinear_grid_sup's grid.
double multilinear_grid_gap_bound(const Sample& sample, const DistributionSpec& spec,
                                  int p, int resolution);

}  // namespace tensorconc
