#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "tensorconc/deviation.hpp"

namespace tensorconc {

/// One spectrum family swept over a list of dimensions.
struct SpectrumBlock {
  SpectrumKind kind = SpectrumKind::identity;
  double param = 0.0;               // geometric ratio or polynomial exponent
  std::vector<int> dims;
  std::vector<double> custom;       // kind == custom only; dims ignored

  Spectrum spectrum(int d) const;
};

/// How the per-cell variant is chosen.
enum class VariantPolicy { signed_power, absolute_power, auto_parity };

std::string to_string(VariantPolicy policy);
VariantPolicy variant_policy_from_string(const std::string& name);

struct SweepPlan {
  std::vector<Family> families;
  double dof = 5.0;  // applied to student_t cells
  std::vector<SpectrumBlock> spectra;
  std::vector<int> n_grid;
  std::vector<int> p_list;
  VariantPolicy variant = VariantPolicy::auto_parity;
  int trials = 2;
  std::uint64_t base_seed = 0;
  SolverConfig solver;
  std::string output_path;

  void validate() const;
  nlohmann::json to_json() const;
  /// Strict parser: unknown keys anywhere in the plan are rejected.
  static SweepPlan from_json(const nlohmann::json& j);
};

struct CellKey {
  Family family = Family::gaussian;
  SpectrumKind kind = SpectrumKind::identity;
  double param = 0.0;
  int d = 1;
  int n = 1;
  int p = 2;
  Variant variant = Variant::signed_power;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct TrialRecord {
  CellKey cell;
  int trial = 0;
  std::uint64_t derived_seed = 0;
  double deviation = 0.0;
  double restarts_agree_frac = 1.0;
  bool converged = true;
  double wall_ms = 0.0;  // measured in memory; persisted CSV zeroes it so
                         // output bytes stay a pure function of the plan
};

/// Per-trial seed: three chained splitmix64 finalizer applications folding
/// in base seed, cell index and trial index. Stable across runs of a build.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t cell_index,
                          std::uint64_t trial_index);

struct SweepResult {
  std::vector<TrialRecord> records;         // sorted by (cell, trial)
  std::vector<std::string> skipped_cells;   // invalid parameter combinations
};

/// Reports every cell of the plan that cannot run (missing moments,
/// enumeration caps); empty means the plan is fully executable.
std::vector<std::string> invalid_plan_cells(const SweepPlan& plan);

/// Runs every cell x trial of the plan. Trials execute on a worker pool
/// (workers = 0 picks the hardware count); outputs are keyed and sorted so
/// the result is schedule independent. p = 2 cells use the dense
/// eigensolver oracle; p >= 3 cells run the multi-start solver.
SweepResult run_sweep(const SweepPlan& plan, int workers = 0);

struct MeanEstimate {
  double mean = 0.0;
  double halfwidth95 = 0.0;  // 1.96 * sd / sqrt(T)
};

/// Sample mean and normal-approximation 95% halfwidth; needs >= 2 values.
MeanEstimate mean_deviation(const std::vector<double>& cell_values);

/// Groups record deviations by cell, preserving cell order.
std::map<CellKey, std::vector<double>> deviations_by_cell(
    const std::vector<TrialRecord>& records);

struct SandwichEntry {
  CellKey cell;
  double mean = 0.0;
  double rate_lower = 0.0;  // same shape as the upper rate, constant 1
  double rate_upper = 0.0;
  double rho = 0.0;         // mean / rate_lower
};

struct SandwichReport {
  std::vector<SandwichEntry> entries;
  double min_rho = 0.0, max_rho = 0.0, spread = 0.0;  // spread = max/min
  std::map<int, std::pair<double, double>> per_p;     // p -> (min, max)

  double spread_for_p(int p) const;
};

/// Ratio report of measured cell means against the two-sided rate pair.
/// Custom-spectrum cells need the plan-aware overload (the cell key alone
/// cannot reconstruct their eigenvalues).
SandwichReport sandwich_check(const std::map<CellKey, std::vector<double>>& cells,
                              double k_subg);
SandwichReport sandwich_check(const SweepPlan& plan,
                              const std::map<CellKey, std::vector<double>>& cells,
                              double k_subg);

/// Reconstructs the distribution a cell sampled from.
DistributionSpec plan_cell_spec(const SweepPlan& plan, const CellKey& cell);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  std::string x_label, y_label;
};

/// OLS fit of log y against log x; needs >= 3 strictly positive points.
ScalingFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points,
                            std::string x_label = "x", std::string y_label = "y");

/// Empirical survival fractions at ascending thresholds (strictly greater
/// comparisons); monotone non-increasing by construction.
std::vector<double> tail_exceedance(const std::vector<double>& values,
                                    const std::vector<double>& thresholds);

/// max over v in V of the empirical coordinate-projection l_m norm
/// (sum_i |<X_i,v>|^m)^{1/m}.
double lm_norm_empirical(const Sample& sample, const std::vector<Eigen::VectorXd>& index_set,
                         double m);

/// Same supremum over the whole unit sphere: m = 2 uses the largest
/// singular value; other m run multi-start projected gradient ascent.
double lm_norm_empirical_sphere(const Sample& sample, double m, std::uint64_t seed);

struct SignTailCheck {
  double empirical_prob = 0.0;
  double analytic_bound = 0.0;
  double t = 0.0;
};

/// Monte Carlo check of the head/tail rearrangement bound for sign sums:
/// draws `trials` sign vectors and counts violations of
/// sum_{i<=k} |z*_i| + t (sum_{i>k} (z*_i)^2)^{1/2}. Pass t <= 0 to use
/// the default t = sqrt(k).
SignTailCheck rademacher_tail_check(const Eigen::VectorXd& z, int k, int trials,
                                    std::uint64_t seed, double t = -1.0);

/// Monte Carlo estimate of E max_{i<=n} ||X_i||^p over whole-block
/// resamples. Matched seeds couple different n as prefix draws.
double max_norm_moment(const DistributionSpec& spec, int n, int p, int trials,
                       std::uint64_t seed);

/// Byte-stable CSV renderings (locale independent, trailing newline).
std::string trial_csv(const std::vector<TrialRecord>& records);
std::string summary_csv(const SweepPlan& plan, const std::vector<TrialRecord>& records);

/// Run metadata (plan echo, build id, generator id, timestamps). The only
/// output that is allowed to differ between reruns.
nlohmann::json run_metadata(const SweepPlan& plan, double wall_ms_total);

/// Locale-independent decimal rendering used by every persisted format.
std::string format_double(double x, int precision = 17);

inline constexpr int kPlanSchemaVersion = 1;

/// Loads a {"schema_version": 1, "plan": {...}} config file; rejects
/// unknown keys and schema version mismatches.
SweepPlan load_plan_file(const std::string& path);

}  // namespace tensorconc
