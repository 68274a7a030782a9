#include "tensorconc/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <mutex>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tensorconc/chaining.hpp"
#include "tensorconc/deviation.hpp"
#include "tensorconc/harness.hpp"
#include "tensorconc/rates.hpp"
#include "tensorconc/rng.hpp"

namespace tensorconc::verify {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kSubg = rates::kGaussianSubgConstant;

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return std::string(buf);
}

double elapsed_min(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  int pool = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, std::min<int>(pool, static_cast<int>(count ? count : 1)));
  if (pool == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (int w = 0; w < pool; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string cell_name(const CellKey& cell) {
  return to_string(cell.kind) + (cell.kind == SpectrumKind::geometric
                                     ? "(q=" + format_double(cell.param, 3) + ")"
                                     : "") +
         " d=" + std::to_string(cell.d) + " N=" + std::to_string(cell.n) +
         " p=" + std::to_string(cell.p);
}

// ---------------------------------------------------------------- criterion 1

void criterion_p2_oracle(std::vector<Check>& checks, int workers) {
  const auto t0 = Clock::now();
  const std::vector<int> dims = {2, 8, 32, 64};
  const std::vector<int> sizes = {8, 64, 256};
  const int instances = 100;

  SolverConfig cfg;
  cfg.restarts = 18;
  cfg.max_iterations = 300;

  std::vector<double> rel_err(instances, 0.0);
  parallel_for(instances, workers, [&](std::size_t i) {
    DrawStream rng(derive_seed(0x9c2, 0, i));
    const int d = dims[i % dims.size()];
    const int n = sizes[(i / dims.size()) % sizes.size()];
    std::vector<double> lam(static_cast<std::size_t>(d));
    for (auto& l : lam) l = 0.2 + 1.8 * rng.uniform();
    DistributionSpec spec;
    spec.family = Family::gaussian;
    spec.spectrum = Spectrum::custom(lam);

    DeviationProblem prob;
    prob.spec = spec;
    prob.sample = draw_sample(spec, n, derive_seed(0x9c2, 1, i));
    prob.p = 2;
    prob.variant = Variant::signed_power;
    const double exact = exact_oracle_p2(prob.sample, spec);
    const MaximizerResult res = maximize_deviation(prob, cfg, derive_seed(0x9c2, 2, i));
    rel_err[i] = std::abs(res.value - exact) / std::max(1.0, exact);
  });

  const double worst = *std::max_element(rel_err.begin(), rel_err.end());
  const double mins = elapsed_min(t0);
  checks.push_back({"criterion-01 p2 oracle equivalence",
                    worst <= 1e-8 && mins <= 2.0,
                    fmt("max relative gap %.3e (tol 1e-8) over 100 instances, %.2f min "
                        "(budget 2)",
                        worst, mins)});
}

// ------------------------------------------------------- criteria 2, 4, 5, 10

void criterion_sandwich_bundle(std::vector<Check>& checks, const std::string& config_dir,
                               int workers) {
  const auto t0 = Clock::now();
  const SweepPlan plan = load_plan_file(config_dir + "/accept_sandwich.json");
  const SweepResult sweep = run_sweep(plan, workers);
  const auto cells = deviations_by_cell(sweep.records);
  const SandwichReport report = sandwich_check(cells, kSubg);
  const double sweep_min = elapsed_min(t0);

  // Criterion 2: per-p ratio windows plus the restart-agreement floor.
  for (int p : plan.p_list) {
    const double spread = report.spread_for_p(p);
    double lo = 0, hi = 0;
    for (const auto& e : report.entries) {
      if (e.cell.p != p) continue;
      if (lo == 0 || e.rho < lo) lo = e.rho;
      if (e.rho > hi) hi = e.rho;
    }
    checks.push_back({fmt("criterion-02 sandwich ratio window p=%d", p),
                      spread <= 3.0 && sweep_min <= 30.0,
                      fmt("rho in [%.3f, %.3f], max/min %.3f (window 3), sweep %.1f min "
                          "(budget 30)",
                          lo, hi, spread, sweep_min)});
  }
  std::map<int, std::pair<double, std::string>> worst_agree;  // p -> (value, cell)
  {
    std::map<CellKey, std::pair<double, int>> agg;
    for (const auto& rec : sweep.records) {
      if (rec.cell.p == 2) continue;
      auto& a = agg[rec.cell];
      a.first += rec.restarts_agree_frac;
      a.second += 1;
    }
    for (const auto& [cell, a] : agg) {
      const double mean_agree = a.first / a.second;
      auto& slot = worst_agree[cell.p];
      if (slot.second.empty() || mean_agree < slot.first)
        slot = {mean_agree, cell_name(cell)};
    }
  }
  for (const auto& [p, slot] : worst_agree) {
    checks.push_back({fmt("criterion-02 restart agreement p=%d", p), slot.first >= 0.30,
                      fmt("worst cell mean agreement %.3f (floor 0.30) at %s", slot.first,
                          slot.second.c_str())});
  }

  // Criterion 4: competitor rates dominate on every N >= 64 cell.
  {
    const auto t4 = Clock::now();
    double worst_guedon = std::numeric_limits<double>::infinity();
    double worst_even = std::numeric_limits<double>::infinity();
    std::string worst_guedon_cell, worst_even_cell;
    for (const auto& [cell, values] : cells) {
      if (cell.n < 64) continue;
      const Spectrum spec_model = Spectrum::make(cell.kind, cell.d, cell.param);
      rates::TensorRateInputs in;
      in.op_norm = spec_model.operator_norm();
      in.eff_rank = spec_model.effective_rank();
      in.n = cell.n;
      in.p = cell.p;
      const double ours = rates::thm1_expectation_rate(in);
      DistributionSpec spec;
      spec.family = Family::gaussian;
      spec.spectrum = spec_model;
      const double mm = max_norm_moment(spec, cell.n, cell.p, 200,
                                        derive_seed(0xC4, cell.d, cell.n * cell.p));
      const double guedon = rates::competing_guedon_rate(in.op_norm, cell.p, cell.n, mm);
      const double even =
          rates::competing_even_rate(in.op_norm, in.eff_rank, cell.n, cell.p, cell.d);
      if (guedon / ours < worst_guedon) {
        worst_guedon = guedon / ours;
        worst_guedon_cell = cell_name(cell);
      }
      if (even / ours < worst_even) {
        worst_even = even / ours;
        worst_even_cell = cell_name(cell);
      }
    }
    const double mins4 = elapsed_min(t4);
    checks.push_back({"criterion-04 competitor domination (max-norm based)",
                      worst_guedon > 1.0 && mins4 <= 5.0,
                      fmt("min competitor/ours %.3f at %s, %.2f min (budget 5)",
                          worst_guedon, worst_guedon_cell.c_str(), mins4)});
    checks.push_back({"criterion-04 competitor domination (entropy based)", worst_even > 1.0,
                      fmt("min competitor/ours %.3f at %s", worst_even,
                          worst_even_cell.c_str())});
  }

  // Criterion 5: tail exceedance monotone in the tail parameter.
  {
    const auto t5 = Clock::now();
    const SweepPlan tails_plan = load_plan_file(config_dir + "/accept_tails.json");
    const SweepResult tails = run_sweep(tails_plan, workers);
    bool ok = true;
    std::string detail;
    for (const auto& [cell, values] : deviations_by_cell(tails.records)) {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const double median = 0.5 * (sorted[(sorted.size() - 1) / 2] +
                                   sorted[sorted.size() / 2]);
      const Spectrum spec_model = Spectrum::make(cell.kind, cell.d, cell.param);
      std::vector<double> thresholds;
      for (double u : {1.0, 2.0, 3.0}) {
        const double increment =
            std::pow(kSubg, cell.p) * std::pow(spec_model.operator_norm(), cell.p / 2.0) *
            (std::sqrt(u / cell.n) + std::pow(u, cell.p / 2.0) / cell.n);
        thresholds.push_back(median + increment);
      }
      const std::vector<double> exceed = tail_exceedance(values, thresholds);
      const bool monotone = exceed[0] >= exceed[1] && exceed[1] >= exceed[2];
      const bool small_head = exceed[0] <= 0.5;
      ok = ok && monotone && small_head;
      detail += fmt("[%s: %.3f/%.3f/%.3f] ", cell_name(cell).c_str(), exceed[0], exceed[1],
                    exceed[2]);
    }
    const double mins5 = elapsed_min(t5);
    ok = ok && mins5 <= 15.0;
    checks.push_back({"criterion-05 tail exceedance monotonicity", ok,
                      detail + fmt("%.1f min (budget 15)", mins5)});
  }

  // Criterion 10: rerunning the smallest cell reproduces identical bytes.
  {
    const auto t10 = Clock::now();
    SweepPlan small = plan;
    small.spectra = {SpectrumBlock{SpectrumKind::identity, 0.0, {4}, {}}};
    small.n_grid = {16};
    small.p_list = {2};
    const std::string csv_a = trial_csv(run_sweep(small, workers).records);
    const std::string csv_b = trial_csv(run_sweep(small, workers).records);
    const double mins10 = elapsed_min(t10);
    checks.push_back({"criterion-10 determinism (byte-identical rerun)",
                      csv_a == csv_b && !csv_a.empty() && mins10 <= 1.0,
                      fmt("%zu bytes, rerun %s, %.2f min (budget 1)", csv_a.size(),
                          csv_a == csv_b ? "identical" : "DIFFERS", mins10)});
  }
}

// ---------------------------------------------------------------- criterion 3

void criterion_slopes(std::vector<Check>& checks, const std::string& config_dir,
                      int workers) {
  const auto t0 = Clock::now();

  // Cells whose confidence halfwidth exceeds 10% of the mean are dropped
  // before fitting.
  auto fit_points = [](const std::map<CellKey, std::vector<double>>& cells,
                       auto&& x_of, int p_filter) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [cell, values] : cells) {
      if (p_filter > 0 && cell.p != p_filter) continue;
      const MeanEstimate est = mean_deviation(values);
      if (est.halfwidth95 > 0.10 * est.mean) continue;
      pts.emplace_back(x_of(cell), est.mean);
    }
    return pts;
  };

  {
    const SweepPlan plan = load_plan_file(config_dir + "/accept_slopes_n.json");
    const auto cells = deviations_by_cell(run_sweep(plan, workers).records);
    const auto pts = fit_points(cells, [](const CellKey& c) { return double(c.n); }, 0);
    const ScalingFit fit = fit_loglog_slope(pts, "N", "mean deviation");
    checks.push_back({"criterion-03a slope in sample size",
                      fit.slope >= -0.65 && fit.slope <= -0.35 && fit.r_squared >= 0.95,
                      fmt("slope %.3f (window [-0.65,-0.35]), r^2 %.4f (floor 0.95), "
                          "%d points",
                          fit.slope, fit.r_squared, fit.n_points)});
  }
  {
    const SweepPlan plan = load_plan_file(config_dir + "/accept_slopes_d.json");
    const auto cells = deviations_by_cell(run_sweep(plan, workers).records);
    for (int p : {2, 4}) {
      const auto pts = fit_points(cells, [](const CellKey& c) { return double(c.d); }, p);
      const double center = p / 2.0;
      if (pts.size() < 3) {
        // The noise filter starved the fit; report the unfiltered slope so
        // the failure carries its evidence.
        std::vector<std::pair<double, double>> all;
        for (const auto& [cell, values] : cells)
          if (cell.p == p) all.emplace_back(cell.d, mean_deviation(values).mean);
        const ScalingFit raw = fit_loglog_slope(all, "d", "mean deviation");
        checks.push_back(
            {fmt("criterion-03b slope in dimension p=%d", p), false,
             fmt("only %zu cells pass the 10%% CI filter (need 3); unfiltered "
                 "slope %.3f (window [%.2f,%.2f]), r^2 %.4f",
                 pts.size(), raw.slope, center - 0.25, center + 0.25, raw.r_squared)});
        continue;
      }
      const ScalingFit fit = fit_loglog_slope(pts, "d", "mean deviation");
      checks.push_back(
          {fmt("criterion-03b slope in dimension p=%d", p),
           fit.slope >= center - 0.25 && fit.slope <= center + 0.25 && fit.r_squared >= 0.95,
           fmt("slope %.3f (window [%.2f,%.2f]), r^2 %.4f (floor 0.95), %d points",
               fit.slope, center - 0.25, center + 0.25, fit.r_squared, fit.n_points)});
    }
  }
  const double mins = elapsed_min(t0);
  checks.push_back({"criterion-03 runtime", mins <= 20.0,
                    fmt("%.1f min (budget 20)", mins)});
}

// ---------------------------------------------------------------- criterion 6

std::vector<Eigen::VectorXd> random_vectors(DrawStream& rng, int count, int dim,
                                            double scale) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v[j] = scale * rng.normal();
    out.push_back(std::move(v));
  }
  return out;
}

void criterion_chaining(std::vector<Check>& checks, int workers) {
  (void)workers;
  const auto t0 = Clock::now();

  // (a) exhaustive <= greedy <= entropy sum on random 6-point spaces.
  {
    DrawStream rng(0xA11CE);
    bool ok = true;
    std::string worst;
    for (int rep = 0; rep < 50; ++rep) {
      const auto pts = random_vectors(rng, 6, 3, 1.0);
      Eigen::MatrixXd dist(6, 6);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          dist(i, j) = (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm();
      const FiniteMetricSpace space(dist);
      const double exact = gamma2(space, GammaMethod::exhaustive).value;
      const double greedy = gamma2(space, GammaMethod::greedy_ffp).value;
      const double dudley = dudley_sum(space);
      if (!(exact <= greedy + 1e-12 && greedy <= dudley + 1e-12)) {
        ok = false;
        worst = fmt("rep %d: exact %.6f greedy %.6f dudley %.6f", rep, exact, greedy, dudley);
      }
    }
    checks.push_back({"criterion-06a exhaustive <= greedy <= entropy sum", ok,
                      ok ? "50 random 6-point spaces" : worst});
  }

  // (b)+(c)+(d): random finite linear classes under the gaussian base.
  {
    DrawStream rng(0xB0B);
    double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0.0;
    double max_lambda_const = 0.0;
    bool lower_ok = true;
    for (int rep = 0; rep < 20; ++rep) {
      const int dim = 2 + static_cast<int>(rng.uniform() * 15);   // <= 16
      const int half = 2 + static_cast<int>(rng.uniform() * 30);  // |V| <= 64 after symmetrizing
      DistributionSpec spec;
      spec.family = Family::gaussian;
      std::vector<double> lam(static_cast<std::size_t>(dim));
      for (auto& l : lam) l = 0.25 + 1.5 * rng.uniform();
      spec.spectrum = Spectrum::custom(lam);

      auto vecs = random_vectors(rng, half, dim, 1.0);
      std::vector<Eigen::VectorXd> sym = vecs;
      for (const auto& v : vecs) sym.push_back(-v);  // symmetric class
      const FiniteFunctionClass cls = FiniteFunctionClass::build(sym, spec);

      const double gamma = gamma2(cls.psi2_space, GammaMethod::greedy_ffp).value;
      const WidthEstimate width = gaussian_width(cls, 100000, derive_seed(0xB0B, 7, rep));
      const double ratio = width.value / gamma;
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);

      const LambdaEstimate lambda = lambda_functional(cls, 0, 1.0);
      max_lambda_const = std::max(max_lambda_const, lambda.lambda / gamma);

      if (!(gamma >= cls.d_psi2 - 1e-12)) lower_ok = false;
    }
    checks.push_back({"criterion-06b width/gamma2 sandwich",
                      min_ratio >= 1.0 / 25.0 && max_ratio <= 25.0,
                      fmt("ratio range [%.4f, %.4f] (window [1/25, 25])", min_ratio,
                          max_ratio)});
    checks.push_back({"criterion-06c graded chaining bounded by gamma2",
                      max_lambda_const <= 10.0,
                      fmt("max measured constant %.4f (cap 10)", max_lambda_const)});
    checks.push_back({"criterion-06d gamma2 dominates the psi2 radius", lower_ok,
                      "checked on 20 symmetric classes"});
  }

  // (e) the gaussian Orlicz norm via the exact expectation identity.
  {
    auto gaussian_exp_moment = [](double c) {
      const double c2 = c * c;
      if (c2 <= 2.0) return std::numeric_limits<double>::infinity();
      return 1.0 / std::sqrt(1.0 - 2.0 / c2);
    };
    const double norm = orlicz_norm(gaussian_exp_moment, 2.0);
    const double target = std::sqrt(8.0 / 3.0);
    checks.push_back({"criterion-06e standard gaussian psi2 norm",
                      std::abs(norm - target) <= 1e-9,
                      fmt("measured %.12f vs sqrt(8/3) %.12f", norm, target)});
  }

  const double mins = elapsed_min(t0);
  checks.push_back({"criterion-06 runtime", mins <= 5.0, fmt("%.1f min (budget 5)", mins)});
}

// ---------------------------------------------------------------- criterion 7

void criterion_lm(std::vector<Check>& checks, int workers) {
  (void)workers;
  const auto t0 = Clock::now();
  bool window_ok = true, svd_ok = true;
  double worst_ratio_lo = std::numeric_limits<double>::infinity(), worst_ratio_hi = 0.0;
  double worst_svd = 0.0;
  for (int d : {4, 16}) {
    for (int n : {16, 256}) {
      DistributionSpec spec;
      spec.family = Family::gaussian;
      spec.spectrum = Spectrum::identity(d);
      const Sample sample = draw_sample(spec, n, derive_seed(0x117, d, n));
      for (double m : {2.0, 4.0}) {
        const double empirical =
            lm_norm_empirical_sphere(sample, m, derive_seed(0x117, 99, d * 1000 + n));
        const double rate = kSubg * std::sqrt(spec.spectrum.trace()) +
                            std::pow(static_cast<double>(n), 1.0 / m) * kSubg *
                                std::sqrt(spec.spectrum.operator_norm());
        const double ratio = empirical / rate;
        worst_ratio_lo = std::min(worst_ratio_lo, ratio);
        worst_ratio_hi = std::max(worst_ratio_hi, ratio);
        if (!(ratio >= 1.0 / 20.0 && ratio <= 20.0)) window_ok = false;
        if (m == 2.0) {
          // Independent route: Gram-matrix eigenvalue.
          Eigen::MatrixXd gram = sample.data.transpose() * sample.data;
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
          const double svd_value = std::sqrt(es.eigenvalues().maxCoeff());
          const double gap = std::abs(empirical - svd_value) / std::max(1.0, svd_value);
          worst_svd = std::max(worst_svd, gap);
          if (gap > 1e-8) svd_ok = false;
        }
      }
    }
  }
  const double mins = elapsed_min(t0);
  checks.push_back({"criterion-07 coordinate-norm window", window_ok && mins <= 5.0,
                    fmt("ratio range [%.4f, %.4f] (window [1/20, 20]), %.2f min (budget 5)",
                        worst_ratio_lo, worst_ratio_hi, mins)});
  checks.push_back({"criterion-07 m=2 matches the spectral oracle", svd_ok,
                    fmt("max relative gap %.3e (tol 1e-8)", worst_svd)});
}

// ---------------------------------------------------------------- criterion 8

void criterion_hoeffding(std::vector<Check>& checks, int workers) {
  const auto t0 = Clock::now();
  const int n = 64;
  const double t = 3.0;
  const int k = static_cast<int>(std::ceil(t * t));
  const double analytic = 2.0 * std::exp(-0.5 * t * t);
  std::vector<double> probs(10, 0.0);
  parallel_for(10, workers, [&](std::size_t rep) {
    DrawStream rng(derive_seed(0x4069, 3, rep));
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    const SignTailCheck out =
        rademacher_tail_check(z, k, 1000000, derive_seed(0x4069, 4, rep), t);
    probs[rep] = out.empirical_prob;
  });
  const double worst = *std::max_element(probs.begin(), probs.end());
  const double mins = elapsed_min(t0);
  checks.push_back({"criterion-08 sign-sum head/tail bound",
                    worst <= analytic && mins <= 2.0,
                    fmt("max violation rate %.3e vs bound %.3e over 10 vectors, %.2f min "
                        "(budget 2)",
                        worst, analytic, mins)});
}

// ---------------------------------------------------------------- criterion 9

void criterion_phi(std::vector<Check>& checks, int workers) {
  (void)workers;
  const auto t0 = Clock::now();

  bool roundtrip_ok = true;
  double worst_roundtrip = 0.0;
  for (int n = 1; n <= 1024; n *= 2) {
    for (double m : {1.0, 2.0, 3.0, 4.0}) {
      const YoungPhi y{n, m};
      for (double x : {0.1, 1.0, 10.0}) {
        const double back = phi_inverse(y, phi(y, x));
        const double err = std::abs(back - x) / std::max(1.0, x);
        worst_roundtrip = std::max(worst_roundtrip, err);
        if (err > 1e-10) roundtrip_ok = false;
      }
    }
  }
  checks.push_back({"criterion-09 phi roundtrip", roundtrip_ok,
                    fmt("max relative error %.3e (tol 1e-10)", worst_roundtrip)});

  // Sub-multiplicativity constant of the inverse, measured over dyadic
  // grids and pinned per m as a regression value (first-run measurements
  // were 0.7844, 1.0000, 1.4142, 1.9999).
  const std::map<double, double> pinned = {
      {1.0, 0.79}, {2.0, 1.01}, {3.0, 1.42}, {4.0, 2.01}};
  bool const_ok = true;
  std::string detail;
  for (const auto& [m, cap] : pinned) {
    double measured = 0.0;
    for (int n = 1; n <= 1024; n *= 2) {
      const YoungPhi y{n, m};
      for (int ex = -6; ex <= 12; ++ex) {
        for (int ey = -6; ey <= 12; ++ey) {
          const double x = std::pow(2.0, ex), yv = std::pow(2.0, ey);
          const double ratio =
              phi_inverse(y, x * yv) / (phi_inverse(y, x) + phi_inverse(y, yv));
          measured = std::max(measured, ratio);
        }
      }
    }
    if (!std::isfinite(measured) || measured > cap) const_ok = false;
    detail += fmt("m=%g: %.4f (pin %.2f) ", m, measured, cap);
  }
  const double mins = elapsed_min(t0);
  checks.push_back({"criterion-09 inverse sub-multiplicativity constants",
                    const_ok && mins <= 1.0, detail + fmt("%.2f min (budget 1)", mins)});
}

}  // namespace

bool SuiteResult::all_pass() const {
  for (const auto& check : checks)
    if (!check.pass) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "gaussian-sandwich", "slopes", "p2-oracle", "chaining", "lm-bound", "hoeffding",
      "phi"};
  return names;
}

std::string default_config_dir() {
#ifdef TENSORCONC_CONFIG_DIR
  return TENSORCONC_CONFIG_DIR;
#else
  return "configs";
#endif
}

SuiteResult run_suite(const std::string& name, const std::string& config_dir, int workers) {
  SuiteResult result;
  result.suite = name;
  try {
    if (name == "p2-oracle") {
      criterion_p2_oracle(result.checks, workers);
    } else if (name == "gaussian-sandwich") {
      criterion_sandwich_bundle(result.checks, config_dir, workers);
    } else if (name == "slopes") {
      criterion_slopes(result.checks, config_dir, workers);
    } else if (name == "chaining") {
      criterion_chaining(result.checks, workers);
    } else if (name == "lm-bound") {
      criterion_lm(result.checks, workers);
    } else if (name == "hoeffding") {
      criterion_hoeffding(result.checks, workers);
    } else if (name == "phi") {
      criterion_phi(result.checks, workers);
    } else {
      throw std::invalid_argument("unknown verify suite: " + name);
    }
  } catch (const std::invalid_argument&) {
    throw;  // usage errors keep their contract
  } catch (const std::exception& e) {
    result.checks.push_back({name + " execution", false,
                             std::string("suite aborted: ") + e.what()});
  }
  return result;
}

}  // namespace tensorconc::verify
