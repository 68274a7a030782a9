// Command-line front end: rate calculators, sweep simulation, verification
// suites. Exit codes: 0 success, 1 verification/solver failure, 2 usage or
// configuration error.

#include <clocale>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tensorconc/harness.hpp"
#include "tensorconc/rates.hpp"
#include "tensorconc/verify.hpp"

namespace {

using tensorconc::format_double;

struct RateFlags {
  std::optional<double> opnorm, rank, n, p, k, u, gamma, dpsi2, m, maxnorm, dim;
};

double need(const std::optional<double>& flag, const char* name) {
  if (!flag) throw CLI::ValidationError(std::string("missing required flag --") + name);
  return *flag;
}

double compute_rate(const std::string& name, const RateFlags& f) {
  namespace rates = tensorconc::rates;
  rates::TensorRateInputs tin;
  rates::ProcessRateInputs pin;

  if (name == "thm1-exp" || name == "thm1-tail" || name == "prop31") {
    tin.op_norm = need(f.opnorm, "opnorm");
    tin.eff_rank = need(f.rank, "rank");
    tin.n = need(f.n, "n");
    tin.p = need(f.p, "p");
    if (f.k) tin.k_subg = *f.k;
    if (name == "thm1-exp") return rates::thm1_expectation_rate(tin);
    if (name == "prop31") return rates::prop31_lower_rate(tin);
    tin.u = need(f.u, "u");
    return rates::thm1_tail_rate(tin);
  }
  if (name == "thm2-exp" || name == "thm2-tail" || name == "thm2-alt-tail" ||
      name == "remark25" || name == "remark41-lm") {
    pin.gamma = need(f.gamma, "gamma");
    pin.d_psi2 = need(f.dpsi2, "dpsi2");
    pin.n = need(f.n, "n");
    if (name == "remark41-lm") {
      pin.m = need(f.m, "m");
      pin.u = need(f.u, "u");
      return rates::remark41_lm_tail_rate(pin);
    }
    pin.p = need(f.p, "p");
    if (name == "thm2-exp") return rates::thm2_expectation_rate(pin);
    if (name == "remark25") return rates::remark25_rate(pin);
    pin.u = need(f.u, "u");
    return name == "thm2-tail" ? rates::thm2_tail_rate(pin)
                               : rates::thm2_alt_tail_rate(pin);
  }
  if (name == "guedon")
    return rates::competing_guedon_rate(need(f.opnorm, "opnorm"), need(f.p, "p"),
                                        need(f.n, "n"), need(f.maxnorm, "maxnorm"));
  if (name == "even")
    return rates::competing_even_rate(need(f.opnorm, "opnorm"), need(f.rank, "rank"),
                                      need(f.n, "n"), need(f.p, "p"),
                                      need(f.dim, "dim"));
  if (name == "kl-p2")
    return rates::kl_p2_rate(need(f.opnorm, "opnorm"), need(f.rank, "rank"),
                             need(f.n, "n"));
  throw CLI::ValidationError("unknown rate name: " + name);
}

int cmd_simulate(const std::string& config_path, std::string out_dir, bool force,
                 int workers, std::optional<std::uint64_t> seed_flag) {
  tensorconc::SweepPlan plan;
  try {
    plan = tensorconc::load_plan_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  // Seed precedence: flag > environment > config.
  if (const char* env = std::getenv("TENSORCONC_SEED"); env && !seed_flag) {
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      std::cerr << "config error: TENSORCONC_SEED is not an unsigned integer\n";
      return 2;
    }
    seed_flag = parsed;
  }
  if (seed_flag) plan.base_seed = *seed_flag;

  if (out_dir.empty()) out_dir = plan.output_path;
  if (out_dir.empty()) {
    std::cerr << "config error: no output directory (config \"output\" or --out)\n";
    return 2;
  }

  // Reject invalid cells up front so a bad config never half-runs.
  if (const auto bad = tensorconc::invalid_plan_cells(plan); !bad.empty()) {
    std::cerr << "config error: " << bad.front() << "\n";
    return 2;
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path trials_path = fs::path(out_dir) / "trials.csv";
  const fs::path summary_path = fs::path(out_dir) / "summary.csv";
  const fs::path meta_path = fs::path(out_dir) / "metadata.json";
  for (const auto& path : {trials_path, summary_path, meta_path}) {
    if (fs::exists(path) && !force) {
      std::cerr << "config error: " << path.string()
                << " exists; pass --force to overwrite\n";
      return 2;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const tensorconc::SweepResult result = tensorconc::run_sweep(plan, workers);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  // A cell whose trials mostly failed to converge is a solver failure.
  for (const auto& [cell, values] : tensorconc::deviations_by_cell(result.records)) {
    long bad = 0, total = 0;
    for (const auto& rec : result.records) {
      if (!(rec.cell == cell)) continue;
      ++total;
      if (!rec.converged) ++bad;
    }
    if (2 * bad > total) {
      std::cerr << "solver failure: cell " << tensorconc::to_string(cell.family) << "/"
                << tensorconc::to_string(cell.kind) << " d=" << cell.d
                << " N=" << cell.n << " p=" << cell.p << " had " << bad << "/" << total
                << " non-converged trials\n";
      return 1;
    }
  }

  std::ofstream(trials_path) << tensorconc::trial_csv(result.records);
  std::ofstream(summary_path) << tensorconc::summary_csv(plan, result.records);
  std::ofstream(meta_path) << tensorconc::run_metadata(plan, wall_ms).dump(2) << "\n";

  std::cout << "cell summary (mean deviation / lower rate):\n";
  for (const auto& [cell, values] : tensorconc::deviations_by_cell(result.records)) {
    const auto est = tensorconc::mean_deviation(values);
    std::cout << "  " << tensorconc::to_string(cell.family) << " "
              << tensorconc::to_string(cell.kind) << " d=" << cell.d << " N=" << cell.n
              << " p=" << cell.p << " " << tensorconc::to_string(cell.variant)
              << ": mean=" << format_double(est.mean, 6)
              << " ci95=" << format_double(est.halfwidth95, 3) << "\n";
  }
  std::cout << "wrote " << trials_path.string() << ", " << summary_path.string() << ", "
            << meta_path.string() << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& config_dir, int workers) {
  tensorconc::verify::SuiteResult result;
  try {
    result = tensorconc::verify::run_suite(suite, config_dir, workers);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& check : result.checks)
    std::cout << (check.pass ? "PASS " : "FAIL ") << check.name << " — " << check.detail
              << "\n";
  return result.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");  // '.' decimal separator everywhere

  CLI::App app{"rank-one tensor deviation laboratory"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (default: hardware)");

  // rate
  auto* rate = app.add_subcommand("rate", "print a closed-form rate");
  std::string rate_name;
  RateFlags flags;
  bool rate_json = false;
  rate->add_option("name", rate_name,
                   "one of thm1-exp thm1-tail prop31 thm2-exp thm2-tail thm2-alt-tail "
                   "remark25 remark41-lm guedon even kl-p2")
      ->required();
  rate->add_option("--opnorm", flags.opnorm, "operator norm");
  rate->add_option("--rank", flags.rank, "effective rank");
  rate->add_option("--n", flags.n, "sample size");
  rate->add_option("--p", flags.p, "order");
  rate->add_option("--k", flags.k, "sub-gaussian constant");
  rate->add_option("--u", flags.u, "tail parameter");
  rate->add_option("--gamma", flags.gamma, "chaining functional");
  rate->add_option("--dpsi2", flags.dpsi2, "class psi2 radius");
  rate->add_option("--m", flags.m, "coordinate-norm exponent");
  rate->add_option("--maxnorm", flags.maxnorm, "E max_i ||X_i||^p");
  rate->add_option("--dim", flags.dim, "ambient dimension");
  rate->add_flag("--json", rate_json, "emit JSON instead of plain decimal");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a sweep config to CSV");
  std::string config_path, out_dir;
  bool force = false;
  std::optional<std::uint64_t> seed_flag;
  simulate->add_option("config", config_path, "JSON sweep config")->required();
  simulate->add_option("--out", out_dir, "output directory (default: config output)");
  simulate->add_flag("--force", force, "overwrite existing outputs");
  simulate->add_option("--seed", seed_flag, "override base seed (flag > env > config)");

  // verify
  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  std::string suite;
  std::string config_dir = tensorconc::verify::default_config_dir();
  verify->add_option("suite", suite,
                     "one of gaussian-sandwich slopes p2-oracle chaining lm-bound "
                     "hoeffding phi")
      ->required();
  verify->add_option("--config-dir", config_dir, "directory with pinned sweep grids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (rate->parsed()) {
      const double value = compute_rate(rate_name, flags);
      if (rate_json) {
        std::cout << nlohmann::json{{"rate", rate_name}, {"value", value}}.dump() << "\n";
      } else {
        std::printf("%.12g\n", value);
      }
      return 0;
    }
    if (simulate->parsed())
      return cmd_simulate(config_path, out_dir, force, workers, seed_flag);
    if (verify->parsed()) return cmd_verify(suite, config_dir, workers);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
