#include "tensorconc/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tensorconc/errors.hpp"
#include "tensorconc/mathutil.hpp"
#include "tensorconc/rng.hpp"

namespace tensorconc {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_unit_dim(const DeviationProblem& prob, const Eigen::VectorXd& v) {
  if (v.size() != prob.dim())
    throw std::invalid_argument("direction dimension does not match problem");
  if (std::abs(v.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("direction must have unit norm");
}

double power_term(double t, int p, Variant variant) {
  if (variant == Variant::signed_power) return pow_int(t, p);
  return std::abs(pow_int(t, p));
}

// g'(t)/p: t^{p-1} or |t|^{p-1} sign(t), with subgradient 0 at t = 0.
double power_slope(double t, int p, Variant variant) {
  if (variant == Variant::signed_power) return pow_int(t, p - 1);
  if (t == 0.0) return 0.0;
  return std::abs(pow_int(t, p - 1)) * (t > 0.0 ? 1.0 : -1.0);
}

double population_term(const DeviationProblem& prob, const Eigen::VectorXd& v) {
  return prob.variant == Variant::signed_power
             ? population_moment(prob.spec, v, prob.p)
             : population_abs_moment(prob.spec, v, prob.p);
}

Eigen::VectorXd population_term_gradient(const DeviationProblem& prob,
                                         const Eigen::VectorXd& v) {
  return prob.variant == Variant::signed_power
             ? population_moment_gradient(prob.spec, v, prob.p)
             : population_abs_moment_gradient(prob.spec, v, prob.p);
}

struct AscentOutcome {
  double value = 0.0;
  Eigen::VectorXd v;
  int iterations = 0;
  bool converged = false;
};

// Objective evaluation that exposes the projected data t = X v so the
// follow-up gradient can reuse it.
double objective_with_proj(const DeviationProblem& prob, const Eigen::VectorXd& v,
                           Eigen::VectorXd& t) {
  t.noalias() = prob.sample.data * v;
  double acc = 0.0;
  for (int i = 0; i < t.size(); ++i) acc += power_term(t[i], prob.p, prob.variant);
  return acc / static_cast<double>(prob.sample.n) - population_term(prob, v);
}

Eigen::VectorXd gradient_from_proj(const DeviationProblem& prob, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& t) {
  Eigen::VectorXd w(t.size());
  for (int i = 0; i < t.size(); ++i) w[i] = power_slope(t[i], prob.p, prob.variant);
  const double p = static_cast<double>(prob.p);
  Eigen::VectorXd grad =
      (p / static_cast<double>(prob.sample.n)) * (prob.sample.data.transpose() * w);
  grad -= p * population_term_gradient(prob, v);
  return grad;
}

// Projected gradient ascent with Armijo backtracking on sign * objective.
AscentOutcome ascend(const DeviationProblem& prob, const SolverConfig& cfg, double sign,
                     Eigen::VectorXd v) {
  v.normalize();
  Eigen::VectorXd t;
  double f = sign * objective_with_proj(prob, v, t);
  double step = cfg.initial_step;
  AscentOutcome out;
  out.converged = false;
  int it = 0;
  Eigen::VectorXd tn;
  for (; it < cfg.max_iterations; ++it) {
    Eigen::VectorXd g = sign * gradient_from_proj(prob, v, t);
    g -= g.dot(v) * v;  // tangent component
    const double gn2 = g.squaredNorm();
    if (gn2 < 1e-30) {
      out.converged = true;
      break;
    }
    double s = step;
    bool accepted = false;
    Eigen::VectorXd vn;
    double fn = f;
    for (int bt = 0; bt < 64; ++bt) {
      vn = (v + s * g).normalized();
      fn = sign * objective_with_proj(prob, vn, tn);
      if (fn >= f + cfg.sufficient_increase * s * gn2) {
        accepted = true;
        break;
      }
      s *= cfg.step_shrink;
    }
    if (!accepted) {
      out.converged = true;  // no ascent direction left at machine scale
      break;
    }
    const double moved = (vn - v).norm();
    v = std::move(vn);
    t.swap(tn);
    f = fn;
    step = std::min(s * 2.0, 1e6);
    if (moved < cfg.convergence_tol) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.value = f;
  out.v = std::move(v);
  out.iterations = it;
  return out;
}

// First-nonzero-coordinate-positive representative of {v, -v}.
void canonicalize_sign(Eigen::VectorXd& v) {
  for (int j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) {
      if (v[j] < 0.0) v = -v;
      return;
    }
  }
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int j = 0; j < a.size(); ++j) {
    if (a[j] != b[j]) return a[j] < b[j];
  }
  return false;
}

double golden_section_max(const std::function<double(double)>& h, double a, double b,
                          double tol) {
  const double inv_phi = 0.6180339887498948482;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = h(x1), f2 = h(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = h(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = h(x1);
    }
  }
  return std::max(f1, f2);
}

// Conservative Lipschitz constant (per grid angle) for the deviation along
// grid directions: empirical part p * mean ||X_i||^p plus a population bound
// valid for all supported families at the low dimensions the grids allow.
double angle_lipschitz(const Eigen::MatrixXd& data, const Spectrum& spectrum, int p,
                       bool include_population) {
  double mean_norm_p = 0.0;
  for (int i = 0; i < data.rows(); ++i)
    mean_norm_p += std::pow(data.row(i).norm(), p);
  mean_norm_p /= static_cast<double>(data.rows());
  double pop = 0.0;
  if (include_population) {
    const double moment_const =
        std::max(odd_double_factorial(p % 2 == 0 ? p : p + 1), gaussian_abs_moment(p));
    pop = std::pow(static_cast<double>(spectrum.dim()), p / 2.0) * moment_const *
          std::pow(spectrum.operator_norm(), p / 2.0);
  }
  return static_cast<double>(p) * (mean_norm_p + pop);
}

}  // namespace

std::string to_string(Variant variant) {
  return variant == Variant::signed_power ? "signed" : "absolute";
}

Variant variant_from_string(const std::string& name) {
  if (name == "signed") return Variant::signed_power;
  if (name == "absolute") return Variant::absolute_power;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string to_string(SeedProvenance sp) {
  switch (sp) {
    case SeedProvenance::random: return "random";
    case SeedProvenance::data_direction: return "data_direction";
    case SeedProvenance::sample_cov_eigvec: return "sample_cov_eigvec";
  }
  throw std::logic_error("unreachable seed provenance");
}

void DeviationProblem::validate() const {
  spec.validate();
  if (p < 2) throw std::invalid_argument("deviation order p must be >= 2");
  if (sample.data.cols() != spec.dim())
    throw std::invalid_argument("sample dimension does not match spec");
  if (sample.data.rows() != sample.n || sample.n < 1)
    throw std::invalid_argument("sample row count does not match n");
  if (sample.spec_digest != spec.digest())
    throw std::invalid_argument("sample was drawn from a different spec");
}

void SolverConfig::validate() const {
  if (restarts < 1 || max_iterations < 1 || !(convergence_tol > 0) ||
      !(initial_step > 0) || !(sufficient_increase > 0) || grid_resolution_2d < 1 ||
      grid_resolution_3d < 1)
    throw std::invalid_argument("solver configuration values must be positive");
  if (!(step_shrink > 0.0 && step_shrink < 1.0))
    throw std::invalid_argument("step shrink must lie in (0,1)");
}

nlohmann::json MaximizerResult::to_json() const {
  std::vector<double> vv(argmax.data(), argmax.data() + argmax.size());
  return nlohmann::json{{"value", value},
                        {"argmax", vv},
                        {"sign_branch", sign_branch},
                        {"iterations_used", iterations_used},
                        {"restarts_used", restarts_used},
                        {"seed_provenance", to_string(seed_provenance)},
                        {"converged", converged},
                        {"restart_agreement", restart_agreement}};
}

double deviation_objective(const DeviationProblem& prob, const Eigen::VectorXd& v) {
  require_unit_dim(prob, v);
  const Eigen::VectorXd t = prob.sample.data * v;
  double acc = 0.0;
  for (int i = 0; i < t.size(); ++i) acc += power_term(t[i], prob.p, prob.variant);
  return acc / static_cast<double>(prob.sample.n) - population_term(prob, v);
}

Eigen::VectorXd deviation_gradient(const DeviationProblem& prob, const Eigen::VectorXd& v) {
  require_unit_dim(prob, v);
  const Eigen::VectorXd t = prob.sample.data * v;
  Eigen::VectorXd w(t.size());
  for (int i = 0; i < t.size(); ++i) w[i] = power_slope(t[i], prob.p, prob.variant);
  const double p = static_cast<double>(prob.p);
  Eigen::VectorXd grad =
      (p / static_cast<double>(prob.sample.n)) * (prob.sample.data.transpose() * w);
  grad -= p * population_term_gradient(prob, v);
  return grad;
}

MaximizerResult maximize_deviation(const DeviationProblem& prob, const SolverConfig& cfg,
                                   std::uint64_t seed) {
  prob.validate();
  cfg.validate();
  const int d = prob.dim();
  const int n = prob.sample.n;

  struct SeedPoint {
    Eigen::VectorXd v;
    SeedProvenance provenance;
  };
  std::vector<SeedPoint> seeds;
  seeds.reserve(static_cast<std::size_t>(cfg.restarts));

  // Thirds of the restart budget; the eigenvector class absorbs the
  // remainder (and is the whole budget when restarts < 3).
  const int n_uniform = cfg.restarts / 3;
  const int n_rows = cfg.restarts / 3;
  const int n_eig = cfg.restarts - n_uniform - n_rows;

  DrawStream rng(mix64(seed ^ 0x746e736f6c766572ULL));
  for (int k = 0; k < n_uniform; ++k) {
    Eigen::VectorXd g(d);
    double nrm = 0.0;
    do {
      for (int j = 0; j < d; ++j) g[j] = rng.normal();
      nrm = g.norm();
    } while (nrm == 0.0);
    seeds.push_back({g / nrm, SeedProvenance::random});
  }

  // Heaviest rows carry the spike candidates.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double na = prob.sample.data.row(a).norm();
    const double nb = prob.sample.data.row(b).norm();
    if (na != nb) return na > nb;
    return a < b;
  });
  for (int k = 0; k < n_rows; ++k) {
    const Eigen::VectorXd row = prob.sample.data.row(order[static_cast<std::size_t>(k % n)]);
    const double nrm = row.norm();
    if (nrm == 0.0) {
      seeds.push_back({Eigen::VectorXd::Unit(d, 0), SeedProvenance::data_direction});
    } else {
      seeds.push_back({row / nrm, SeedProvenance::data_direction});
    }
  }

  const Eigen::MatrixXd cov =
      prob.sample.data.transpose() * prob.sample.data / static_cast<double>(n);
  Eigen::MatrixXd dev = cov;
  const auto& lam = prob.spec.spectrum.eigenvalues();
  for (int j = 0; j < d; ++j) dev(j, j) -= lam[static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_cov(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_dev(dev);
  std::vector<Eigen::VectorXd> eig_seeds;
  eig_seeds.push_back(es_dev.eigenvectors().col(d - 1));  // most positive
  eig_seeds.push_back(es_dev.eigenvectors().col(0));      // most negative
  for (int j = d - 1; j >= 0 && eig_seeds.size() < 8; --j)
    eig_seeds.push_back(es_cov.eigenvectors().col(j));
  for (int k = 0; k < n_eig; ++k)
    seeds.push_back({eig_seeds[static_cast<std::size_t>(k) % eig_seeds.size()],
                     SeedProvenance::sample_cov_eigvec});

  struct BranchBest {
    bool valid = false;
    double value = 0.0;
    Eigen::VectorXd v;
    int iterations = 0;
    bool converged = false;
    SeedProvenance provenance = SeedProvenance::random;
    double agreement = 0.0;
  };

  auto run_branch = [&](double sign) {
    BranchBest best;
    std::vector<double> values;
    values.reserve(seeds.size());
    for (const SeedPoint& sp : seeds) {
      AscentOutcome out = ascend(prob, cfg, sign, sp.v);
      values.push_back(out.value);
      Eigen::VectorXd cand = out.v;
      const bool sign_symmetric =
          prob.variant == Variant::absolute_power || prob.p % 2 == 0;
      if (sign_symmetric) canonicalize_sign(cand);
      if (!best.valid || out.value > best.value ||
          (out.value == best.value && lex_less(cand, best.v))) {
        best.valid = true;
        best.value = out.value;
        best.v = cand;
        best.iterations = out.iterations;
        best.converged = out.converged;
        best.provenance = sp.provenance;
      }
    }
    int close = 0;
    const double tol = 1e-6 * std::max(1.0, std::abs(best.value));
    for (double val : values)
      if (val >= best.value - tol) ++close;
    best.agreement = static_cast<double>(close) / static_cast<double>(values.size());
    return best;
  };

  const BranchBest plus = run_branch(+1.0);
  const BranchBest minus = run_branch(-1.0);
  const bool take_plus = plus.value >= minus.value;  // ties resolve to +
  const BranchBest& win = take_plus ? plus : minus;

  MaximizerResult result;
  result.value = win.value;
  result.argmax = win.v;
  result.sign_branch = take_plus ? +1 : -1;
  result.iterations_used = win.iterations;
  result.restarts_used = static_cast<int>(seeds.size());
  result.seed_provenance = win.provenance;
  result.converged = win.converged;
  result.restart_agreement = win.agreement;
  return result;
}

double exact_oracle_p2(const Sample& sample, const DistributionSpec& spec) {
  spec.validate();
  const int d = spec.dim();
  if (d > 2048) throw unsupported_error("dense p=2 oracle capped at d <= 2048");
  if (sample.data.cols() != d)
    throw std::invalid_argument("sample dimension does not match spec");
  Eigen::MatrixXd a =
      sample.data.transpose() * sample.data / static_cast<double>(sample.n);
  const auto& lam = spec.spectrum.eigenvalues();
  for (int j = 0; j < d; ++j) a(j, j) -= lam[static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double grid_oracle(const DeviationProblem& prob, int resolution) {
  prob.validate();
  if (resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
  const int d = prob.dim();

  if (d == 2) {
    // Half circle suffices: the families are symmetric, so |objective| is
    // invariant under v -> -v.
    double best = -1.0;
    double best_theta = 0.0;
    for (int k = 0; k < resolution; ++k) {
      const double theta = kPi * k / resolution;
      Eigen::VectorXd v(2);
      v << std::cos(theta), std::sin(theta);
      const double val = std::abs(deviation_objective(prob, v));
      if (val > best) {
        best = val;
        best_theta = theta;
      }
    }
    auto h = [&](double theta) {
      Eigen::VectorXd v(2);
      v << std::cos(theta), std::sin(theta);
      return std::abs(deviation_objective(prob, v));
    };
    const double width = kPi / resolution;
    const double refined =
        golden_section_max(h, best_theta - width, best_theta + width, 1e-10);
    return std::max(best, refined);
  }

  if (d == 3) {
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    std::vector<std::pair<double, Eigen::VectorXd>> scored;
    scored.reserve(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / resolution;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * i;
      Eigen::VectorXd v(3);
      v << r * std::cos(phi), r * std::sin(phi), z;
      scored.emplace_back(std::abs(deviation_objective(prob, v)), v);
    }
    std::partial_sort(scored.begin(), scored.begin() + std::min<std::size_t>(10, scored.size()),
                      scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    SolverConfig polish;
    polish.restarts = 1;
    double best = scored.front().first;
    for (std::size_t k = 0; k < std::min<std::size_t>(10, scored.size()); ++k) {
      const Eigen::VectorXd& v0 = scored[k].second;
      const double sign = deviation_objective(prob, v0) >= 0.0 ? 1.0 : -1.0;
      const AscentOutcome out = ascend(prob, polish, sign, v0);
      best = std::max(best, out.value);
    }
    return best;
  }

  throw unsupported_error("grid oracle supports d in {2, 3} only");
}

double grid_gap_bound(const DeviationProblem& prob, int resolution) {
  prob.validate();
  const double lip = angle_lipschitz(prob.sample.data, prob.spec.spectrum, prob.p, true);
  // d = 2 grid spacing pi/res; the d = 3 Fibonacci grid has covering radius
  // about sqrt(2 pi / res) and is followed by a polish, so the angular bound
  // below is used for d = 2 certificates.
  return lip * (kPi / resolution) * 0.5;
}

double multilinear_grid_sup(const Sample& sample, const DistributionSpec& spec, int p,
                            int resolution) {
  spec.validate();
  if (spec.dim() != 2) throw unsupported_error("multilinear grid supports d = 2 only");
  if (p != 2 && p != 3) throw unsupported_error("multilinear grid supports p in {2, 3}");
  if (resolution < 2 || resolution > 400)
    throw std::invalid_argument("multilinear grid resolution must lie in [2, 400]");
  if (sample.data.cols() != 2)
    throw std::invalid_argument("sample dimension does not match spec");

  const int n = static_cast<int>(sample.data.rows());
  const int res = resolution;
  Eigen::MatrixXd t(n, res);
  Eigen::MatrixXd dirs(2, res);
  for (int k = 0; k < res; ++k) {
    const double theta = kPi * k / res;
    dirs(0, k) = std::cos(theta);
    dirs(1, k) = std::sin(theta);
  }
  t = sample.data * dirs;

  const auto& lam = spec.spectrum.eigenvalues();
  double best = 0.0;
  if (p == 2) {
    const Eigen::MatrixXd g = t.transpose() * t / static_cast<double>(n);
    for (int k1 = 0; k1 < res; ++k1) {
      for (int k2 = k1; k2 < res; ++k2) {
        const double pop = lam[0] * dirs(0, k1) * dirs(0, k2) +
                           lam[1] * dirs(1, k1) * dirs(1, k2);
        best = std::max(best, std::abs(g(k1, k2) - pop));
      }
    }
    return best;
  }

  // p = 3: the population term vanishes for the symmetric families.
  for (int k1 = 0; k1 < res; ++k1) {
    for (int k2 = k1; k2 < res; ++k2) {
      Eigen::VectorXd u = t.col(k1).cwiseProduct(t.col(k2));
      Eigen::RowVectorXd prod = u.transpose() * t;  // over k3
      for (int k3 = k2; k3 < res; ++k3)
        best = std::max(best, std::abs(prod(k3) / static_cast<double>(n)));
    }
  }
  return best;
}

double multilinear_grid_gap_bound(const Sample& sample, const DistributionSpec& spec,
                                  int p, int resolution) {
  spec.validate();
  double mean_norm_p = 0.0;
  for (int i = 0; i < sample.data.rows(); ++i)
    mean_norm_p += std::pow(sample.data.row(i).norm(), p);
  mean_norm_p /= static_cast<double>(sample.data.rows());
  const double pop = p == 2 ? spec.spectrum.operator_norm() : 0.0;
  return static_cast<double>(p) * (mean_norm_p + pop) * (kPi / resolution) * 0.5;
}

}  // namespace tensorconc
