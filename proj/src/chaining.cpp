#include "tensorconc/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tensorconc/errors.hpp"
#include "tensorconc/rng.hpp"

namespace tensorconc {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// Greedy center order plus covering radii of every prefix.
struct GreedyNets {
  std::vector<int> order;        // center insertion order
  std::vector<double> radii;     // radii[k] = covering radius of first k+1 centers
};

int exhaustive_one_center(const FiniteMetricSpace& space) {
  int best = 0;
  double best_radius = std::numeric_limits<double>::infinity();
  for (int c = 0; c < space.n_points(); ++c) {
    double radius = 0.0;
    for (int i = 0; i < space.n_points(); ++i)
      radius = std::max(radius, space.distance(c, i));
    if (radius < best_radius) {
      best_radius = radius;
      best = c;
    }
  }
  return best;
}

GreedyNets greedy_nets(const FiniteMetricSpace& space, int first_center) {
  const int n = space.n_points();
  GreedyNets nets;
  nets.order.reserve(static_cast<std::size_t>(n));
  nets.radii.reserve(static_cast<std::size_t>(n));
  std::vector<double> dist_to_set(static_cast<std::size_t>(n));
  nets.order.push_back(first_center);
  for (int i = 0; i < n; ++i)
    dist_to_set[static_cast<std::size_t>(i)] = space.distance(first_center, i);
  for (;;) {
    int far = 0;
    double far_dist = -1.0;
    for (int i = 0; i < n; ++i) {
      if (dist_to_set[static_cast<std::size_t>(i)] > far_dist) {
        far_dist = dist_to_set[static_cast<std::size_t>(i)];
        far = i;
      }
    }
    nets.radii.push_back(far_dist);
    if (static_cast<int>(nets.order.size()) == n) break;
    nets.order.push_back(far);
    for (int i = 0; i < n; ++i)
      dist_to_set[static_cast<std::size_t>(i)] =
          std::min(dist_to_set[static_cast<std::size_t>(i)], space.distance(far, i));
  }
  return nets;
}

AdmissibleSequence sequence_from_nets(const GreedyNets& nets, int n) {
  AdmissibleSequence seq;
  for (int s = 0;; ++s) {
    const std::uint64_t cap = AdmissibleSequence::level_cap(s);
    const int take = static_cast<int>(
        std::min<std::uint64_t>(cap, static_cast<std::uint64_t>(n)));
    seq.levels.emplace_back(nets.order.begin(), nets.order.begin() + take);
    if (take == n) break;
  }
  return seq;
}

double chaining_sum(const FiniteMetricSpace& space, const AdmissibleSequence& seq) {
  double worst = 0.0;
  for (int i = 0; i < space.n_points(); ++i) {
    double sum = 0.0;
    for (std::size_t s = 0; s < seq.levels.size(); ++s)
      sum += std::pow(2.0, static_cast<double>(s) / 2.0) *
             space.distance_to_set(i, seq.levels[s]);
    worst = std::max(worst, sum);
  }
  return worst;
}

double student_t_abs_moment(double dof, double q) {
  if (!(q < dof)) throw moment_error("student_t moment requires exponent < dof");
  return std::exp(0.5 * q * std::log(dof) + std::lgamma((q + 1.0) / 2.0) +
                  std::lgamma((dof - q) / 2.0) - std::lgamma(0.5) -
                  std::lgamma(dof / 2.0));
}

}  // namespace

FiniteMetricSpace::FiniteMetricSpace(Eigen::MatrixXd distances,
                                     std::vector<Eigen::VectorXd> labels)
    : dist_(std::move(distances)), labels_(std::move(labels)) {
  const int n = static_cast<int>(dist_.rows());
  if (n < 1 || dist_.cols() != n)
    throw std::invalid_argument("distance matrix must be square and nonempty");
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n)
    throw std::invalid_argument("label count must match point count");
  for (int i = 0; i < n; ++i) {
    if (dist_(i, i) != 0.0)
      throw std::invalid_argument("distance matrix diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (!(dist_(i, j) >= 0.0))
        throw std::invalid_argument("distances must be nonnegative");
      if (dist_(i, j) != dist_(j, i))
        throw std::invalid_argument("distance matrix must be symmetric");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (dist_(i, j) > dist_(i, k) + dist_(k, j) + 1e-9)
          throw std::invalid_argument("triangle inequality violated beyond tolerance");
}

double FiniteMetricSpace::distance_to_set(int i, const std::vector<int>& subset) const {
  if (subset.empty()) throw std::invalid_argument("distance to empty set");
  double best = std::numeric_limits<double>::infinity();
  for (int j : subset) best = std::min(best, dist_(i, j));
  return best;
}

FiniteMetricSpace FiniteMetricSpace::restrict(const std::vector<int>& keep) const {
  const int m = static_cast<int>(keep.size());
  Eigen::MatrixXd sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      sub(a, b) = dist_(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
  std::vector<Eigen::VectorXd> sub_labels;
  if (!labels_.empty()) {
    sub_labels.reserve(keep.size());
    for (int k : keep) sub_labels.push_back(labels_[static_cast<std::size_t>(k)]);
  }
  return FiniteMetricSpace(std::move(sub), std::move(sub_labels));
}

nlohmann::json FiniteMetricSpace::to_json() const {
  const int n = n_points();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) flat.push_back(dist_(i, j));
  return nlohmann::json{{"n_points", n}, {"distances", flat}};
}

FiniteMetricSpace FiniteMetricSpace::from_json(const nlohmann::json& j) {
  const int n = j.at("n_points").get<int>();
  const auto flat = j.at("distances").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != n * n)
    throw std::invalid_argument("distance payload size mismatch");
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      d(i, k) = flat[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(k)];
  return FiniteMetricSpace(std::move(d));
}

std::uint64_t AdmissibleSequence::level_cap(int s) {
  if (s == 0) return 1;
  if (s >= 6) return std::numeric_limits<std::uint64_t>::max();  // 2^64 and beyond
  return 1ULL << (1ULL << static_cast<unsigned>(s));
}

void AdmissibleSequence::validate(int n_points) const {
  if (levels.empty()) throw std::invalid_argument("sequence has no levels");
  if (levels.front().size() != 1)
    throw std::invalid_argument("level 0 must hold exactly one point");
  for (std::size_t s = 0; s < levels.size(); ++s) {
    const auto& level = levels[s];
    if (level.empty()) throw std::invalid_argument("empty level");
    if (static_cast<std::uint64_t>(level.size()) > level_cap(static_cast<int>(s)))
      throw std::invalid_argument("level cardinality exceeds 2^(2^s)");
    for (int idx : level)
      if (idx < 0 || idx >= n_points)
        throw std::invalid_argument("level references an unknown point");
    if (s > 0) {
      for (int idx : levels[s - 1]) {
        if (std::find(level.begin(), level.end(), idx) == level.end())
          throw std::invalid_argument("levels are not nested");
      }
    }
  }
  if (static_cast<int>(levels.back().size()) != n_points)
    throw std::invalid_argument("final level must exhaust the point set");
}

nlohmann::json AdmissibleSequence::to_json() const {
  return nlohmann::json{{"levels", levels}};
}

AdmissibleSequence build_admissible_sequence(const FiniteMetricSpace& space) {
  const GreedyNets nets = greedy_nets(space, exhaustive_one_center(space));
  return sequence_from_nets(nets, space.n_points());
}

GammaEstimate gamma2(const FiniteMetricSpace& space, GammaMethod method) {
  const int n = space.n_points();
  GammaEstimate est;
  est.method = method;

  if (method == GammaMethod::greedy_ffp || method == GammaMethod::net_based) {
    // net_based skips the 1-center scan and seeds the nets at point 0.
    const int first =
        method == GammaMethod::greedy_ffp ? exhaustive_one_center(space) : 0;
    est.sequence = sequence_from_nets(greedy_nets(space, first), n);
    est.value = chaining_sum(space, est.sequence);
    return est;
  }

  if (n > 6) throw unsupported_error("exhaustive gamma2 capped at 6 points");

  // For n <= 6 the level-2 cap (16) already admits every point, so a
  // sequence is determined by the level-0 singleton and a level-1 superset
  // of size at most 4; making level 2 the whole space is always optimal.
  double best = std::numeric_limits<double>::infinity();
  AdmissibleSequence best_seq;
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;

  for (int f0 = 0; f0 < n; ++f0) {
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
      if (!(mask & (1ULL << f0))) continue;
      std::vector<int> f1;
      for (int i = 0; i < n; ++i)
        if (mask & (1ULL << i)) f1.push_back(i);
      if (f1.size() > std::min<std::size_t>(4, static_cast<std::size_t>(n))) continue;

      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        const double term = space.distance(i, f0) +
                            kSqrt2 * space.distance_to_set(i, f1);
        worst = std::max(worst, term);
      }
      if (worst < best) {
        best = worst;
        best_seq.levels = {{f0}, f1};
        if (static_cast<int>(f1.size()) != n) best_seq.levels.push_back(all);
      }
    }
  }
  est.value = best;
  est.sequence = std::move(best_seq);
  return est;
}

double dudley_sum(const FiniteMetricSpace& space) {
  const GreedyNets nets = greedy_nets(space, exhaustive_one_center(space));
  const int n = space.n_points();
  double sum = 0.0;
  for (int s = 0;; ++s) {
    const int take = static_cast<int>(std::min<std::uint64_t>(
        AdmissibleSequence::level_cap(s), static_cast<std::uint64_t>(n)));
    const double radius = nets.radii[static_cast<std::size_t>(take - 1)];
    if (radius <= 0.0) break;
    sum += std::pow(2.0, static_cast<double>(s) / 2.0) * radius;
    if (take == n) break;
  }
  return sum;
}

double lp_norm(const DistributionSpec& spec, const Eigen::VectorXd& v, double q) {
  spec.validate();
  if (!(q >= 1.0)) throw std::invalid_argument("lp_norm requires q >= 1");
  if (v.size() != spec.dim())
    throw std::invalid_argument("vector dimension does not match spec");
  const double norm = v.norm();
  if (norm == 0.0) return 0.0;
  const Eigen::VectorXd unit = v / norm;

  switch (spec.family) {
    case Family::gaussian: {
      const double sigma = norm * std::sqrt(directional_variance(spec, unit));
      return sigma * std::pow(gaussian_abs_moment(q), 1.0 / q);
    }
    case Family::sphere: {
      const double scale =
          std::sqrt(static_cast<double>(spec.dim()) * directional_variance(spec, unit)) *
          norm;
      return scale * std::pow(sphere_axis_abs_moment(spec.dim(), q), 1.0 / q);
    }
    case Family::rademacher: {
      // Finite support: direct expectation over sign patterns, any real q.
      const double uq = [&] {
        if (spec.dim() > 20)
          throw unsupported_error("exact sign enumeration capped at d <= 20");
        const long long patterns = 1LL << spec.dim();
        const auto& lam = spec.spectrum.eigenvalues();
        double acc = 0.0;
        for (long long mask = 0; mask < patterns; ++mask) {
          double s = 0.0;
          for (int j = 0; j < spec.dim(); ++j) {
            const double a = v[j] * std::sqrt(lam[static_cast<std::size_t>(j)]);
            s += (mask >> j) & 1 ? a : -a;
          }
          acc += std::pow(std::abs(s), q);
        }
        return acc / static_cast<double>(patterns);
      }();
      return std::pow(uq, 1.0 / q);
    }
    case Family::student_t: {
      if (spec.dim() != 1)
        throw unsupported_error("student_t L_q norms supported for d = 1 only");
      const double a = std::abs(v[0]) *
                       std::sqrt(spec.spectrum.operator_norm() * (spec.dof - 2.0) / spec.dof);
      return a * std::pow(student_t_abs_moment(spec.dof, q), 1.0 / q);
    }
  }
  throw std::logic_error("unreachable family");
}

double graded_norm(const DistributionSpec& spec, const Eigen::VectorXd& v, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("graded norm requires q >= 1");
  auto h = [&](double p) { return lp_norm(spec, v, p) / std::sqrt(p); };
  if (q == 1.0) return h(1.0);

  double best = -1.0, best_p = 1.0;
  for (double p = 1.0;; p += 0.25) {
    const double val = h(std::min(p, q));
    if (val > best) {
      best = val;
      best_p = std::min(p, q);
    }
    if (p >= q) break;
  }
  // Golden-section polish of the winning grid cell.
  const double lo = std::max(1.0, best_p - 0.25);
  const double hi = std::min(q, best_p + 0.25);
  const double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = h(x1), f2 = h(x2);
  while (b - a > 1e-8) {
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
  return std::max(best, std::max(f1, f2));
}

FiniteMetricSpace psi2_metric(const std::vector<Eigen::VectorXd>& vectors,
                              const DistributionSpec& spec) {
  spec.validate();
  if (vectors.empty()) throw std::invalid_argument("psi2 metric needs at least one vector");
  const int n = static_cast<int>(vectors.size());
  for (const auto& v : vectors)
    if (v.size() != spec.dim())
      throw std::invalid_argument("vector dimension does not match spec");

  const auto pair_norm = [&](const Eigen::VectorXd& diff) -> double {
    const double nrm = diff.norm();
    if (nrm == 0.0) return 0.0;
    switch (spec.family) {
      case Family::gaussian: {
        const double sigma = nrm * std::sqrt(directional_variance(spec, diff / nrm));
        return 1.6329931618554520654 * sigma;
      }
      case Family::rademacher:
        return nrm * psi2_directional(spec, diff / nrm);
      default:
        throw unsupported_error("psi2 metric supports gaussian and rademacher bases");
    }
  };

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = pair_norm(vectors[static_cast<std::size_t>(i)] -
                          vectors[static_cast<std::size_t>(j)]);
      d(j, i) = d(i, j);
    }
  }
  return FiniteMetricSpace(std::move(d), vectors);
}

FiniteFunctionClass FiniteFunctionClass::build(std::vector<Eigen::VectorXd> vectors,
                                               DistributionSpec spec) {
  FiniteMetricSpace space = psi2_metric(vectors, spec);
  double dpsi = 0.0;
  for (const auto& v : vectors) {
    const double nrm = v.norm();
    if (nrm > 0.0) dpsi = std::max(dpsi, nrm * psi2_directional(spec, v / nrm));
  }
  bool symmetric = true;
  for (const auto& v : vectors) {
    bool found = false;
    for (const auto& w : vectors)
      if ((v + w).norm() <= 1e-12 * std::max(1.0, v.norm())) {
        found = true;
        break;
      }
    if (!found) {
      symmetric = false;
      break;
    }
  }
  return FiniteFunctionClass{std::move(vectors), std::move(spec), std::move(space), dpsi,
                             symmetric};
}

WidthEstimate gaussian_width(const FiniteFunctionClass& cls, int trials,
                             std::uint64_t seed) {
  if (cls.base_spec.family != Family::gaussian)
    throw std::invalid_argument("gaussian width requires a gaussian base spec");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int d = cls.base_spec.dim();
  const auto& lam = cls.base_spec.spectrum.eigenvalues();
  Eigen::VectorXd sd(d);
  for (int j = 0; j < d; ++j) sd[j] = std::sqrt(lam[static_cast<std::size_t>(j)]);

  DrawStream rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd g(d);
  for (int t = 0; t < trials; ++t) {
    for (int j = 0; j < d; ++j) g[j] = sd[j] * rng.normal();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : cls.index_vectors) best = std::max(best, g.dot(v));
    sum += best;
    sum_sq += best * best;
  }
  const double mean = sum / trials;
  const double var = std::max(0.0, sum_sq / trials - mean * mean);
  WidthEstimate est;
  est.value = mean;
  est.std_error = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
  return est;
}

LambdaEstimate lambda_functional(const FiniteFunctionClass& cls, int s0, double u) {
  if (s0 < 0 || !(u >= 1.0))
    throw std::invalid_argument("lambda functional requires s0 >= 0 and u >= 1");
  const AdmissibleSequence seq = build_admissible_sequence(cls.psi2_space);
  const int last = seq.final_level();
  const int n = static_cast<int>(cls.index_vectors.size());

  auto graded_diff = [&](int i, int j, double q) {
    return graded_norm(cls.base_spec,
                       cls.index_vectors[static_cast<std::size_t>(i)] -
                           cls.index_vectors[static_cast<std::size_t>(j)],
                       q);
  };
  // Nearest element of level s in the (u^2 2^s) graded norm; earliest
  // level entry wins ties so the result is deterministic.
  auto project = [&](int i, int s, double q) {
    const auto& level = seq.levels[static_cast<std::size_t>(std::min(s, last))];
    int best = level.front();
    double best_norm = std::numeric_limits<double>::infinity();
    for (int j : level) {
      const double nm = graded_diff(i, j, q);
      if (nm < best_norm - 1e-15) {
        best_norm = nm;
        best = j;
      }
    }
    return best;
  };

  LambdaEstimate est;
  double lam_sup = 0.0;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int s = s0; s <= std::max(last, s0); ++s) {
      if (s > last) break;  // level equals the whole class from here on
      const double q = u * u * std::pow(2.0, s);
      const int pi = project(i, s, q);
      if (pi == i) continue;
      sum += std::pow(2.0, s / 2.0) * graded_diff(i, pi, q);
    }
    lam_sup = std::max(lam_sup, sum);
  }
  est.lambda = lam_sup;

  const double q0 = u * u * std::pow(2.0, s0);
  double head = 0.0;
  for (int i = 0; i < n; ++i) {
    const int pi = project(i, s0, q0);
    head = std::max(head, graded_norm(cls.base_spec,
                                      cls.index_vectors[static_cast<std::size_t>(pi)], q0));
  }
  est.lambda_tilde = est.lambda + std::pow(2.0, s0 / 2.0) * head;
  return est;
}

double phi(const YoungPhi& y, double x) {
  if (y.n < 1 || !(y.m >= 1.0)) throw std::invalid_argument("invalid Young function parameters");
  if (!(x >= 0.0)) throw std::invalid_argument("phi takes nonnegative arguments");
  const double sub_exp = std::pow(std::sqrt(static_cast<double>(y.n)) * x, 2.0 / y.m);
  const double sub_gauss = x * x;
  return std::expm1(std::log(2.0) * std::min(sub_exp, sub_gauss));
}

double phi_inverse(const YoungPhi& y, double z) {
  if (y.n < 1 || !(y.m >= 1.0)) throw std::invalid_argument("invalid Young function parameters");
  if (!(z >= 0.0)) throw std::invalid_argument("phi_inverse takes nonnegative arguments");
  const double l = std::log1p(z) / std::log(2.0);  // log2(1 + z)
  return std::max(std::sqrt(l), std::sqrt(std::pow(l, y.m) / static_cast<double>(y.n)));
}

}  // namespace tensorconc
