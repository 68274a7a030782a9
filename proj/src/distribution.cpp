#include "tensorconc/distribution.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "tensorconc/errors.hpp"
#include "tensorconc/mathutil.hpp"
#include "tensorconc/orlicz.hpp"
#include "tensorconc/rng.hpp"

namespace tensorconc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSubgGaussian = 1.6329931618554520654;  // sqrt(8/3)
constexpr int kEnumDimCap = 20;                          // 2^20 sign patterns

void require_unit(const DistributionSpec& spec, const Eigen::VectorXd& v) {
  if (v.size() != spec.dim())
    throw std::invalid_argument("direction dimension does not match spectrum");
  if (std::abs(v.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("direction must have unit norm");
}

// Coordinate scales a_j such that <X, v> = sum_j a_j eps_j (rademacher)
// or sum_j a_j T_j (student_t).
Eigen::VectorXd coordinate_scales(const DistributionSpec& spec, const Eigen::VectorXd& v) {
  const auto& lam = spec.spectrum.eigenvalues();
  Eigen::VectorXd a(v.size());
  const double tscale =
      spec.family == Family::student_t ? std::sqrt((spec.dof - 2.0) / spec.dof) : 1.0;
  for (int j = 0; j < v.size(); ++j)
    a[j] = v[j] * std::sqrt(lam[static_cast<std::size_t>(j)]) * tscale;
  return a;
}

// Visits <X, v> over all 2^d sign patterns in Gray-code order.
// visit(value, signs) is called once per pattern; weight is uniform 2^-d.
template <typename Visit>
void enumerate_signs(const Eigen::VectorXd& a, Visit&& visit) {
  const int d = static_cast<int>(a.size());
  if (d > kEnumDimCap)
    throw unsupported_error("exact sign enumeration capped at d <= 20");
  std::vector<double> signs(static_cast<std::size_t>(d), 1.0);
  double s = a.sum();
  visit(s, signs);
  const std::uint64_t total = 1ULL << d;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int b = std::countr_zero(i);
    signs[static_cast<std::size_t>(b)] = -signs[static_cast<std::size_t>(b)];
    s += 2.0 * signs[static_cast<std::size_t>(b)] * a[b];
    visit(s, signs);
  }
}

// E T_nu^k for integer k < nu; zero for odd k.
double student_t_moment(double nu, int k) {
  if (k % 2 == 1) return 0.0;
  if (!(k < nu)) throw moment_error("student_t moment requires exponent < dof");
  const int half = k / 2;
  return std::pow(nu, half) *
         std::exp(std::lgamma(half + 0.5) + std::lgamma(nu / 2.0 - half) -
                  std::lgamma(0.5) - std::lgamma(nu / 2.0));
}

// Sum over compositions (k_1,...,k_d) of `total` of
//   prod_j C(rem_j, k_j) a_j^{k_j} E T^{k_j + [j == special]},
// which is E (sum a_j T_j)^total, optionally with one extra T_special factor.
double t_composition_sum(const Eigen::VectorXd& a, const std::vector<double>& tmom,
                         int total, int special, int j, int rem, double acc) {
  const int d = static_cast<int>(a.size());
  if (j == d) return rem == 0 ? acc : 0.0;
  double out = 0.0;
  double choose = 1.0;  // C(rem, k), updated incrementally
  double apow = 1.0;
  for (int k = 0; k <= rem; ++k) {
    if (k > 0) {
      choose *= static_cast<double>(rem - k + 1) / static_cast<double>(k);
      apow *= a[j];
    }
    const int moment_order = k + (j == special ? 1 : 0);
    const double em = tmom[static_cast<std::size_t>(moment_order)];
    if (em != 0.0 && (apow != 0.0 || k == 0))
      out += t_composition_sum(a, tmom, total, special, j + 1, rem - k,
                               acc * choose * apow * em);
  }
  return out;
}

double student_t_contraction(const DistributionSpec& spec, const Eigen::VectorXd& v,
                             int total, int special) {
  if (spec.dim() > kEnumDimCap)
    throw unsupported_error("student_t exact moments capped at d <= 20");
  const int max_order = total + (special >= 0 ? 1 : 0);
  if (!(max_order < spec.dof))
    throw moment_error("student_t moment requires exponent < dof");
  std::vector<double> tmom(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (int k = 0; k <= max_order; k += 2)
    tmom[static_cast<std::size_t>(k)] = student_t_moment(spec.dof, k);
  return t_composition_sum(coordinate_scales(spec, v), tmom, total, special, 0, total, 1.0);
}

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order.
struct GaussLegendre {
  std::vector<double> nodes, weights;
  explicit GaussLegendre(int n) : nodes(static_cast<std::size_t>(n)),
                                  weights(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[static_cast<std::size_t>(i)] = x;
      weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& sphere_quadrature() {
  static const GaussLegendre gl(128);
  return gl;
}

// E g(sin(theta)) under the axis-coordinate law of a uniform point on the
// d-sphere, via the cos^{d-2} angular density (smooth for d >= 2; the
// d = 1 sphere is the two-point set {-1, +1}).
template <typename G>
double sphere_axis_expect(int d, G&& g) {
  if (d == 1) return 0.5 * (g(1.0) + g(-1.0));
  const auto& gl = sphere_quadrature();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double theta = 0.5 * kPi * gl.nodes[i];
    const double w = gl.weights[i] * std::pow(std::cos(theta), d - 2);
    num += w * g(std::sin(theta));
    den += w;
  }
  return num / den;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::sphere: return "sphere";
    case Family::student_t: return "student_t";
  }
  throw std::logic_error("unreachable family");
}

Family family_from_string(const std::string& name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "rademacher") return Family::rademacher;
  if (name == "sphere") return Family::sphere;
  if (name == "student_t") return Family::student_t;
  throw std::invalid_argument("unknown family: " + name);
}

void DistributionSpec::validate() const {
  if (family == Family::student_t && !(dof > 2.0))
    throw std::invalid_argument("student_t requires dof > 2");
}

std::uint64_t DistributionSpec::digest() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto eat = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  eat(static_cast<std::uint64_t>(family));
  eat(std::bit_cast<std::uint64_t>(family == Family::student_t ? dof : 0.0));
  for (double lam : spectrum.eigenvalues()) eat(std::bit_cast<std::uint64_t>(lam));
  return h;
}

nlohmann::json DistributionSpec::to_json() const {
  nlohmann::json j{{"family", to_string(family)}, {"spectrum", spectrum.to_json()}};
  if (family == Family::student_t) j["dof"] = dof;
  return j;
}

DistributionSpec DistributionSpec::from_json(const nlohmann::json& j) {
  DistributionSpec spec;
  spec.family = family_from_string(j.at("family").get<std::string>());
  spec.spectrum = Spectrum::from_json(j.at("spectrum"));
  if (j.contains("dof")) spec.dof = j.at("dof").get<double>();
  spec.validate();
  return spec;
}

Sample draw_sample(const DistributionSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  const int d = spec.dim();
  const auto& lam = spec.spectrum.eigenvalues();
  Eigen::VectorXd sd(d);
  for (int j = 0; j < d; ++j) sd[j] = std::sqrt(lam[static_cast<std::size_t>(j)]);

  DrawStream rng(seed);
  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i) {
    switch (spec.family) {
      case Family::gaussian:
        for (int j = 0; j < d; ++j) data(i, j) = sd[j] * rng.normal();
        break;
      case Family::rademacher:
        for (int j = 0; j < d; ++j) data(i, j) = sd[j] * rng.sign();
        break;
      case Family::sphere: {
        Eigen::VectorXd g(d);
        double nrm = 0.0;
        do {
          for (int j = 0; j < d; ++j) g[j] = rng.normal();
          nrm = g.norm();
        } while (nrm == 0.0);
        const double scale = std::sqrt(static_cast<double>(d)) / nrm;
        for (int j = 0; j < d; ++j) data(i, j) = sd[j] * scale * g[j];
        break;
      }
      case Family::student_t: {
        const double tscale = std::sqrt((spec.dof - 2.0) / spec.dof);
        for (int j = 0; j < d; ++j) {
          const double z = rng.normal();
          const double chi2 = 2.0 * rng.gamma(spec.dof / 2.0);
          data(i, j) = sd[j] * tscale * z / std::sqrt(chi2 / spec.dof);
        }
        break;
      }
    }
  }
  Sample s;
  s.data = std::move(data);
  s.n = n;
  s.spec_digest = spec.digest();
  s.seed = seed;
  s.generator_id = kGeneratorId;
  return s;
}

double directional_variance(const DistributionSpec& spec, const Eigen::VectorXd& v) {
  require_unit(spec, v);
  const auto& lam = spec.spectrum.eigenvalues();
  double s = 0.0;
  for (int j = 0; j < v.size(); ++j) s += lam[static_cast<std::size_t>(j)] * v[j] * v[j];
  return s;
}

double odd_double_factorial(int p) {
  double r = 1.0;
  for (int k = p - 1; k > 1; k -= 2) r *= k;
  return r;
}

double gaussian_abs_moment(double q) {
  if (!(q >= 0.0)) throw std::invalid_argument("moment order must be >= 0");
  return std::exp(0.5 * q * std::log(2.0) + std::lgamma((q + 1.0) / 2.0) -
                  0.5 * std::log(kPi));
}

double sphere_axis_abs_moment(int d, double q) {
  if (d < 1 || !(q >= 0.0)) throw std::invalid_argument("invalid axis moment query");
  return std::exp(std::lgamma((q + 1.0) / 2.0) + std::lgamma(d / 2.0) -
                  std::lgamma((q + static_cast<double>(d)) / 2.0) - std::lgamma(0.5));
}

namespace {

double moment_impl(const DistributionSpec& spec, const Eigen::VectorXd& v, int p,
                   bool absolute) {
  spec.validate();
  require_unit(spec, v);
  if (p < 1) throw std::invalid_argument("moment order must be >= 1");
  if (!absolute && p % 2 == 1) return 0.0;  // symmetric laws

  switch (spec.family) {
    case Family::gaussian: {
      const double sigma = std::sqrt(directional_variance(spec, v));
      if (p % 2 == 0) return odd_double_factorial(p) * pow_int(sigma, p);
      return pow_int(sigma, p) * gaussian_abs_moment(p);
    }
    case Family::rademacher: {
      double acc = 0.0;
      enumerate_signs(coordinate_scales(spec, v), [&](double s, const auto&) {
        acc += absolute ? std::pow(std::abs(s), p) : pow_int(s, p);
      });
      return acc / static_cast<double>(1ULL << spec.dim());
    }
    case Family::sphere: {
      // <X, v> = sqrt(d) ||w|| t with w = diag(sqrt(lam)) v and t the axis
      // coordinate; even p makes signed and absolute coincide.
      const double wnorm = std::sqrt(directional_variance(spec, v));
      const int d = spec.dim();
      return std::pow(std::sqrt(static_cast<double>(d)) * wnorm, p) *
             sphere_axis_abs_moment(d, p);
    }
    case Family::student_t: {
      if (p % 2 == 1)
        throw unsupported_error("student_t absolute moments with odd order are unsupported");
      return student_t_contraction(spec, v, p, -1);
    }
  }
  throw std::logic_error("unreachable family");
}

Eigen::VectorXd gradient_impl(const DistributionSpec& spec, const Eigen::VectorXd& v,
                              int p, bool absolute) {
  spec.validate();
  require_unit(spec, v);
  if (p < 2) throw std::invalid_argument("moment gradient requires order >= 2");
  const int d = spec.dim();
  const auto& lam = spec.spectrum.eigenvalues();
  Eigen::VectorXd sigma_v(d);
  for (int j = 0; j < d; ++j) sigma_v[j] = lam[static_cast<std::size_t>(j)] * v[j];

  if (!absolute && p % 2 == 1) return Eigen::VectorXd::Zero(d);

  switch (spec.family) {
    case Family::gaussian: {
      const double s2 = directional_variance(spec, v);
      const double c = p % 2 == 0
                           ? odd_double_factorial(p) * std::pow(s2, (p - 2) / 2.0)
                           : gaussian_abs_moment(p) * std::pow(s2, p / 2.0 - 1.0);
      return c * sigma_v;
    }
    case Family::rademacher: {
      const Eigen::VectorXd a = coordinate_scales(spec, v);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
      enumerate_signs(a, [&](double s, const std::vector<double>& signs) {
        const double w = absolute
                             ? std::pow(std::abs(s), p - 1) * (s < 0 ? -1.0 : s > 0 ? 1.0 : 0.0)
                             : pow_int(s, p - 1);
        if (w == 0.0) return;
        for (int j = 0; j < d; ++j)
          acc[j] += w * signs[static_cast<std::size_t>(j)] *
                    std::sqrt(lam[static_cast<std::size_t>(j)]);
      });
      return acc / static_cast<double>(1ULL << d);
    }
    case Family::sphere: {
      // Rotation symmetry about w collapses E Y^{p-1} X onto Sigma v.
      const double wnorm2 = directional_variance(spec, v);
      const double c = std::pow(static_cast<double>(d), p / 2.0) *
                       std::pow(wnorm2, p / 2.0 - 1.0) * sphere_axis_abs_moment(d, p);
      return c * sigma_v;
    }
    case Family::student_t: {
      if (p % 2 == 1)
        throw unsupported_error("student_t absolute gradients with odd order are unsupported");
      Eigen::VectorXd out(d);
      const double tscale = std::sqrt((spec.dof - 2.0) / spec.dof);
      for (int j = 0; j < d; ++j) {
        const double cj = std::sqrt(lam[static_cast<std::size_t>(j)]) * tscale;
        out[j] = cj * student_t_contraction(spec, v, p - 1, j);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable family");
}

}  // namespace

double population_moment(const DistributionSpec& spec, const Eigen::VectorXd& v, int p) {
  return moment_impl(spec, v, p, false);
}

double population_abs_moment(const DistributionSpec& spec, const Eigen::VectorXd& v, int p) {
  return moment_impl(spec, v, p, true);
}

Eigen::VectorXd population_moment_gradient(const DistributionSpec& spec,
                                           const Eigen::VectorXd& v, int p) {
  return gradient_impl(spec, v, p, false);
}

Eigen::VectorXd population_abs_moment_gradient(const DistributionSpec& spec,
                                               const Eigen::VectorXd& v, int p) {
  return gradient_impl(spec, v, p, true);
}

double psi2_directional(const DistributionSpec& spec, const Eigen::VectorXd& v) {
  spec.validate();
  require_unit(spec, v);
  if (!spec.sub_gaussian()) throw moment_error("psi2 norm requested for a non-sub-gaussian family");

  switch (spec.family) {
    case Family::gaussian:
      return kSubgGaussian * std::sqrt(directional_variance(spec, v));
    case Family::rademacher: {
      if (spec.dim() > kEnumDimCap)
        throw unsupported_error("exact sign enumeration capped at d <= 20");
      std::vector<double> values;
      values.reserve(1ULL << spec.dim());
      enumerate_signs(coordinate_scales(spec, v),
                      [&](double s, const auto&) { values.push_back(s * s); });
      const double inv = 1.0 / static_cast<double>(values.size());
      return orlicz_norm(
          [&](double c) {
            double acc = 0.0;
            for (double s2 : values) acc += std::exp(s2 / (c * c));
            return acc * inv;
          },
          2.0);
    }
    case Family::sphere: {
      const double scale2 = static_cast<double>(spec.dim()) * directional_variance(spec, v);
      return orlicz_norm(
          [&](double c) {
            const double kappa = scale2 / (c * c);
            return sphere_axis_expect(spec.dim(),
                                      [&](double t) { return std::exp(kappa * t * t); });
          },
          2.0);
    }
    case Family::student_t:
      break;
  }
  throw std::logic_error("unreachable family");
}

}  // namespace tensorconc
