#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>
#include "tensorconc/distribution.hpp"
#include "tensorconc/errors.hpp"
#include "tensorconc/mathutil.hpp"
#include "tensorconc/rng.hpp"

using namespace tensorconc;

namespace {

DistributionSpec make_spec(Family family, std::vector<double> lam, double dof = 0.0) {
  DistributionSpec spec;
  spec.family = family;
  spec.spectrum = Spectrum::custom(std::move(lam));
  spec.dof = dof;
  return spec;
}

Eigen::VectorXd unit(std::vector<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = values[static_cast<std::size_t>(i)];
  return v / v.norm();
}

// Monte Carlo mean of <X,v>^p with its standard error.
std::pair<double, double> mc_moment(const DistributionSpec& spec, const Eigen::VectorXd& v,
                                    int p, int n, std::uint64_t seed) {
  const Sample s = draw_sample(spec, n, seed);
  const Eigen::VectorXd t = s.data * v;
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = pow_int(t[i], p);
    const double delta = x - mean;
    mean += delta / (i + 1);
    m2 += delta * (x - mean);
  }
  return {mean, std::sqrt(m2 / (n - 1) / n)};
}

}  // namespace

TEST_CASE("sampling is deterministic per (spec, n, seed)") {
  const DistributionSpec spec = make_spec(Family::gaussian, {1, 1});
  const Sample a = draw_sample(spec, 3, 42);
  const Sample b = draw_sample(spec, 3, 42);
  CHECK(a.data == b.data);
  CHECK(a.generator_id == kGeneratorId);
  CHECK(a.spec_digest == spec.digest());
  const Sample c = draw_sample(spec, 3, 43);
  CHECK(a.data != c.data);
}

TEST_CASE("samples extend as prefixes at matched seeds") {
  for (Family family : {Family::gaussian, Family::rademacher, Family::sphere,
                        Family::student_t}) {
    const DistributionSpec spec =
        make_spec(family, {2.0, 1.0}, family == Family::student_t ? 5.0 : 0.0);
    const Sample small = draw_sample(spec, 4, 7);
    const Sample big = draw_sample(spec, 9, 7);
    CHECK(big.data.topRows(4) == small.data);
  }
}

TEST_CASE("scaled sign draws take exactly two values") {
  const Sample s = draw_sample(make_spec(Family::rademacher, {4.0}), 1000, 11);
  for (int i = 0; i < s.n; ++i) CHECK(std::abs(s.data(i, 0)) == doctest::Approx(2.0));
}

TEST_CASE("sampler second moments are calibrated") {
  const Sample s = draw_sample(make_spec(Family::gaussian, {1.0}), 100000, 5);
  const double mean_sq = s.data.col(0).squaredNorm() / s.n;
  CHECK(mean_sq == doctest::Approx(1.0).epsilon(0.05));

  // Sphere rows always have norm sqrt(d) under the identity spectrum.
  const Sample sph = draw_sample(make_spec(Family::sphere, {1, 1, 1}), 50, 6);
  for (int i = 0; i < sph.n; ++i)
    CHECK(sph.data.row(i).norm() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("directional variance") {
  const DistributionSpec spec = make_spec(Family::gaussian, {4.0, 1.0});
  CHECK(directional_variance(spec, unit({1, 0})) == doctest::Approx(4.0));
  CHECK(directional_variance(spec, unit({1, 1})) == doctest::Approx(2.5));
  Eigen::VectorXd bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(directional_variance(spec, bad), std::invalid_argument);
}

TEST_CASE("directional variance matches simulation for every family") {
  for (Family family : {Family::gaussian, Family::rademacher, Family::sphere,
                        Family::student_t}) {
    const DistributionSpec spec =
        make_spec(family, {3.0, 1.0, 0.5}, family == Family::student_t ? 6.0 : 0.0);
    const Eigen::VectorXd v = unit({1, -2, 0.5});
    const Sample s = draw_sample(spec, 1000000, 17);
    const Eigen::VectorXd t = s.data * v;
    const double mc = t.squaredNorm() / s.n;
    CHECK(mc == doctest::Approx(directional_variance(spec, v)).epsilon(0.02));
  }
}

TEST_CASE("population moments, closed forms") {
  const DistributionSpec g4 = make_spec(Family::gaussian, {4.0});
  CHECK(population_moment(g4, unit({1}), 2) == doctest::Approx(4.0));
  const DistributionSpec g1 = make_spec(Family::gaussian, {1.0});
  CHECK(population_moment(g1, unit({1}), 4) == doctest::Approx(3.0));

  for (Family family : {Family::gaussian, Family::rademacher, Family::sphere,
                        Family::student_t}) {
    const DistributionSpec spec =
        make_spec(family, {2.0, 1.0}, family == Family::student_t ? 6.0 : 0.0);
    CHECK(population_moment(spec, unit({3, 1}), 3) == 0.0);
    CHECK(population_moment(spec, unit({3, 1}), 5) == 0.0);
  }
}

TEST_CASE("enumerated moments agree with brute force") {
  // rademacher: independent scaled signs, all 8 patterns by hand.
  const DistributionSpec spec = make_spec(Family::rademacher, {2.0, 1.0, 0.5});
  const Eigen::VectorXd v = unit({1.0, -0.7, 0.3});
  std::vector<double> a(3);
  for (int j = 0; j < 3; ++j)
    a[static_cast<std::size_t>(j)] =
        v[j] * std::sqrt(spec.spectrum.eigenvalues()[static_cast<std::size_t>(j)]);
  for (int p : {2, 4, 6}) {
    double brute = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j)
        s += (mask >> j) & 1 ? a[static_cast<std::size_t>(j)] : -a[static_cast<std::size_t>(j)];
      brute += pow_int(s, p);
    }
    brute /= 8.0;
    CHECK(population_moment(spec, v, p) == doctest::Approx(brute).epsilon(1e-13));
  }
}

TEST_CASE("student_t moments from the coordinate expansion") {
  // One coordinate with unit variance: kurtosis of the scaled t equals
  // 3 (nu - 2) / (nu - 4).
  const DistributionSpec spec = make_spec(Family::student_t, {1.0}, 5.0);
  CHECK(population_moment(spec, unit({1}), 2) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(population_moment(spec, unit({1}), 4) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK_THROWS_AS(population_moment(spec, unit({1}), 6), moment_error);

  // Two coordinates: E (a T1 + b T2)^4 expands into marginal moments.
  const DistributionSpec spec2 = make_spec(Family::student_t, {1.0, 1.0}, 7.0);
  const Eigen::VectorXd v = unit({2.0, 1.0});
  const double a2 = v[0] * v[0], b2 = v[1] * v[1];
  const double m4_1d = 3.0 * (7.0 - 2.0) / (7.0 - 4.0);  // per-coordinate fourth moment
  const double expected = m4_1d * (a2 * a2 + b2 * b2) + 6.0 * a2 * b2;
  CHECK(population_moment(spec2, v, 4) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("moment queries outside the exact regime are rejected") {
  std::vector<double> big(static_cast<std::size_t>(21), 1.0);
  CHECK_THROWS_AS(population_moment(make_spec(Family::rademacher, big),
                                    Eigen::VectorXd::Unit(21, 0), 4),
                  unsupported_error);
  CHECK_THROWS_AS(population_abs_moment(make_spec(Family::student_t, {1.0, 1.0}, 9.0),
                                        unit({1, 1}), 3),
                  unsupported_error);
}

TEST_CASE("monte carlo agreement for each family") {
  struct Setup {
    Family family;
    double dof;
    std::vector<int> orders;
  };
  const std::vector<Setup> setups = {{Family::gaussian, 0.0, {2, 3, 4}},
                                     {Family::rademacher, 0.0, {2, 4}},
                                     {Family::sphere, 0.0, {2, 4}},
                                     {Family::student_t, 5.0, {2}}};
  for (const auto& setup : setups) {
    const DistributionSpec spec = make_spec(setup.family, {2.0, 1.0, 0.5}, setup.dof);
    const Eigen::VectorXd v = unit({1.0, 0.5, -0.25});
    for (int p : setup.orders) {
      const auto [mean, se] = mc_moment(spec, v, p, 1000000, 23 + p);
      const double exact = population_moment(spec, v, p);
      CHECK(std::abs(mean - exact) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("moment gradients") {
  const DistributionSpec spec = make_spec(Family::gaussian, {2.0, 1.0});
  const Eigen::VectorXd v = unit({1, 0});

  SUBCASE("order 2 gives the covariance action") {
    const Eigen::VectorXd g = population_moment_gradient(spec, v, 2);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(0.0));
  }
  SUBCASE("odd orders vanish") {
    CHECK(population_moment_gradient(spec, v, 3).norm() == doctest::Approx(0.0));
  }
  SUBCASE("matches finite differences of the homogeneous extension") {
    auto homogeneous = [&](const Eigen::VectorXd& w, int p) {
      const double nrm = w.norm();
      return std::pow(nrm, p) * population_moment(spec, w / nrm, p);
    };
    const Eigen::VectorXd g = population_moment_gradient(spec, v, 4);
    const double h = 1e-5;
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd hi = v, lo = v;
      hi[j] += h;
      lo[j] -= h;
      const double fd = (homogeneous(hi, 4) - homogeneous(lo, 4)) / (2 * h);
      CHECK(4.0 * g[j] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("contraction identity holds for every family") {
  // <M_p(v), v> recovers m_p(v): exact for the homogeneous extension.
  struct Setup {
    Family family;
    double dof;
  };
  for (const auto& [family, dof] : {Setup{Family::gaussian, 0.0},
                                    Setup{Family::rademacher, 0.0},
                                    Setup{Family::sphere, 0.0},
                                    Setup{Family::student_t, 8.0}}) {
    const DistributionSpec spec = make_spec(family, {2.0, 1.0, 0.5}, dof);
    DrawStream rng(31);
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::VectorXd v(3);
      for (int j = 0; j < 3; ++j) v[j] = rng.normal();
      v.normalize();
      for (int p : {2, 4, 6}) {
        if (family == Family::student_t && p >= 8) continue;
        if (family == Family::student_t && p >= dof) continue;
        const double m = population_moment(spec, v, p);
        const double contracted = population_moment_gradient(spec, v, p).dot(v);
        CHECK(contracted == doctest::Approx(m).epsilon(1e-11));
      }
      // Absolute-value variant, odd order, where supported.
      if (family != Family::student_t) {
        const double m3 = population_abs_moment(spec, v, 3);
        CHECK(population_abs_moment_gradient(spec, v, 3).dot(v) ==
              doctest::Approx(m3).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("moment scale equivariance") {
  const Eigen::VectorXd v = unit({1.0, -1.0});
  const double t = 1.7;
  for (Family family : {Family::gaussian, Family::rademacher, Family::sphere}) {
    const DistributionSpec base = make_spec(family, {2.0, 1.0});
    const DistributionSpec scaled = make_spec(family, {2.0 * t * t, t * t});
    for (int p : {2, 3, 4}) {
      CHECK(population_abs_moment(scaled, v, p) ==
            doctest::Approx(std::pow(t, p) * population_abs_moment(base, v, p))
                .epsilon(1e-12));
    }
    CHECK(psi2_directional(scaled, v) ==
          doctest::Approx(t * psi2_directional(base, v)).epsilon(1e-9));
  }
}

TEST_CASE("directional psi2 norms") {
  const DistributionSpec g1 = make_spec(Family::gaussian, {1.0});
  CHECK(psi2_directional(g1, unit({1})) == doctest::Approx(std::sqrt(8.0 / 3.0)));
  const DistributionSpec g4 = make_spec(Family::gaussian, {4.0});
  CHECK(psi2_directional(g4, unit({1})) == doctest::Approx(2.0 * std::sqrt(8.0 / 3.0)));

  // A single scaled sign is deterministic in magnitude.
  const DistributionSpec r1 = make_spec(Family::rademacher, {1.0});
  CHECK(psi2_directional(r1, unit({1})) ==
        doctest::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-9));

  // One-dimensional sphere degenerates to the same two-point law.
  const DistributionSpec s1 = make_spec(Family::sphere, {1.0});
  CHECK(psi2_directional(s1, unit({1})) ==
        doctest::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-9));

  CHECK_THROWS_AS(psi2_directional(make_spec(Family::student_t, {1.0}, 5.0), unit({1})),
                  moment_error);
}

TEST_CASE("spec digest distinguishes specs and serializes") {
  const DistributionSpec a = make_spec(Family::gaussian, {1.0, 0.5});
  DistributionSpec b = a;
  b.spectrum = Spectrum::custom({1.0, 0.25});
  CHECK(a.digest() != b.digest());
  const DistributionSpec t = make_spec(Family::student_t, {1.0}, 5.0);
  const DistributionSpec back = DistributionSpec::from_json(t.to_json());
  CHECK(back.digest() == t.digest());
  CHECK(back.family == Family::student_t);
  CHECK(back.dof == doctest::Approx(5.0));
  CHECK_THROWS_AS(draw_sample(make_spec(Family::student_t, {1.0}, 2.0), 5, 1),
                  std::invalid_argument);
}
