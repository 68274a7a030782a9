#include <doctest.h>

#include <cmath>
#include <vector>

#include "tensorconc/deviation.hpp"
#include "tensorconc/errors.hpp"
#include "tensorconc/mathutil.hpp"
#include "tensorconc/rng.hpp"

using namespace tensorconc;

namespace {

DistributionSpec gaussian_spec(std::vector<double> lam) {
  DistributionSpec spec;
  spec.family = Family::gaussian;
  spec.spectrum = Spectrum::custom(std::move(lam));
  return spec;
}

Sample manual_sample(const DistributionSpec& spec, const Eigen::MatrixXd& data) {
  Sample s;
  s.data = data;
  s.n = static_cast<int>(data.rows());
  s.spec_digest = spec.digest();
  s.seed = 0;
  return s;
}

DeviationProblem make_problem(DistributionSpec spec, Eigen::MatrixXd data, int p,
                              Variant variant) {
  DeviationProblem prob;
  prob.spec = spec;
  prob.sample = manual_sample(spec, std::move(data));
  prob.p = p;
  prob.variant = variant;
  return prob;
}

DeviationProblem random_problem(const DistributionSpec& spec, int n, int p,
                                Variant variant, std::uint64_t seed) {
  DeviationProblem prob;
  prob.spec = spec;
  prob.sample = draw_sample(spec, n, seed);
  prob.p = p;
  prob.variant = variant;
  return prob;
}

Eigen::VectorXd random_unit(DrawStream& rng, int d) {
  Eigen::VectorXd v(d);
  for (int j = 0; j < d; ++j) v[j] = rng.normal();
  return v.normalized();
}

// Homogeneous extension ||w||^p * objective(w/||w||), the function whose
// Euclidean gradient the library reports.
double extended_objective(const DeviationProblem& prob, const Eigen::VectorXd& w) {
  const double nrm = w.norm();
  return std::pow(nrm, prob.p) * deviation_objective(prob, w / nrm);
}

}  // namespace

TEST_CASE("objective in one dimension is plain arithmetic") {
  const DistributionSpec spec = gaussian_spec({1.0});
  Eigen::MatrixXd data(2, 1);
  data << 2.0, 0.0;
  const DeviationProblem prob = make_problem(spec, data, 2, Variant::signed_power);
  Eigen::VectorXd v(1);
  v << 1.0;
  CHECK(deviation_objective(prob, v) == doctest::Approx(1.0));
}

TEST_CASE("objective at directions orthogonal to the data") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  Eigen::MatrixXd data(3, 2);
  data << 1.0, 0.0, -2.0, 0.0, 0.5, 0.0;
  const DeviationProblem prob = make_problem(spec, data, 4, Variant::signed_power);
  Eigen::VectorXd v(2);
  v << 0.0, 1.0;
  // Empirical term vanishes, leaving minus the population moment (=3).
  CHECK(deviation_objective(prob, v) == doctest::Approx(-3.0));
}

TEST_CASE("objective agrees with a compensated-summation oracle") {
  const DistributionSpec spec = gaussian_spec({1.5, 0.5});
  DrawStream rng(77);
  for (int rep = 0; rep < 5; ++rep) {
    const DeviationProblem prob =
        random_problem(spec, 200, 3, Variant::absolute_power, 100 + rep);
    const Eigen::VectorXd v = random_unit(rng, 2);
    // Kahan summation in reversed order.
    const Eigen::VectorXd t = prob.sample.data * v;
    double sum = 0.0, comp = 0.0;
    for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
      const double term = std::abs(pow_int(t[i], 3)) - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
    }
    const double oracle =
        sum / prob.sample.n - population_abs_moment(spec, v, 3);
    CHECK(deviation_objective(prob, v) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central finite differences") {
  DrawStream rng(123);
  const DistributionSpec spec = gaussian_spec({2.0, 1.0, 0.5});
  int checked = 0;
  for (int rep = 0; rep < 5; ++rep) {
    for (int p : {2, 3, 4, 5}) {
      for (Variant variant : {Variant::signed_power, Variant::absolute_power}) {
        const DeviationProblem prob = random_problem(spec, 40, p, variant, 500 + rep);
        const Eigen::VectorXd v = random_unit(rng, 3);
        const Eigen::VectorXd g = deviation_gradient(prob, v);
        const double h = 1e-5;
        const double scale = std::max(1.0, g.norm());
        for (int j = 0; j < 3; ++j) {
          Eigen::VectorXd hi = v, lo = v;
          hi[j] += h;
          lo[j] -= h;
          const double fd =
              (extended_objective(prob, hi) - extended_objective(prob, lo)) / (2 * h);
          CHECK(std::abs(g[j] - fd) / scale <= 1e-6);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 40);
}

TEST_CASE("gradient with empty-signal data reduces to the population term") {
  const DistributionSpec spec = gaussian_spec({2.0, 1.0});
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(3, 2);
  const DeviationProblem prob = make_problem(spec, data, 4, Variant::signed_power);
  Eigen::VectorXd v(2);
  v << 1.0, 0.0;
  const Eigen::VectorXd g = deviation_gradient(prob, v);
  // -p * (p-1)!! * lambda1^{p/2} along e1.
  CHECK(g[0] == doctest::Approx(-4.0 * 3.0 * 4.0));
  const double h = 1e-5;
  Eigen::VectorXd hi = v, lo = v;
  hi[0] += h;
  lo[0] -= h;
  const double fd = (extended_objective(prob, hi) - extended_objective(prob, lo)) / (2 * h);
  CHECK(g[0] == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("solver equals the dense eigensolver at order two") {
  SolverConfig cfg;
  cfg.restarts = 12;
  cfg.max_iterations = 200;
  DrawStream rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 2 + static_cast<int>(rng.uniform() * 14);
    const int n = 4 + static_cast<int>(rng.uniform() * 60);
    std::vector<double> lam(static_cast<std::size_t>(d));
    for (auto& l : lam) l = 0.25 + 2.0 * rng.uniform();
    const DistributionSpec spec = gaussian_spec(lam);
    const DeviationProblem prob =
        random_problem(spec, n, 2, Variant::signed_power, 900 + rep);
    const double exact = exact_oracle_p2(prob.sample, spec);
    const MaximizerResult res = maximize_deviation(prob, cfg, 31 + rep);
    CHECK(std::abs(res.value - exact) <= 1e-8 * std::max(1.0, exact));
    CHECK(res.argmax.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(std::abs(deviation_objective(prob, res.argmax)) - res.value) <= 1e-12);
  }
}

TEST_CASE("one-dimensional problems are solved exactly") {
  const DistributionSpec spec = gaussian_spec({1.0});
  const DeviationProblem prob = random_problem(spec, 6, 3, Variant::signed_power, 42);
  SolverConfig cfg;
  cfg.restarts = 3;
  const MaximizerResult res = maximize_deviation(prob, cfg, 1);
  double mean = 0.0;
  for (int i = 0; i < 6; ++i) mean += pow_int(prob.sample.data(i, 0), 3);
  mean /= 6.0;
  CHECK(res.value == doctest::Approx(std::abs(mean)).epsilon(1e-14));
  CHECK(std::abs(res.argmax[0]) == doctest::Approx(1.0));
}

TEST_CASE("solver matches the angular grid certificate in the plane") {
  const DistributionSpec spec = gaussian_spec({1.0, 0.7});
  SolverConfig cfg;
  cfg.restarts = 12;
  for (Variant variant : {Variant::signed_power, Variant::absolute_power}) {
    const DeviationProblem prob = random_problem(spec, 2, 3, variant, 777);
    const double grid = grid_oracle(prob, 100000);
    const MaximizerResult res = maximize_deviation(prob, cfg, 5);
    CHECK(std::abs(res.value - grid) <= 1e-6);
    CHECK(res.value >= grid - 1e-6);
  }
}

TEST_CASE("grid oracle certifies the exact order-two value") {
  const DistributionSpec spec = gaussian_spec({1.0, 0.5});
  for (int rep = 0; rep < 3; ++rep) {
    const DeviationProblem prob =
        random_problem(spec, 10, 2, Variant::signed_power, 60 + rep);
    CHECK(grid_oracle(prob, 100000) ==
          doctest::Approx(exact_oracle_p2(prob.sample, spec)).epsilon(1e-6));
  }
}

TEST_CASE("grid oracle on a null objective") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  const DeviationProblem prob =
      make_problem(spec, Eigen::MatrixXd::Zero(4, 2), 3, Variant::signed_power);
  CHECK(grid_oracle(prob, 1000) == doctest::Approx(0.0));
}

TEST_CASE("grid oracle is rotation equivariant under the identity spectrum") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  const DeviationProblem prob = random_problem(spec, 8, 4, Variant::signed_power, 12);
  const double base = grid_oracle(prob, 20000);
  const double phi_angle = 0.81;
  Eigen::Matrix2d rot;
  rot << std::cos(phi_angle), -std::sin(phi_angle), std::sin(phi_angle),
      std::cos(phi_angle);
  DeviationProblem rotated = prob;
  rotated.sample.data = prob.sample.data * rot.transpose();
  CHECK(grid_oracle(rotated, 20000) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("grid oracle covers three dimensions") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0, 1.0});
  const DeviationProblem prob = random_problem(spec, 6, 2, Variant::signed_power, 8);
  CHECK(grid_oracle(prob, 20000) ==
        doctest::Approx(exact_oracle_p2(prob.sample, spec)).epsilon(1e-6));
  const DeviationProblem bad = random_problem(gaussian_spec({1, 1, 1, 1}), 4, 2,
                                              Variant::signed_power, 9);
  CHECK_THROWS_AS(grid_oracle(bad, 100), unsupported_error);

  // Solver never lands below the grid certificate (both odd and even p).
  SolverConfig cfg;
  cfg.restarts = 12;
  for (int p : {3, 4}) {
    const DeviationProblem cubic = random_problem(spec, 5, p, Variant::signed_power, 14 + p);
    const MaximizerResult res = maximize_deviation(cubic, cfg, 6);
    CHECK(res.value >= grid_oracle(cubic, 20000) - 1e-6);
  }
}

TEST_CASE("dense order-two oracle on pinned instances") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  Eigen::MatrixXd one_row(1, 2);
  one_row << 1.0, 0.0;
  CHECK(exact_oracle_p2(manual_sample(spec, one_row), spec) == doctest::Approx(1.0));
  Eigen::MatrixXd diag_row(1, 2);
  diag_row << 1.0, 1.0;  // norm sqrt(2): eigenvalues of X X^T - I are {1, -1}
  CHECK(exact_oracle_p2(manual_sample(spec, diag_row), spec) == doctest::Approx(1.0));

  const DistributionSpec big = gaussian_spec(std::vector<double>(2049, 1.0));
  CHECK_THROWS_AS(exact_oracle_p2(manual_sample(big, Eigen::MatrixXd::Zero(1, 2049)), big),
                  unsupported_error);
}

TEST_CASE("multilinear grid agrees with the single-direction reduction") {
  DrawStream rng(92);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> lam = {0.5 + rng.uniform(), 0.25 + 0.5 * rng.uniform()};
    std::sort(lam.rbegin(), lam.rend());
    const DistributionSpec spec = gaussian_spec(lam);
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    for (int p : {2, 3}) {
      const DeviationProblem prob =
          random_problem(spec, n, p, Variant::signed_power, 4000 + 10 * rep + p);
      const int res = 240;
      const double multi =
          multilinear_grid_sup(prob.sample, spec, p, res);
      const double single = grid_oracle(prob, 20000);
      const double gap = multilinear_grid_gap_bound(prob.sample, spec, p, res) +
                         grid_gap_bound(prob, 20000);
      CHECK(multi - single <= gap);
      CHECK(single - multi <= gap);
    }
  }
}

TEST_CASE("multilinear grid pinned cases") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  CHECK(multilinear_grid_sup(manual_sample(spec, Eigen::MatrixXd::Zero(3, 2)), spec, 3,
                             100) == doctest::Approx(0.0));
  Eigen::MatrixXd e1(1, 2);
  e1 << 1.0, 0.0;
  CHECK(multilinear_grid_sup(manual_sample(spec, e1), spec, 2, 100) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(multilinear_grid_sup(manual_sample(spec, e1), spec, 4, 100),
                  unsupported_error);
  CHECK_THROWS_AS(multilinear_grid_sup(manual_sample(spec, e1), spec, 2, 500),
                  std::invalid_argument);
}

TEST_CASE("solver value dominates arbitrary directions") {
  const DistributionSpec spec = gaussian_spec({1.0, 0.75, 0.5});
  const DeviationProblem prob = random_problem(spec, 12, 4, Variant::signed_power, 55);
  SolverConfig cfg;
  cfg.restarts = 9;
  const MaximizerResult res = maximize_deviation(prob, cfg, 2);
  DrawStream rng(66);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd v = random_unit(rng, 3);
    CHECK(res.value >= std::abs(deviation_objective(prob, v)) - 1e-12);
  }
}

TEST_CASE("symmetric variants report a canonical representative") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  SolverConfig cfg;
  cfg.restarts = 6;
  for (auto [p, variant] : {std::pair{4, Variant::signed_power},
                            std::pair{3, Variant::absolute_power}}) {
    const DeviationProblem prob = random_problem(spec, 10, p, variant, 21);
    const MaximizerResult res = maximize_deviation(prob, cfg, 3);
    int first_nonzero = 0;
    while (first_nonzero < 2 && res.argmax[first_nonzero] == 0.0) ++first_nonzero;
    CHECK(res.argmax[first_nonzero] > 0.0);
    // The two antipodal directions give the same objective.
    CHECK(deviation_objective(prob, res.argmax) ==
          doctest::Approx(deviation_objective(prob, -res.argmax)).epsilon(1e-12));
  }
}

TEST_CASE("problem validation catches mismatches") {
  const DistributionSpec spec = gaussian_spec({1.0, 1.0});
  DeviationProblem prob = random_problem(spec, 4, 2, Variant::signed_power, 1);
  prob.sample.spec_digest ^= 1;
  SolverConfig cfg;
  CHECK_THROWS_AS(maximize_deviation(prob, cfg, 0), std::invalid_argument);
  CHECK_THROWS_AS(
      exact_oracle_p2(draw_sample(spec, 3, 2), gaussian_spec({1.0, 1.0, 1.0})),
      std::invalid_argument);
  Eigen::VectorXd v(2);
  v << 0.5, 0.5;
  DeviationProblem ok = random_problem(spec, 4, 2, Variant::signed_power, 1);
  CHECK_THROWS_AS(deviation_objective(ok, v), std::invalid_argument);
}
