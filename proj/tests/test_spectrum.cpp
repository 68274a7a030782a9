#include <doctest.h>

#include <nlohmann/json.hpp>

#include "tensorconc/rng.hpp"
#include "tensorconc/spectrum.hpp"

using namespace tensorconc;

TEST_CASE("spectrum factories") {
  CHECK(Spectrum::identity(4).eigenvalues() == std::vector<double>{1, 1, 1, 1});
  CHECK(Spectrum::geometric(3, 0.5).eigenvalues() == std::vector<double>{1.0, 0.5, 0.25});
  CHECK(Spectrum::custom({2, 5, 1}).eigenvalues() == std::vector<double>{5, 2, 1});
  const Spectrum poly = Spectrum::polynomial(3, 1.0);
  CHECK(poly.eigenvalues()[1] == doctest::Approx(0.5));
  CHECK(poly.eigenvalues()[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("spectrum functionals") {
  CHECK(Spectrum::identity(4).effective_rank() == doctest::Approx(4.0));
  CHECK(Spectrum::custom({1, 0.5, 0.25}).effective_rank() == doctest::Approx(1.75));
  CHECK(Spectrum::custom({5}).effective_rank() == doctest::Approx(1.0));
  CHECK(Spectrum::custom({3, 1}).operator_norm() == doctest::Approx(3.0));
  CHECK(Spectrum::custom({3, 1}).trace() == doctest::Approx(4.0));
  CHECK(Spectrum::custom({1}).operator_norm() == doctest::Approx(1.0));
  CHECK(Spectrum::custom({1}).trace() == doctest::Approx(1.0));
}

TEST_CASE("spectrum rejects invalid parameters") {
  CHECK_THROWS_AS(Spectrum::custom({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::custom({-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::custom({}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::geometric(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::geometric(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::polynomial(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::identity(0), std::invalid_argument);
}

TEST_CASE("spectrum scalar functionals stay in range") {
  DrawStream rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 1 + static_cast<int>(rng.uniform() * 12);
    std::vector<double> lam(static_cast<std::size_t>(d));
    for (auto& l : lam) l = 0.05 + 3.0 * rng.uniform();
    const Spectrum s = Spectrum::custom(lam);
    const double r = s.effective_rank();
    CHECK(r >= 1.0);
    CHECK(r <= d + 1e-12);
    CHECK(s.operator_norm() <= s.trace() + 1e-12);
    CHECK(s.trace() <= d * s.operator_norm() + 1e-12);

    // Effective rank is a scale-free ratio.
    std::vector<double> scaled = s.eigenvalues();
    const double t2 = 0.1 + 5.0 * rng.uniform();
    for (auto& l : scaled) l *= t2;
    CHECK(Spectrum::custom(scaled).effective_rank() == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("spectrum JSON is a plain array") {
  const Spectrum s = Spectrum::custom({2.0, 1.0, 0.5});
  const nlohmann::json j = s.to_json();
  REQUIRE(j.is_array());
  CHECK(Spectrum::from_json(j).eigenvalues() == s.eigenvalues());
  CHECK_THROWS_AS(Spectrum::from_json(nlohmann::json::array()), std::invalid_argument);
}
