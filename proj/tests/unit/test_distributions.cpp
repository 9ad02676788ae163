#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qlag/distributions.hpp"
#include "qlag/rng.hpp"

using namespace qlag;

namespace {

double empirical_mean(const DistributionSpec& d, std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += sample(d, rng);
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("sample: point mass and laws of large numbers") {
  RandomStream rng(7);
  CHECK(sample(Deterministic{1.0}, rng) == 1.0);
  CHECK(empirical_mean(Exponential{1.0}, 1'000'000, 1) == doctest::Approx(1.0).epsilon(0.005));
  CHECK(empirical_mean(Uniform{0.0, 2.0}, 1'000'000, 2) == doctest::Approx(1.0).epsilon(0.005));
  CHECK(empirical_mean(TruncatedNormal{1.0, 0.5, 0.0, 2.0}, 1'000'000, 3) ==
        doctest::Approx(1.0).epsilon(0.005));
}

TEST_CASE("sample: draws stay in the support") {
  RandomStream rng(11);
  const TruncatedNormal far_tail{0.0, 0.1, 0.8, 1.0};
  for (int i = 0; i < 10000; ++i) {
    const double x = sample(far_tail, rng);
    REQUIRE(x >= 0.8);
    REQUIRE(x <= 1.0);
    REQUIRE(sample(Exponential{0.33}, rng) >= 0.0);
  }
}

TEST_CASE("sample: same seed gives the same sequence") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(sample(Exponential{2.0}, a) == sample(Exponential{2.0}, b));
}

TEST_CASE("mean") {
  CHECK(mean(Exponential{0.33}) == 0.33);
  CHECK(mean(Uniform{0.0, 2.0}) == 1.0);
  CHECK(mean(Deterministic{3.5}) == 3.5);

  const auto mc = oracle::monte_carlo(
      10'000'000, 5, [](auto& r) { return oracle::draw_truncnorm(r, 1.0, 0.5, 0.0, 2.0); },
      [](double x) { return x; });
  CHECK(std::abs(mean(TruncatedNormal{1.0, 0.5, 0.0, 2.0}) - mc.mean) <= 3.0 * mc.se);

  const auto skew = oracle::monte_carlo(
      10'000'000, 6, [](auto& r) { return oracle::draw_truncnorm(r, 0.2, 0.5, 0.0, 3.0); },
      [](double x) { return x; });
  CHECK(std::abs(mean(TruncatedNormal{0.2, 0.5, 0.0, 3.0}) - skew.mean) <= 3.0 * skew.se);
}

TEST_CASE("mgf: closed forms") {
  CHECK(mgf(Exponential{1.0}, -1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mgf(Exponential{0.33}, 1.0) == doctest::Approx(1.0 / 0.67).epsilon(1e-14));
  CHECK(mgf(Exponential{0.33}, 1.0) == doctest::Approx(1.4925).epsilon(1e-4));
  CHECK(mgf(Deterministic{0.7}, 1.3) == doctest::Approx(std::exp(0.91)).epsilon(1e-14));
  CHECK(mgf(Uniform{0.0, 2.0}, 0.0) == 1.0);
  CHECK(mgf(Uniform{1.0, 3.0}, -0.5) ==
        doctest::Approx((std::exp(-0.5) - std::exp(-1.5)) / (0.5 * 2.0)).epsilon(1e-13));
}

TEST_CASE("mgf: Monte-Carlo cross-checks") {
  const auto e = oracle::monte_carlo(
      2'000'000, 8, [](auto& r) { return oracle::draw_exp(r, 1.0); },
      [](double x) { return std::exp(-x); });
  CHECK(std::abs(mgf(Exponential{1.0}, -1.0) - e.mean) <= 3.0 * e.se);

  const auto d = oracle::monte_carlo(
      2'000'000, 9, [](auto& r) { return oracle::draw_exp(r, 0.33); },
      [](double x) { return std::exp(x); });
  CHECK(std::abs(mgf(Exponential{0.33}, 1.0) - d.mean) <= 3.0 * d.se);

  const TruncatedNormal tn{0.5, 0.25, 0.0, 1.0};
  const auto t = oracle::monte_carlo(
      2'000'000, 10, [](auto& r) { return oracle::draw_truncnorm(r, 0.5, 0.25, 0.0, 1.0); },
      [](double x) { return std::exp(1.7 * x); });
  CHECK(std::abs(mgf(tn, 1.7) - t.mean) <= 3.0 * t.se);
}

TEST_CASE("mgf: divergence") {
  CHECK_THROWS_AS(mgf(Exponential{1.0}, 1.0), DivergentMgfError);
  CHECK_THROWS_AS(mgf(Exponential{0.5}, 2.5), DivergentMgfError);
  CHECK_FALSE(mgf_exists(Exponential{0.5}, 2.0));
  CHECK(mgf_exists(Exponential{0.5}, 1.99));
  CHECK(mgf_exists(Uniform{0.0, 2.0}, 50.0));
}

TEST_CASE("prob_diff_exceeds: examples") {
  CHECK(prob_diff_exceeds(Deterministic{1.0}, Deterministic{1.0}, 0.0) == 0.0);
  const double p0 = (1.0 / 0.33) / (1.0 + 1.0 / 0.33);
  CHECK(prob_diff_exceeds(Exponential{1.0}, Exponential{0.33}, 0.0) ==
        doctest::Approx(p0).epsilon(1e-14));
  CHECK(prob_diff_exceeds(Exponential{1.0}, Exponential{0.33}, 0.0) ==
        doctest::Approx(0.7519).epsilon(1e-4));
  CHECK(prob_diff_exceeds(Exponential{1.0}, Exponential{0.33}, 1.0) ==
        doctest::Approx(0.2766).epsilon(1e-3));

  const auto mc = oracle::monte_carlo(
      10'000'000, 12, [](auto& r) { return oracle::draw_exp(r, 1.0) - oracle::draw_exp(r, 0.33); },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
  CHECK(std::abs(p0 - mc.mean) <= 3.0 * mc.se);
}

TEST_CASE("prob_diff_exceeds: numeric paths agree with Monte Carlo") {
  struct Case {
    DistributionSpec s, d;
    double x;
    std::function<double(std::mt19937_64&)> diff;
  };
  const std::vector<Case> cases = {
      {Uniform{0.0, 2.0}, Uniform{0.0, 0.66}, 0.3,
       [](auto& r) { return oracle::draw_unif(r, 0, 2) - oracle::draw_unif(r, 0, 0.66); }},
      {Exponential{1.0}, Uniform{0.0, 0.66}, 0.5,
       [](auto& r) { return oracle::draw_exp(r, 1.0) - oracle::draw_unif(r, 0, 0.66); }},
      {Uniform{0.0, 2.0}, Exponential{0.33}, -0.2,
       [](auto& r) { return oracle::draw_unif(r, 0, 2) - oracle::draw_exp(r, 0.33); }},
      {TruncatedNormal{1.0, 0.5, 0.0, 2.0}, TruncatedNormal{0.33, 0.165, 0.0, 0.66}, 0.1,
       [](auto& r) {
         return oracle::draw_truncnorm(r, 1.0, 0.5, 0.0, 2.0) -
                oracle::draw_truncnorm(r, 0.33, 0.165, 0.0, 0.66);
       }},
  };
  std::uint64_t seed = 100;
  for (const auto& c : cases) {
    const auto mc = oracle::monte_carlo(
        2'000'000, seed++, c.diff, [&](double v) { return v > c.x ? 1.0 : 0.0; });
    CHECK(std::abs(prob_diff_exceeds(c.s, c.d, c.x) - mc.mean) <= 4.0 * mc.se);
  }
}

TEST_CASE("prob_diff_exceeds: point masses") {
  CHECK(prob_diff_exceeds(Exponential{1.0}, Deterministic{0.5}, 0.25) ==
        doctest::Approx(std::exp(-0.75)).epsilon(1e-14));
  CHECK(prob_diff_exceeds(Deterministic{1.0}, Uniform{0.0, 2.0}, 0.2) ==
        doctest::Approx(0.4).epsilon(1e-14));
  CHECK(prob_diff_exceeds(Deterministic{1.0}, Deterministic{0.5}, 0.4) == 1.0);
  CHECK(prob_diff_exceeds(Deterministic{1.0}, Deterministic{0.5}, 0.5) == 0.0);
}

TEST_CASE("excess_mean against quadrature") {
  struct Law {
    DistributionSpec spec;
    double lo;
    std::function<double(double)> density;
  };
  const std::vector<Law> laws = {
      {Uniform{0.5, 2.0}, 0.5, [](double x) { return x >= 0.5 && x <= 2.0 ? 1.0 / 1.5 : 0.0; }},
      {TruncatedNormal{1.0, 0.5, 0.0, 2.0}, 0.0,
       [](double x) {
         const double z = (1.0 - 0.0) / 0.5;
         const double mass = std::erf(z / std::sqrt(2.0));
         return x >= 0.0 && x <= 2.0
                    ? std::exp(-0.5 * std::pow((x - 1.0) / 0.5, 2)) / (0.5 * std::sqrt(2 * M_PI)) / mass
                    : 0.0;
       }},
  };
  for (const auto& [law, lo, density] : laws) {
    for (double c : {-0.5, 0.0, 0.7, 1.3, 2.5}) {
      // Split at the kink so Simpson sees smooth pieces.
      const auto g = [&](double x) { return std::max(x - c, 0.0) * density(x); };
      const double k = std::clamp(c, lo, 2.0);
      const double ref = oracle::simpson(g, lo, k, 200000) + oracle::simpson(g, k, 2.0, 200000);
      CHECK(excess_mean(law, c) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  CHECK(excess_mean(Exponential{2.0}, 1.0) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(excess_mean(Exponential{2.0}, -1.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(excess_mean(Deterministic{1.0}, 0.25) == 0.75);
}

TEST_CASE("cdf, survival and quantile are consistent") {
  const std::vector<DistributionSpec> laws = {Exponential{0.7}, Uniform{0.2, 1.2},
                                              TruncatedNormal{0.4, 0.3, 0.0, 1.5}};
  for (const auto& law : laws) {
    for (double p : {0.01, 0.25, 0.5, 0.9, 0.999}) {
      const double x = quantile(law, p);
      CHECK(cdf(law, x) == doctest::Approx(p).epsilon(1e-10));
      CHECK(survival(law, x) == doctest::Approx(1.0 - p).epsilon(1e-9));
    }
  }
}

TEST_CASE("expectation matches analytic means") {
  CHECK(expectation(Exponential{0.7}, [](double x) { return x; }).value ==
        doctest::Approx(0.7).epsilon(1e-9));
  CHECK(expectation(Uniform{0.0, 2.0}, [](double x) { return x * x; }).value ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(expectation(Deterministic{2.0}, [](double x) { return x * x; }).value == 4.0);
}

TEST_CASE("with_mean keeps the family and hits the target") {
  CHECK(mean(with_mean(Exponential{1.0}, 0.5)) == doctest::Approx(0.5));
  const auto u = with_mean(Uniform{0.0, 2.0}, 0.5);
  CHECK(std::get<Uniform>(u).upper == doctest::Approx(1.0));
  CHECK(mean(with_mean(Deterministic{1.0}, 0.3)) == 0.3);
  const auto t = with_mean(TruncatedNormal{1.0, 0.5, 0.0, 2.0}, 0.5);
  CHECK(std::holds_alternative<TruncatedNormal>(t));
  CHECK(mean(t) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::get<TruncatedNormal>(t).lower >= 0.0);
  const auto low = with_mean(TruncatedNormal{1.0, 0.5, 0.0, 2.0}, 0.1);
  CHECK(mean(low) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK_THROWS(with_mean(TruncatedNormal{1.0, 0.5, 0.0, 2.0}, 1e-4));
  const auto up = with_mean(TruncatedNormal{1.0, 0.5, 0.0, 2.0}, 1.5);
  CHECK(mean(up) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(Exponential{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Exponential{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Uniform{1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Uniform{-1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(TruncatedNormal{1.0, 0.0, 0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(TruncatedNormal{1.0, 1.0, 2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Deterministic{-0.1}), std::invalid_argument);
  CHECK_NOTHROW(validate(Deterministic{0.0}));
}
