#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qlag/reward.hpp"

using namespace qlag;

TEST_CASE("eval") {
  CHECK(eval(ExponentialReward{1.0}, 0.0) == 1.0);
  CHECK(eval(PolynomialReward{2.0}, 1.0) == 0.25);
  CHECK(eval(ExponentialReward{1.0}, 1.5) == doctest::Approx(0.2231).epsilon(1e-4));
  CHECK(eval(ExponentialReward{1.0}, 1.5) == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
}

TEST_CASE("deriv") {
  CHECK(deriv(ExponentialReward{1.0}, 0.0) == -1.0);
  CHECK(deriv(PolynomialReward{1.0}, 0.0) == -1.0);
  CHECK(deriv(ExponentialReward{2.0}, 1.0) == doctest::Approx(-0.2707).epsilon(1e-4));
}

TEST_CASE("deriv matches central differences") {
  const std::vector<RewardSpec> fs = {ExponentialReward{0.3}, ExponentialReward{2.5},
                                      PolynomialReward{0.5}, PolynomialReward{3.0}};
  for (const auto& f : fs) {
    for (double t : {0.0, 0.4, 1.7, 6.0}) {
      const double h = 1e-5;
      const double fd = (eval(f, t + h) - eval(f, t - h)) / (2 * h);
      CHECK(deriv(f, t) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("rewards are positive and non-increasing") {
  const std::vector<RewardSpec> fs = {ExponentialReward{1.0}, PolynomialReward{2.0}};
  for (const auto& f : fs) {
    double prev = eval(f, 0.0);
    for (double t = 0.1; t < 20.0; t += 0.1) {
      const double v = eval(f, t);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("as_function agrees with the spec") {
  const auto f = as_function(PolynomialReward{1.5});
  CHECK(f.value(2.0) == eval(PolynomialReward{1.5}, 2.0));
  CHECK(f.derivative(2.0) == deriv(PolynomialReward{1.5}, 2.0));
  CHECK(kind_name(ExponentialReward{1.0}) == "exp");
  CHECK(kind_name(PolynomialReward{1.0}) == "poly");
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(ExponentialReward{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ExponentialReward{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(PolynomialReward{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ExponentialReward{NAN}), std::invalid_argument);
}
