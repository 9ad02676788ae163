#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qlag/analytics.hpp"
#include "qlag/scenarios.hpp"

using namespace qlag;

namespace {

ExperimentSpec table_case(std::string id, DistributionSpec s, DistributionSpec d, double ts,
                          double kappa, std::set<Method> methods, std::vector<std::uint64_t> seeds) {
  ExperimentSpec e;
  e.id = std::move(id);
  e.service = std::move(s);
  e.delay = std::move(d);
  e.reward = ExponentialReward{kappa};
  e.methods = std::move(methods);
  e.seeds = std::move(seeds);
  e.grid.lag_max = 3.0 * ts;
  e.grid.step = 0.05 * ts;
  e.grid.n = 20'000;
  return e;
}

const std::set<Method> kAll = {Method::grid, Method::bayes, Method::exact, Method::surrogate,
                               Method::conditions};

}  // namespace

TEST_CASE("suite rows: closed-form cases carry every estimate") {
  const std::vector<ExperimentSpec> specs = {
      table_case("A1", Exponential{1.0}, Exponential{0.33}, 1.0, 1.0, kAll, {1, 2}),
      table_case("C2", Uniform{0.0, 1.0}, Uniform{0.0, 0.3334}, 0.5, 1.0, kAll, {1, 2}),
  };
  const auto rows = run_suite(specs);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& spec = specs[i / 2];
    REQUIRE(r.g_sur);
    REQUIRE(r.g_sim);
    REQUIRE(r.g_be);
    REQUIRE(r.g_tb);
    REQUIRE(r.g_exact);
    CHECK(*r.kappa == 1.0);
    // Same code path as analytics.
    CHECK(std::abs(*r.g_sur - surrogate_reward(spec.service, spec.delay, 1.0, *r.surrogate_lag)) <=
          1e-9);
    CHECK(*r.g_be <= *r.g_sur);
    CHECK(*r.g_tb <= *r.g_sur * (1.0 + 1e-4));
    CHECK(*r.g_exact <= *r.g_sur);
    CHECK(r.cond1.has_value());
  }
}

TEST_CASE("suite rows: surrogate closeness at a small kappa") {
  const std::vector<ExperimentSpec> specs = {
      table_case("A1", Exponential{1.0}, Exponential{0.33}, 1.0, 0.1,
                 {Method::bayes, Method::surrogate}, {1, 2, 3, 4, 5, 6}),
      table_case("C2", Uniform{0.0, 1.0}, Uniform{0.0, 0.3334}, 0.5, 0.1,
                 {Method::bayes, Method::surrogate}, {1, 2, 3, 4, 5, 6}),
  };
  const auto rows = run_suite(specs);
  REQUIRE(rows.size() == 12);
  // Single last-5000 windows scatter by a few percent, so compare seed means.
  for (std::size_t c = 0; c < 2; ++c) {
    double be = 0.0;
    for (std::size_t i = 0; i < 6; ++i) be += *rows[6 * c + i].g_be / 6.0;
    const double sur = *rows[6 * c].g_sur;
    CAPTURE(rows[6 * c].case_id);
    CHECK(be <= sur);
    CHECK((sur - be) / sur <= 0.05);
  }
}

TEST_CASE("suite rows: truncated normal case has no surrogate") {
  const std::vector<ExperimentSpec> specs = {table_case(
      "F2", TruncatedNormal{0.5, 0.25, 0.0, 1.0}, TruncatedNormal{0.1667, 0.08335, 0.0, 0.3334},
      0.5, 1.0, {Method::grid, Method::bayes}, {1, 2, 3})};
  const auto rows = run_suite(specs);
  double gap = 0.0;
  for (const auto& r : rows) {
    CHECK_FALSE(r.g_sur);
    CHECK_FALSE(r.g_tb);
    gap += std::abs(*r.g_be - *r.g_sim) / *r.g_sim;
  }
  CHECK(gap / rows.size() <= 0.05);
  std::ostringstream os;
  write_suite_csv(os, rows);
  const auto csv = os.str();
  CHECK(csv.rfind("case,seed,kappa,G_sur,G_sim,G_be,G_tb\n", 0) == 0);
  CHECK(csv.find("\nF2,1,1,,") != std::string::npos);
  CHECK(csv.back() == '\n');
}

TEST_CASE("suite is reproducible") {
  const std::vector<ExperimentSpec> specs = {table_case(
      "B1", Exponential{1.0}, Uniform{0.0, 0.66}, 1.0, 1.0, kAll, {4})};
  std::ostringstream a, b;
  write_suite_csv(a, run_suite(specs));
  write_suite_csv(b, run_suite(specs));
  CHECK(a.str() == b.str());
}

TEST_CASE("suite validation") {
  auto a = table_case("X", Exponential{1.0}, Exponential{0.33}, 1.0, 1.0, {Method::exact}, {1});
  CHECK_THROWS(run_suite({a, a}));
  auto poly = a;
  poly.reward = PolynomialReward{1.0};
  poly.methods = {Method::surrogate};
  CHECK_THROWS(validate(poly));
  auto short_sched = a;
  short_sched.schedule = AbruptPiecewise{{{100, 1.0, 0.33}}};
  CHECK_THROWS(validate(short_sched));
}

TEST_CASE("mean shift: stationary schedule gives a constant reference") {
  auto base = table_case("S", Exponential{1.0}, Exponential{0.33}, 1.0, 1.0, {Method::bayes}, {1});
  base.n = 10'000;
  const auto res = mean_shift_run(ShiftKind::abrupt, base, {2000, 1000, 1});
  REQUIRE(res.points.size() == 9);
  for (const auto& p : res.points) CHECK(p.g_ref == res.points.front().g_ref);
  CHECK(res.points.front().index == 2000);
  CHECK(res.points.front().g_ref == doctest::Approx(0.30391).epsilon(1e-3));
}

TEST_CASE("mean shift: abrupt switch") {
  auto base = table_case("M", Exponential{1.0}, Exponential{0.33}, 1.0, 1.0, {Method::bayes}, {1});
  base.n = 20'000;
  base.schedule = AbruptPiecewise{{{10'000, 1.0, 0.33}, {10'000, 0.5, 0.1667}}};
  const auto res = mean_shift_run(ShiftKind::abrupt, base, {2000, 250, 3});
  CHECK(res.points.front().g_ref != res.points.back().g_ref);
  CHECK(mean_relative_deviation(res, base.schedule, 0, 10'000, 2000) <= 0.10);
  CHECK(mean_relative_deviation(res, base.schedule, 10'000, 20'000, 2000) <= 0.10);
  CHECK_THROWS(mean_relative_deviation(res, base.schedule, 30'000, 40'000, 0));
  CHECK_THROWS(mean_shift_run(ShiftKind::gradual, base, {2000, 250, 3}));
  std::ostringstream os;
  write_mean_shift_csv(os, res);
  CHECK(os.str().rfind("index,t_s,t_d,G_be,G_ref\n", 0) == 0);
}

TEST_CASE("mean shift: settle window skips points right after a switch") {
  MeanShiftResult r;
  r.points = {{10, 1, 1, 1.0, 1.0}, {12, 1, 1, 2.0, 1.0}, {20, 1, 1, 1.5, 1.0}};
  const AbruptPiecewise s{{{11, 1.0, 1.0}, {20, 1.0, 1.0}}};
  CHECK(mean_relative_deviation(r, s, 0, 100, 0) == doctest::Approx(0.5));
  CHECK(mean_relative_deviation(r, s, 0, 100, 5) == doctest::Approx(0.25));
}
