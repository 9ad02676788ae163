#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qlag/bayes.hpp"
#include "qlag/conditions.hpp"
#include "qlag/distributions.hpp"
#include "qlag/gridsearch.hpp"
#include "qlag/reward.hpp"
#include "qlag/simulator.hpp"

namespace qlag {

enum class Method { grid, bayes, exact, surrogate, conditions };

std::string_view to_string(Method m);
std::optional<Method> method_from_string(std::string_view name);

struct GridSettings {
  double lag_min = 0.0;
  std::optional<double> lag_max;  // default 3 E[S]
  std::optional<double> step;     // default (lag_max - lag_min) / 60
  std::size_t n = 100'000;        // jobs per simulated grid point
  std::size_t burn_in = 1000;
};

struct ExperimentSpec {
  std::string id;
  DistributionSpec service = Exponential{1.0};
  DistributionSpec delay = Exponential{0.33};
  RewardSpec reward = ExponentialReward{1.0};
  std::set<Method> methods;
  ParamSchedule schedule = Stationary{};
  std::size_t n = 50'000;
  std::vector<std::uint64_t> seeds{1};
  Reporting reporting = ReportLastK{5000};
  BayesConfig bayes;
  GridSettings grid;
};

void validate(const ExperimentSpec& spec);

/// Lag grid options derived from the experiment's grid settings.
GridSearchOptions grid_options(const ExperimentSpec& spec, Objective objective,
                               std::uint64_t seed);

/// One result row per (experiment, seed). Absent values (method not run or
/// no surrogate for the reward) stay empty.
struct SuiteRow {
  std::string case_id;
  std::uint64_t seed = 0;
  std::optional<double> kappa;
  std::optional<double> g_sur;  // surrogate at its grid-optimal lag
  std::optional<double> g_sim;  // best simulated grid reward
  std::optional<double> g_be;   // Bayesian reward over the reporting window
  std::optional<double> g_tb;   // surrogate at the Bayesian mean lag
  std::optional<double> g_exact;       // best exact-objective grid reward
  std::optional<double> surrogate_lag;  // grid-optimal lag of the surrogate
  std::optional<double> bayes_lag;      // beta / alpha of the final posterior
  std::optional<Verdict> cond1;
  std::optional<Verdict> cond2;
};

std::vector<SuiteRow> run_suite(const std::vector<ExperimentSpec>& specs);

/// CSV `case,seed,kappa,G_sur,G_sim,G_be,G_tb`; absent values are empty fields.
void write_suite_csv(std::ostream& os, const std::vector<SuiteRow>& rows);

enum class ShiftKind { gradual, abrupt };
std::string_view to_string(ShiftKind k);

struct MeanShiftOptions {
  std::size_t width = 2000;   // sliding window
  std::size_t stride = 500;   // report every `stride` jobs
  std::uint64_t seed = 1;
};

struct MeanShiftPoint {
  std::size_t index = 0;
  double service_mean = 0.0;
  double delay_mean = 0.0;
  double g_be = 0.0;   // sliding-window Bayesian reward ending at `index`
  double g_ref = 0.0;  // exact-objective grid optimum at the instantaneous means
};

struct MeanShiftResult {
  std::vector<MeanShiftPoint> points;
  PosteriorState posterior;
};

/// Bayesian run under the experiment's schedule, compared against the
/// per-parameter grid optimum. The schedule must match `kind` (a stationary
/// schedule is accepted for either).
MeanShiftResult mean_shift_run(ShiftKind kind, const ExperimentSpec& base,
                               const MeanShiftOptions& options);

/// Mean of |g_be - g_ref| / g_ref over points whose index lies in
/// (from, to] and at least `settle` jobs after the latest mean switch.
double mean_relative_deviation(const MeanShiftResult& result, const ParamSchedule& schedule,
                               std::size_t from, std::size_t to, std::size_t settle = 0);

/// CSV `index,t_s,t_d,G_be,G_ref`.
void write_mean_shift_csv(std::ostream& os, const MeanShiftResult& result);

}  // namespace qlag
