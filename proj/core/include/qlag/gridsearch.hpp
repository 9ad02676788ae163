#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "qlag/distributions.hpp"
#include "qlag/reward.hpp"
#include "qlag/simulator.hpp"

namespace qlag {

enum class Objective { simulated, exact, surrogate };

std::string_view to_string(Objective o);

struct GridPoint {
  double lag = 0.0;
  double reward = 0.0;
  double std_error = 0.0;
};

struct GridResult {
  std::vector<GridPoint> grid;
  double best_lag = 0.0;     // smallest lag attaining the maximum
  double best_reward = 0.0;
};

struct GridSearchOptions {
  double lag_min = 0.0;
  double lag_max = 3.0;
  double step = 0.05;
  std::size_t n = 1'000'000;  // jobs per point, simulated objective only
  std::uint64_t seed = 0;
  Objective objective = Objective::simulated;
  std::size_t burn_in = 1000;
  ParamSchedule schedule = Stationary{};
};

/// Default lag range [0, 3 E[S]] in 61 points.
GridSearchOptions default_grid(const DistributionSpec& service);

/// Lags lag_min + i * step up to lag_max (inclusive within 1e-9 step).
std::vector<double> lag_grid(double lag_min, double lag_max, double step);

/// Sweep the lag grid. The simulated objective reruns the same (S, D) draws at
/// every lag (common random numbers) and drops `burn_in` jobs per point; the
/// exact objective uses the closed form when one exists and quadrature
/// otherwise; the surrogate objective needs f = exp(-kappa T) and a finite
/// M_D(kappa). Points evaluate in parallel and merge in lag order.
GridResult optimize(const DistributionSpec& service, const DistributionSpec& delay,
                    const RewardSpec& f, const GridSearchOptions& options);

/// Picks best_lag / best_reward from a filled grid (ties go to the smallest lag).
void select_best(GridResult& result);

/// CSV `lag,reward,std_error` followed by `# best_lag=...,best_reward=...`.
void write_grid_csv(std::ostream& os, const GridResult& result);

}  // namespace qlag
