#include "qlag/gridsearch.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "qlag/analytics.hpp"
#include "qlag/format.hpp"
#include "qlag/parallel.hpp"

namespace qlag {

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::simulated:
      return "simulated";
    case Objective::exact:
      return "exact";
    case Objective::surrogate:
      return "surrogate";
  }
  return "?";
}

GridSearchOptions default_grid(const DistributionSpec& service) {
  GridSearchOptions o;
  o.lag_min = 0.0;
  o.lag_max = 3.0 * mean(service);
  o.step = o.lag_max / 60.0;
  return o;
}

std::vector<double> lag_grid(double lag_min, double lag_max, double step) {
  if (!(lag_min >= 0.0)) throw std::invalid_argument("lag_min must be >= 0");
  if (!(lag_max > lag_min)) throw std::invalid_argument("lag_max must exceed lag_min");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  std::vector<double> lags;
  for (std::size_t i = 0;; ++i) {
    const double lag = lag_min + static_cast<double>(i) * step;
    if (lag > lag_max + 1e-9 * step) break;
    lags.push_back(lag);
  }
  return lags;
}

void select_best(GridResult& result) {
  if (result.grid.empty()) throw std::invalid_argument("empty grid");
  const GridPoint* best = &result.grid.front();
  for (const auto& p : result.grid)
    if (p.reward > best->reward) best = &p;
  result.best_lag = best->lag;
  result.best_reward = best->reward;
}

GridResult optimize(const DistributionSpec& service, const DistributionSpec& delay,
                    const RewardSpec& f, const GridSearchOptions& options) {
  validate(service);
  validate(delay);
  validate(f);
  const auto lags = lag_grid(options.lag_min, options.lag_max, options.step);

  GridResult result;
  result.grid.resize(lags.size());

  switch (options.objective) {
    case Objective::simulated: {
      if (options.n < 10'000) throw std::invalid_argument("simulated grid needs n >= 1e4 jobs");
      if (options.burn_in >= options.n) throw std::invalid_argument("burn-in exceeds n");
      parallel_for(lags.size(), [&](std::size_t i) {
        const auto traj =
            run_fixed_lag(service, delay, lags[i], options.n, options.schedule, options.seed);
        const auto est = estimate_reward(traj, f, WindowAll{options.burn_in});
        result.grid[i] = {lags[i], est.value, est.std_error};
      });
      break;
    }
    case Objective::exact: {
      if (closed_form_reward_available(service, delay, f)) {
        for (std::size_t i = 0; i < lags.size(); ++i)
          result.grid[i] = {lags[i], reward_exact(service, delay, f, lags[i], ClosedForm{}).value,
                            0.0};
      } else {
        const ExactRewardEvaluator evaluator(service, delay, f);
        parallel_for(lags.size(),
                     [&](std::size_t i) { result.grid[i] = {lags[i], evaluator(lags[i]).value, 0.0}; });
      }
      break;
    }
    case Objective::surrogate: {
      const auto* e = std::get_if<ExponentialReward>(&f);
      if (!e) throw std::invalid_argument("surrogate objective requires the exponential reward");
      for (std::size_t i = 0; i < lags.size(); ++i)
        result.grid[i] = {lags[i], surrogate_reward(service, delay, e->kappa, lags[i]), 0.0};
      break;
    }
  }
  select_best(result);
  return result;
}

void write_grid_csv(std::ostream& os, const GridResult& result) {
  os << "lag,reward,std_error\n";
  for (const auto& p : result.grid)
    os << format_number(p.lag) << ',' << format_number(p.reward) << ','
       << format_number(p.std_error) << '\n';
  os << "# best_lag=" << format_number(result.best_lag)
     << ",best_reward=" << format_number(result.best_reward) << '\n';
}

}  // namespace qlag
