#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "qlag/distributions.hpp"
#include "qlag/reward.hpp"
#include "qlag/rng.hpp"
#include "qlag/simulator.hpp"

namespace qlag {

// Conjugate Gamma-Exponential learning of the lag. The lag is modelled as
// Exp(theta) with theta ~ Gamma(alpha, beta) (shape, rate); each job uses
// lag = 1 / theta_hat for a fresh posterior draw, and the posterior moves only
// when two consecutive jobs see the same server state.

struct PosteriorState {
  double alpha = 1.0;
  double beta = 1.0;
  std::uint64_t updates_applied = 0;

  double mean_rate() const { return alpha / beta; }
  /// Lag implied by the posterior mean rate, beta / alpha.
  double mean_lag() const { return beta / alpha; }
};

struct BayesConfig {
  double alpha0 = 1.0;
  double beta0 = 1.0;
  double eps_idle = 3.0;
  double eps_busy = 1.0;
};

void validate(const BayesConfig& cfg);
PosteriorState initial_posterior(const BayesConfig& cfg);

/// 1 / theta_hat with theta_hat ~ Gamma(alpha, beta).
double draw_lag(const PosteriorState& post, RandomStream& rng);

/// First job (no previous state): beta += lag, alpha += eps for the current
/// state. Afterwards idle->idle adds eps_idle, busy->busy adds eps_busy (and
/// lag to beta); a state change leaves the posterior untouched.
PosteriorState update(PosteriorState post, double lag_sample, ServerState now,
                      std::optional<ServerState> prev, const BayesConfig& cfg);

struct ReportLastK {
  std::size_t k = 5000;
};
struct ReportSliding {
  std::size_t width = 2000;
  std::size_t stride = 1;
};
using Reporting = std::variant<ReportLastK, ReportSliding>;

struct BayesLogEntry {
  std::size_t index = 0;
  double lag_drawn = 0.0;
  double alpha = 0.0;  // after the update for this job
  double beta = 0.0;
  ServerState state = ServerState::idle;
  double reward_window = 0.0;  // NaN until the reporting window is full
};

struct AdaptiveResult {
  Trajectory trajectory;
  PosteriorState posterior;
  std::vector<BayesLogEntry> log;
  /// Last-k estimate for ReportLastK; for ReportSliding the final window.
  RewardEstimate reward;
  /// Sliding series (ReportSliding only).
  std::vector<SlidingPoint> series;
};

/// Runs the adaptive job loop: draw a lag, simulate one job with it, classify
/// the server state seen on arrival, update. Deterministic per seed.
AdaptiveResult run_adaptive(const DistributionSpec& service, const DistributionSpec& delay,
                            const ParamSchedule& schedule, const RewardSpec& f, std::size_t n,
                            const BayesConfig& cfg, std::uint64_t seed,
                            const Reporting& reporting);

/// CSV `index,lag_drawn,alpha,beta,state,reward_window`; empty reward_window
/// until the window is full.
void write_bayes_log_csv(std::ostream& os, const std::vector<BayesLogEntry>& log);

}  // namespace qlag
