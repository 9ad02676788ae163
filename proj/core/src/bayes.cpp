#include "qlag/bayes.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/random/gamma_distribution.hpp>

#include "qlag/format.hpp"

namespace qlag {

void validate(const BayesConfig& cfg) {
  if (!(cfg.alpha0 > 0.0) || !(cfg.beta0 > 0.0))
    throw std::invalid_argument("prior alpha0 and beta0 must be positive");
  if (!(cfg.eps_idle >= 0.0) || !(cfg.eps_busy >= 0.0))
    throw std::invalid_argument("eps_idle and eps_busy must be >= 0");
}

PosteriorState initial_posterior(const BayesConfig& cfg) {
  validate(cfg);
  return {cfg.alpha0, cfg.beta0, 0};
}

double draw_lag(const PosteriorState& post, RandomStream& rng) {
  if (!std::isfinite(post.alpha) || !std::isfinite(post.beta) || !(post.alpha > 0.0) ||
      !(post.beta > 0.0))
    throw std::domain_error("posterior parameters must be positive and finite");
  boost::random::gamma_distribution<double> gamma(post.alpha, 1.0 / post.beta);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double theta = gamma(rng);
    if (theta > 0.0 && std::isfinite(1.0 / theta)) return 1.0 / theta;
  }
  throw std::domain_error("posterior rate underflows: lag draw is not finite");
}

PosteriorState update(PosteriorState post, double lag_sample, ServerState now,
                      std::optional<ServerState> prev, const BayesConfig& cfg) {
  if (prev && *prev != now) return post;
  post.alpha += now == ServerState::idle ? cfg.eps_idle : cfg.eps_busy;
  post.beta += lag_sample;
  ++post.updates_applied;
  return post;
}

AdaptiveResult run_adaptive(const DistributionSpec& service, const DistributionSpec& delay,
                            const ParamSchedule& schedule, const RewardSpec& f, std::size_t n,
                            const BayesConfig& cfg, std::uint64_t seed,
                            const Reporting& reporting) {
  validate(f);
  const std::size_t width = std::holds_alternative<ReportLastK>(reporting)
                                ? std::get<ReportLastK>(reporting).k
                                : std::get<ReportSliding>(reporting).width;
  if (width == 0 || n < width) throw std::invalid_argument("n must cover the reporting window");
  if (n < 2) throw std::invalid_argument("adaptive run needs at least 2 jobs");
  validate(schedule);
  const std::size_t covered = schedule_length(schedule);
  if (covered != 0 && covered < n)
    throw InvalidScheduleError("piecewise schedule covers " + std::to_string(covered) +
                               " jobs but " + std::to_string(n) + " were requested");

  QueueStepper stepper(service, delay, schedule, seed);
  RandomStream lag_rng = RandomStream::derive(seed, "posterior");
  SlidingRewardTracker tracker(width);

  AdaptiveResult out;
  out.posterior = initial_posterior(cfg);
  out.trajectory.seed = seed;
  out.trajectory.lag_policy = "bayesian gamma-exponential";
  out.trajectory.jobs.reserve(n);
  out.log.reserve(n);

  std::optional<ServerState> prev;
  for (std::size_t j = 0; j < n; ++j) {
    const double lag = draw_lag(out.posterior, lag_rng);
    const JobRecord job = stepper.next(lag);
    out.posterior = update(out.posterior, lag, job.state, prev, cfg);
    prev = job.state;
    tracker.push(eval(f, job.sojourn), job.iat);
    out.log.push_back({job.index, lag, out.posterior.alpha, out.posterior.beta, job.state,
                       tracker.value()});
    out.trajectory.jobs.push_back(job);
  }

  std::span<const JobRecord> jobs(out.trajectory.jobs);
  out.reward = estimate_reward(jobs.subspan(n - width), f);
  if (const auto* s = std::get_if<ReportSliding>(&reporting))
    out.series = sliding_reward(out.trajectory, f, s->width, s->stride);
  return out;
}

void write_bayes_log_csv(std::ostream& os, const std::vector<BayesLogEntry>& log) {
  os << "index,lag_drawn,alpha,beta,state,reward_window\n";
  for (const auto& e : log) {
    os << e.index << ',' << format_number(e.lag_drawn) << ',' << format_number(e.alpha) << ','
       << format_number(e.beta) << ',' << to_string(e.state) << ',';
    if (std::isfinite(e.reward_window)) os << format_number(e.reward_window);
    os << '\n';
  }
}

}  // namespace qlag
