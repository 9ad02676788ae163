#include "qlag/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qlag/format.hpp"

namespace qlag {

std::string_view to_string(ServerState s) { return s == ServerState::busy ? "busy" : "idle"; }

ServerState server_state_at_arrival(const JobRecord& job) {
  return job.wait > 0.0 ? ServerState::busy : ServerState::idle;
}

void validate(const ParamSchedule& schedule) {
  if (const auto* s = std::get_if<Stationary>(&schedule)) {
    if ((s->service_mean && !(*s->service_mean > 0.0)) ||
        (s->delay_mean && !(*s->delay_mean > 0.0)))
      throw InvalidScheduleError("stationary means must be positive");
  } else if (const auto* g = std::get_if<GradualLinear>(&schedule)) {
    if (!(g->service_start > 0.0 && g->service_end > 0.0 && g->delay_start > 0.0 &&
          g->delay_end > 0.0))
      throw InvalidScheduleError("gradual schedule means must be positive");
    if (g->jobs < 1) throw InvalidScheduleError("gradual schedule needs at least one job");
  } else {
    const auto& a = std::get<AbruptPiecewise>(schedule);
    if (a.segments.empty()) throw InvalidScheduleError("piecewise schedule has no segments");
    for (const auto& seg : a.segments) {
      if (seg.length < 1) throw InvalidScheduleError("segment lengths must be positive");
      if (!(seg.service_mean > 0.0 && seg.delay_mean > 0.0))
        throw InvalidScheduleError("segment means must be positive");
    }
  }
}

bool is_stationary(const ParamSchedule& schedule) {
  return std::holds_alternative<Stationary>(schedule);
}

std::size_t schedule_length(const ParamSchedule& schedule) {
  if (const auto* a = std::get_if<AbruptPiecewise>(&schedule)) {
    std::size_t total = 0;
    for (const auto& seg : a->segments) total += seg.length;
    return total;
  }
  return 0;
}

std::pair<std::optional<double>, std::optional<double>> means_at(const ParamSchedule& schedule,
                                                                 std::size_t index) {
  if (const auto* s = std::get_if<Stationary>(&schedule)) return {s->service_mean, s->delay_mean};
  if (const auto* g = std::get_if<GradualLinear>(&schedule)) {
    const double frac =
        g->jobs <= 1 ? 1.0
                     : std::min(1.0, static_cast<double>(index - 1) /
                                         static_cast<double>(g->jobs - 1));
    return {g->service_start + frac * (g->service_end - g->service_start),
            g->delay_start + frac * (g->delay_end - g->delay_start)};
  }
  const auto& a = std::get<AbruptPiecewise>(schedule);
  std::size_t end = 0;
  for (const auto& seg : a.segments) {
    end += seg.length;
    if (index <= end) return {seg.service_mean, seg.delay_mean};
  }
  throw InvalidScheduleError("job index " + std::to_string(index) +
                             " lies beyond the piecewise schedule");
}

QueueStepper::QueueStepper(DistributionSpec service, DistributionSpec delay,
                           ParamSchedule schedule, std::uint64_t seed)
    : service_(std::move(service)),
      delay_(std::move(delay)),
      schedule_(std::move(schedule)),
      service_rng_(RandomStream::derive(seed, "service")),
      delay_rng_(RandomStream::derive(seed, "delay")),
      scaled_service_(service_),
      scaled_delay_(delay_) {
  validate(service_);
  validate(delay_);
  validate(schedule_);
}

const DistributionSpec& QueueStepper::law_for(std::size_t index, bool service) {
  const auto [service_mean, delay_mean] = means_at(schedule_, index);
  if (service) {
    if (!service_mean) return service_;
    if (cached_service_mean_ != service_mean) {
      scaled_service_ = with_mean(service_, *service_mean);
      cached_service_mean_ = service_mean;
    }
    return scaled_service_;
  }
  if (!delay_mean) return delay_;
  if (cached_delay_mean_ != delay_mean) {
    scaled_delay_ = with_mean(delay_, *delay_mean);
    cached_delay_mean_ = delay_mean;
  }
  return scaled_delay_;
}

JobRecord QueueStepper::next(double lag) {
  const std::size_t index = ++count_;
  JobRecord job;
  job.index = index;
  job.service = sample(law_for(index, true), service_rng_);
  job.delay = sample(law_for(index, false), delay_rng_);
  if (index == 1) {
    job.lag = 0.0;
    job.wait = 0.0;
    job.iat = 0.0;
  } else {
    job.lag = lag;
    job.wait = std::max(prev_service_ - lag - job.delay, 0.0);
    job.iat = prev_wait_ + lag + job.delay;
  }
  job.sojourn = job.wait + job.service;
  job.state = server_state_at_arrival(job);
  prev_service_ = job.service;
  prev_wait_ = job.wait;
  return job;
}

Trajectory run_fixed_lag(const DistributionSpec& service, const DistributionSpec& delay,
                         double lag, std::size_t n, const ParamSchedule& schedule,
                         std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("trajectory needs at least 2 jobs");
  if (!(lag >= 0.0) || !std::isfinite(lag)) throw std::invalid_argument("lag must be >= 0");
  validate(schedule);
  const std::size_t covered = schedule_length(schedule);
  if (covered != 0 && covered < n)
    throw InvalidScheduleError("piecewise schedule covers " + std::to_string(covered) +
                               " jobs but " + std::to_string(n) + " were requested");

  QueueStepper stepper(service, delay, schedule, seed);
  Trajectory traj;
  traj.seed = seed;
  traj.lag_policy = "fixed lag " + format_number(lag);
  traj.jobs.reserve(n);
  for (std::size_t j = 0; j < n; ++j) traj.jobs.push_back(stepper.next(lag));
  return traj;
}

std::vector<double> arrival_times(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.jobs.size());
  double t = 0.0;
  for (const auto& job : traj.jobs) {
    t += job.index == 1 ? job.delay : job.iat;
    out.push_back(t);
  }
  return out;
}

RewardEstimate estimate_reward(std::span<const JobRecord> jobs, const RewardSpec& f) {
  if (jobs.empty()) throw EmptyWindowError("reward window selects no jobs");
  double reward_sum = 0.0;
  double iat_sum = 0.0;
  for (const auto& job : jobs) {
    reward_sum += eval(f, job.sojourn);
    iat_sum += job.iat;
  }
  if (!(iat_sum > 0.0)) throw EmptyWindowError("reward window spans zero elapsed time");

  RewardEstimate out;
  out.jobs = jobs.size();
  out.value = reward_sum / iat_sum;

  // Batch means on the residuals f(T_j) - G * IAT_j. W_j only depends on
  // S_{j-1} and D_j, so contiguous batches are nearly independent.
  const std::size_t m = jobs.size();
  const std::size_t batches = std::min<std::size_t>(50, m);
  if (batches < 2) {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * m / batches;
    const std::size_t hi = (b + 1) * m / batches;
    double resid = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      resid += eval(f, jobs[i].sojourn) - out.value * jobs[i].iat;
    const double batch_mean = resid / static_cast<double>(hi - lo);
    sum += batch_mean;
    sum_sq += batch_mean * batch_mean;
  }
  const double bm = static_cast<double>(batches);
  const double var = std::max(0.0, (sum_sq - sum * sum / bm) / (bm - 1.0));
  const double mean_iat = iat_sum / static_cast<double>(m);
  out.std_error = std::sqrt(var / bm) / mean_iat;
  return out;
}

RewardEstimate estimate_reward(const Trajectory& traj, const RewardSpec& f,
                               const RewardWindow& window) {
  std::span<const JobRecord> all(traj.jobs);
  if (const auto* w = std::get_if<WindowAll>(&window)) {
    if (w->burn_in >= all.size())
      throw EmptyWindowError("burn-in covers the whole trajectory");
    return estimate_reward(all.subspan(w->burn_in), f);
  }
  const auto k = std::get<WindowLastK>(window).k;
  if (k == 0) throw EmptyWindowError("last-k window with k = 0");
  if (k > all.size()) throw EmptyWindowError("last-k window longer than the trajectory");
  return estimate_reward(all.subspan(all.size() - k), f);
}

std::vector<SlidingPoint> sliding_reward(const Trajectory& traj, const RewardSpec& f,
                                         std::size_t width, std::size_t stride) {
  if (width == 0 || width > traj.jobs.size())
    throw EmptyWindowError("sliding window width must lie in [1, trajectory length]");
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  SlidingRewardTracker tracker(width);
  std::vector<SlidingPoint> out;
  for (const auto& job : traj.jobs) {
    tracker.push(eval(f, job.sojourn), job.iat);
    if (tracker.full() && (job.index - width) % stride == 0)
      out.push_back({job.index, tracker.value()});
  }
  return out;
}

SlidingRewardTracker::SlidingRewardTracker(std::size_t width)
    : width_(width), rewards_(width, 0.0), iats_(width, 0.0) {
  if (width == 0) throw EmptyWindowError("sliding window width must be positive");
}

void SlidingRewardTracker::push(double reward, double iat) {
  reward_sum_ += reward - rewards_[head_];
  iat_sum_ += iat - iats_[head_];
  rewards_[head_] = reward;
  iats_[head_] = iat;
  head_ = (head_ + 1) % width_;
  filled_ = std::min(filled_ + 1, width_);
  if (head_ == 0) {
    // Resum once per lap so cancellation error cannot accumulate.
    reward_sum_ = 0.0;
    iat_sum_ = 0.0;
    for (std::size_t i = 0; i < width_; ++i) {
      reward_sum_ += rewards_[i];
      iat_sum_ += iats_[i];
    }
  }
}

double SlidingRewardTracker::value() const {
  if (!full() || !(iat_sum_ > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return reward_sum_ / iat_sum_;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "index,service,delay,wait,sojourn,iat,state\n";
  for (const auto& j : traj.jobs) {
    os << j.index << ',' << format_number(j.service) << ',' << format_number(j.delay) << ','
       << format_number(j.wait) << ',' << format_number(j.sojourn) << ','
       << format_number(j.iat) << ',' << to_string(j.state) << '\n';
  }
}

}  // namespace qlag
