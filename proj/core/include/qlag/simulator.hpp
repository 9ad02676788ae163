#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qlag/distributions.hpp"
#include "qlag/reward.hpp"
#include "qlag/rng.hpp"

namespace qlag {

// Two-slot queue under a lag policy: when the waiting job enters service, the
// next job is called after `lag`; it arrives D later. The recursion
//
//   W_j   = max(S_{j-1} - lag - D_j, 0)
//   IAT_j = W_{j-1} + lag + D_j
//
// is exact for this topology, so no event calendar is needed.

enum class ServerState { idle, busy };

std::string_view to_string(ServerState s);

struct JobRecord {
  std::size_t index = 0;  // 1-based
  double service = 0.0;
  double delay = 0.0;
  double wait = 0.0;
  double sojourn = 0.0;
  double iat = 0.0;  // 0 for job 1, which has no predecessor
  ServerState state = ServerState::idle;
  double lag = 0.0;  // lag in force when this job was called
};

/// Busy iff the arriving job has to wait for its predecessor.
ServerState server_state_at_arrival(const JobRecord& job);

struct Stationary {
  // Absent: use the distributions as given.
  std::optional<double> service_mean;
  std::optional<double> delay_mean;
};

/// Means move linearly from start to end over the first `jobs` jobs, then hold.
struct GradualLinear {
  double service_start = 1.0;
  double service_end = 1.0;
  double delay_start = 1.0;
  double delay_end = 1.0;
  std::size_t jobs = 1;
};

struct Segment {
  std::size_t length = 1;
  double service_mean = 1.0;
  double delay_mean = 1.0;
};

struct AbruptPiecewise {
  std::vector<Segment> segments;
};

using ParamSchedule = std::variant<Stationary, GradualLinear, AbruptPiecewise>;

class InvalidScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const ParamSchedule& schedule);
bool is_stationary(const ParamSchedule& schedule);
std::size_t schedule_length(const ParamSchedule& schedule);  // 0 = unbounded

/// (service mean, delay mean) in force for 1-based job `index`; nullopt
/// entries mean "use the law as given".
std::pair<std::optional<double>, std::optional<double>> means_at(const ParamSchedule& schedule,
                                                                 std::size_t index);

/// Generates jobs one at a time. Service and delay draws come from separate
/// substreams of `seed`, so the (S, D) sequence does not depend on the lags
/// applied: runs with different lags share common random numbers.
class QueueStepper {
 public:
  QueueStepper(DistributionSpec service, DistributionSpec delay, ParamSchedule schedule,
               std::uint64_t seed);

  /// Advance by one job called with `lag` (ignored for the first job, which is
  /// called at time 0 into an empty system).
  JobRecord next(double lag);

  std::size_t jobs_emitted() const { return count_; }

 private:
  const DistributionSpec& law_for(std::size_t index, bool service);

  DistributionSpec service_;
  DistributionSpec delay_;
  ParamSchedule schedule_;
  RandomStream service_rng_;
  RandomStream delay_rng_;
  std::size_t count_ = 0;
  double prev_service_ = 0.0;
  double prev_wait_ = 0.0;

  // Rescaled laws cached for the current schedule point.
  std::optional<double> cached_service_mean_;
  std::optional<double> cached_delay_mean_;
  DistributionSpec scaled_service_;
  DistributionSpec scaled_delay_;
};

struct Trajectory {
  std::vector<JobRecord> jobs;
  std::uint64_t seed = 0;
  std::string lag_policy;
};

/// Throws std::invalid_argument for n < 2 or lag < 0, InvalidScheduleError when
/// a piecewise schedule covers fewer than n jobs.
Trajectory run_fixed_lag(const DistributionSpec& service, const DistributionSpec& delay,
                         double lag, std::size_t n, const ParamSchedule& schedule,
                         std::uint64_t seed);

/// Arrival epochs reconstructed from the records (job 1 is called at time 0).
std::vector<double> arrival_times(const Trajectory& traj);

struct WindowAll {
  std::size_t burn_in = 0;  // leading jobs excluded
};
struct WindowLastK {
  std::size_t k = 5000;
};
using RewardWindow = std::variant<WindowAll, WindowLastK>;

struct RewardEstimate {
  double value = 0.0;
  double std_error = 0.0;  // batch-means standard error of the ratio estimator
  std::size_t jobs = 0;
};

class EmptyWindowError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// G-hat = sum f(T_j) / sum IAT_j over the selected jobs.
RewardEstimate estimate_reward(const Trajectory& traj, const RewardSpec& f,
                               const RewardWindow& window);
RewardEstimate estimate_reward(std::span<const JobRecord> jobs, const RewardSpec& f);

struct SlidingPoint {
  std::size_t index = 0;  // last job in the window
  double value = 0.0;
};

/// One estimate per window position, every `stride` jobs.
std::vector<SlidingPoint> sliding_reward(const Trajectory& traj, const RewardSpec& f,
                                         std::size_t width, std::size_t stride = 1);

/// Running sliding-window estimate, O(1) per job.
class SlidingRewardTracker {
 public:
  explicit SlidingRewardTracker(std::size_t width);
  void push(double reward, double iat);
  bool full() const { return filled_ == width_; }
  /// NaN until the window holds `width` jobs.
  double value() const;

 private:
  std::size_t width_;
  std::vector<double> rewards_;
  std::vector<double> iats_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  double reward_sum_ = 0.0;
  double iat_sum_ = 0.0;
};

/// CSV with header `index,service,delay,wait,sojourn,iat,state`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace qlag
