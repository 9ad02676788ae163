#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qlag/bayes.hpp"
#include "qlag/distributions.hpp"
#include "qlag/reward.hpp"
#include "qlag/scenarios.hpp"
#include "qlag/simulator.hpp"

namespace qlag {

/// Invalid configuration value; `field()` is the dotted path, e.g. `service.mean`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using nlohmann::json;

std::string join_path(std::string_view parent, std::string_view key);

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         std::string_view path);

double get_number(const json& j, std::string_view key, std::string_view path);
double get_number(const json& j, std::string_view key, std::string_view path, double fallback);
std::size_t get_count(const json& j, std::string_view key, std::string_view path);
std::size_t get_count(const json& j, std::string_view key, std::string_view path,
                      std::size_t fallback);
std::uint64_t get_seed(const json& j, std::string_view key, std::string_view path,
                       std::uint64_t fallback);
std::string get_string(const json& j, std::string_view key, std::string_view path);

// Distribution literals:
//   {"kind": "exponential", "mean": m}
//   {"kind": "uniform", "lower": a, "upper": b}
//   {"kind": "truncnorm", "mu": m, "sigma": s, "lower": a, "upper": b}
//   {"kind": "deterministic", "value": v}
DistributionSpec parse_distribution(const json& j, std::string_view path);
json to_json(const DistributionSpec& spec);

// {"kind": "exp", "kappa": k} or {"kind": "poly", "gamma": g}
RewardSpec parse_reward(const json& j, std::string_view path);
json to_json(const RewardSpec& spec);

// {"kind": "stationary"[, "service_mean", "delay_mean"]}
// {"kind": "gradual", "service_start", "service_end", "delay_start", "delay_end", "jobs"}
// {"kind": "abrupt", "segments": [{"length", "service_mean", "delay_mean"}, ...]}
ParamSchedule parse_schedule(const json& j, std::string_view path);
json to_json(const ParamSchedule& schedule);

// {"kind": "last_k", "k": 5000} or {"kind": "sliding", "width": 2000, "stride": 1}
Reporting parse_reporting(const json& j, std::string_view path);
json to_json(const Reporting& reporting);

// {"alpha0", "beta0", "eps_idle", "eps_busy"}, all optional.
BayesConfig parse_bayes_config(const json& j, std::string_view path);
json to_json(const BayesConfig& cfg);

// Posterior checkpoint {"alpha", "beta", "updates_applied"}.
PosteriorState parse_posterior(const json& j, std::string_view path);
json to_json(const PosteriorState& post);

// {"lag_min", "lag_max", "step", "n", "burn_in"}, all optional.
GridSettings parse_grid_settings(const json& j, std::string_view path);

ExperimentSpec parse_experiment(const json& j, std::string_view path);
json to_json(const ExperimentSpec& spec);

/// `{"experiments": [...]}` with an optional `"kappa_sweep": [..]` that clones
/// every exponential-reward experiment once per kappa (ids suffixed `@k=`).
std::vector<ExperimentSpec> parse_suite(const json& j);

/// Sets `j[a][b]...` for the dotted key `a.b...`; the value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(json& j, std::string_view dotted_key, std::string_view value);

json read_json_file(const std::string& path);

}  // namespace qlag
