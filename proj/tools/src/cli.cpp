#include "qlag/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "qlag/analytics.hpp"
#include "qlag/bayes.hpp"
#include "qlag/conditions.hpp"
#include "qlag/format.hpp"
#include "qlag/gridsearch.hpp"
#include "qlag/io.hpp"
#include "qlag/scenarios.hpp"
#include "qlag/simulator.hpp"

namespace qlag::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<SchemaKey> kSchema = {
    {"simulate", "service", "distribution", "", "service-time law"},
    {"simulate", "delay", "distribution", "", "delay law"},
    {"simulate", "reward", "reward", "{\"kind\":\"exp\",\"kappa\":1}", "reward function f(T)"},
    {"simulate", "lag", "number", "0", "fixed lag between service start and the next call"},
    {"simulate", "n", "integer", "100000", "jobs to simulate"},
    {"simulate", "schedule", "schedule", "{\"kind\":\"stationary\"}", "mean schedule"},
    {"simulate", "burn_in", "integer", "1000", "jobs dropped before estimating the reward"},
    {"simulate", "seed", "integer", "1", "root seed"},

    {"grid-search", "service", "distribution", "", "service-time law"},
    {"grid-search", "delay", "distribution", "", "delay law"},
    {"grid-search", "reward", "reward", "{\"kind\":\"exp\",\"kappa\":1}", "reward function f(T)"},
    {"grid-search", "objective", "string", "simulated", "simulated | exact | surrogate"},
    {"grid-search", "lag_min", "number", "0", "first lag of the grid"},
    {"grid-search", "lag_max", "number", "3*E[S]", "last lag of the grid"},
    {"grid-search", "step", "number", "E[S]/20", "grid spacing"},
    {"grid-search", "n", "integer", "100000", "jobs per lag (simulated objective)"},
    {"grid-search", "burn_in", "integer", "1000", "jobs dropped per lag (simulated objective)"},
    {"grid-search", "schedule", "schedule", "{\"kind\":\"stationary\"}", "mean schedule"},
    {"grid-search", "seed", "integer", "1", "root seed (shared by every lag)"},

    {"bayes", "service", "distribution", "", "service-time law"},
    {"bayes", "delay", "distribution", "", "delay law"},
    {"bayes", "reward", "reward", "{\"kind\":\"exp\",\"kappa\":1}", "reward function f(T)"},
    {"bayes", "n", "integer", "50000", "jobs to simulate"},
    {"bayes", "schedule", "schedule", "{\"kind\":\"stationary\"}", "mean schedule"},
    {"bayes", "bayes", "object", "{\"alpha0\":1,\"beta0\":1,\"eps_idle\":3,\"eps_busy\":1}",
     "prior and update increments"},
    {"bayes", "reporting", "reporting", "{\"kind\":\"last_k\",\"k\":5000}", "reward window"},
    {"bayes", "log", "boolean", "true", "write the per-job posterior log"},
    {"bayes", "seed", "integer", "1", "root seed"},

    {"check-conditions", "service", "distribution", "", "service-time law"},
    {"check-conditions", "delay", "distribution", "", "delay law"},
    {"check-conditions", "reward", "reward", "{\"kind\":\"exp\",\"kappa\":1}",
     "reward function f(T)"},
    {"check-conditions", "conditions", "array", "[\"thm2\"]",
     "any of thm1 (general), cor1 (exp reward), cor2 (poly reward), thm2 (surrogate)"},

    {"region-scan", "kappa", "number", "1", "exponential reward rate"},
    {"region-scan", "mode", "string", "thm2_cond1", "thm2_cond1 | cor1"},
    {"region-scan", "service_family", "string", "exponential", "exponential | uniform"},
    {"region-scan", "delay_family", "string", "exponential", "exponential | uniform"},
    {"region-scan", "service_means", "range", "{\"min\":0.04,\"max\":2,\"points\":50}",
     "array of means or linear range"},
    {"region-scan", "delay_means", "range", "{\"min\":0.04,\"max\":2,\"points\":50}",
     "array of means or linear range"},

    {"mean-shift", "kind", "string", "", "gradual | abrupt"},
    {"mean-shift", "service", "distribution", "", "service-time law (shape; mean follows the schedule)"},
    {"mean-shift", "delay", "distribution", "", "delay law (shape; mean follows the schedule)"},
    {"mean-shift", "reward", "reward", "{\"kind\":\"exp\",\"kappa\":1}", "reward function f(T)"},
    {"mean-shift", "schedule", "schedule", "", "gradual or abrupt mean schedule"},
    {"mean-shift", "n", "integer", "50000", "jobs to simulate"},
    {"mean-shift", "bayes", "object", "{\"alpha0\":1,\"beta0\":1,\"eps_idle\":3,\"eps_busy\":1}",
     "prior and update increments"},
    {"mean-shift", "width", "integer", "2000", "sliding reward window"},
    {"mean-shift", "stride", "integer", "500", "jobs between reported windows"},
    {"mean-shift", "seed", "integer", "1", "root seed"},

    {"suite", "experiments", "array", "", "experiment objects (see below)"},
    {"suite", "kappa_sweep", "array", "", "optional kappa values; clones exp-reward experiments"},
};

constexpr std::string_view kLiterals = R"(Literals:
  distribution  {"kind":"exponential","mean":m} | {"kind":"uniform","lower":a,"upper":b}
                {"kind":"truncnorm","mu":m,"sigma":s,"lower":a,"upper":b}
                {"kind":"deterministic","value":v}
  reward        {"kind":"exp","kappa":k} | {"kind":"poly","gamma":g}
  schedule      {"kind":"stationary"} | {"kind":"gradual","service_start","service_end",
                "delay_start","delay_end","jobs"} | {"kind":"abrupt","segments":
                [{"length","service_mean","delay_mean"},...]}
  reporting     {"kind":"last_k","k"} | {"kind":"sliding","width","stride"}
  experiment    id, service, delay, reward, methods (grid|bayes|exact|surrogate|conditions),
                schedule, n, seeds, reporting, bayes, grid {lag_min,lag_max,step,n,burn_in}
)";

std::string command_help(std::string_view command) {
  std::ostringstream os;
  os << "Config keys (--config file or --set key=value):\n";
  for (const auto& k : kSchema) {
    if (k.command != command) continue;
    os << "  " << k.key << " (" << k.type << ")";
    if (k.default_value.empty())
      os << " [required]";
    else
      os << " [default " << k.default_value << "]";
    os << "\n      " << k.description << "\n";
  }
  os << kLiterals;
  return os.str();
}

const json* find(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

const json& required(const json& j, std::string_view key) {
  const json* v = find(j, key);
  if (!v) throw ConfigError(std::string(key), "missing required field");
  return *v;
}

RewardSpec reward_or_default(const json& config) {
  if (const json* r = find(config, "reward")) return parse_reward(*r, "reward");
  return ExponentialReward{1.0};
}

ParamSchedule schedule_or_default(const json& config) {
  if (const json* s = find(config, "schedule")) return parse_schedule(*s, "schedule");
  return Stationary{};
}

std::string pick(const json& config, std::string_view key, std::string_view fallback,
                 const std::vector<std::string_view>& allowed) {
  const std::string value = find(config, key) ? get_string(config, key, "") : std::string(fallback);
  if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
    std::string options;
    for (const auto a : allowed) options += (options.empty() ? "" : ", ") + std::string(a);
    throw ConfigError(std::string(key), "unknown value '" + value + "' (expected " + options + ")");
  }
  return value;
}

json number_or_text(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <class F>
std::string to_csv(F&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

void check_schedule_covers(const ParamSchedule& schedule, std::size_t n, std::string_view key) {
  const auto covered = schedule_length(schedule);
  if (covered != 0 && covered < n)
    throw ConfigError(std::string(key), "piecewise schedule covers " + std::to_string(covered) +
                                            " jobs but n = " + std::to_string(n));
}

CommandResult cmd_simulate(const json& config) {
  const auto service = parse_distribution(required(config, "service"), "service");
  const auto delay = parse_distribution(required(config, "delay"), "delay");
  const auto reward = reward_or_default(config);
  const double lag = get_number(config, "lag", "", 0.0);
  if (!(lag >= 0.0)) throw ConfigError("lag", "must be >= 0");
  const auto n = get_count(config, "n", "", 100'000);
  if (n < 2) throw ConfigError("n", "must be at least 2");
  const auto burn_in = get_count(config, "burn_in", "", 1000);
  if (burn_in >= n) throw ConfigError("burn_in", "must be smaller than n");
  const auto schedule = schedule_or_default(config);
  check_schedule_covers(schedule, n, "schedule");
  const auto seed = get_seed(config, "seed", "", 1);

  const auto traj = run_fixed_lag(service, delay, lag, n, schedule, seed);
  const auto est = estimate_reward(traj, reward, WindowAll{burn_in});
  double wait = 0.0, sojourn = 0.0, busy = 0.0;
  for (const auto& j : traj.jobs) {
    wait += j.wait;
    sojourn += j.sojourn;
    busy += j.state == ServerState::busy ? 1.0 : 0.0;
  }
  const double count = static_cast<double>(n);
  CommandResult out;
  out.files["trajectory.csv"] = to_csv([&](std::ostream& os) { write_trajectory_csv(os, traj); });
  out.files["summary.json"] = dump({{"reward", est.value},
                                    {"std_error", est.std_error},
                                    {"jobs_in_window", est.jobs},
                                    {"mean_wait", wait / count},
                                    {"mean_sojourn", sojourn / count},
                                    {"busy_fraction", busy / count}});
  return out;
}

CommandResult cmd_grid_search(const json& config) {
  const auto service = parse_distribution(required(config, "service"), "service");
  const auto delay = parse_distribution(required(config, "delay"), "delay");
  const auto reward = reward_or_default(config);
  const auto objective = pick(config, "objective", "simulated", {"simulated", "exact", "surrogate"});
  auto opts = default_grid(service);
  opts.objective = objective == "simulated" ? Objective::simulated
                   : objective == "exact"   ? Objective::exact
                                            : Objective::surrogate;
  opts.lag_min = get_number(config, "lag_min", "", opts.lag_min);
  opts.lag_max = get_number(config, "lag_max", "", opts.lag_max);
  opts.step = get_number(config, "step", "", opts.step);
  opts.n = get_count(config, "n", "", 100'000);
  opts.burn_in = get_count(config, "burn_in", "", opts.burn_in);
  opts.schedule = schedule_or_default(config);
  opts.seed = get_seed(config, "seed", "", 1);
  if (opts.lag_min < 0.0) throw ConfigError("lag_min", "must be >= 0");
  if (opts.lag_max < opts.lag_min) throw ConfigError("lag_max", "must be >= lag_min");
  if (!(opts.step > 0.0)) throw ConfigError("step", "must be positive");
  if (opts.objective == Objective::simulated) {
    if (opts.n < 10'000) throw ConfigError("n", "simulated objective needs n >= 10000");
    if (opts.burn_in >= opts.n) throw ConfigError("burn_in", "must be smaller than n");
    check_schedule_covers(opts.schedule, opts.n, "schedule");
  }
  if (opts.objective == Objective::surrogate && !std::holds_alternative<ExponentialReward>(reward))
    throw ConfigError("objective", "surrogate objective needs an exp reward");

  const auto result = optimize(service, delay, reward, opts);
  CommandResult out;
  out.files["grid.csv"] = to_csv([&](std::ostream& os) { write_grid_csv(os, result); });
  return out;
}

CommandResult cmd_bayes(const json& config) {
  const auto service = parse_distribution(required(config, "service"), "service");
  const auto delay = parse_distribution(required(config, "delay"), "delay");
  const auto reward = reward_or_default(config);
  const auto n = get_count(config, "n", "", 50'000);
  if (n < 2) throw ConfigError("n", "must be at least 2");
  const auto schedule = schedule_or_default(config);
  check_schedule_covers(schedule, n, "schedule");
  const auto cfg = find(config, "bayes") ? parse_bayes_config(config["bayes"], "bayes") : BayesConfig{};
  const Reporting reporting =
      find(config, "reporting") ? parse_reporting(config["reporting"], "reporting") : ReportLastK{};
  if (const auto* r = std::get_if<ReportLastK>(&reporting); r && r->k > n)
    throw ConfigError("reporting.k", "must not exceed n");
  if (const auto* r = std::get_if<ReportSliding>(&reporting); r && r->width > n)
    throw ConfigError("reporting.width", "must not exceed n");
  bool log = true;
  if (const json* l = find(config, "log")) {
    if (!l->is_boolean()) throw ConfigError("log", "expected a boolean");
    log = l->get<bool>();
  }
  const auto seed = get_seed(config, "seed", "", 1);

  const auto res = run_adaptive(service, delay, schedule, reward, n, cfg, seed, reporting);
  CommandResult out;
  if (log)
    out.files["bayes_log.csv"] = to_csv([&](std::ostream& os) { write_bayes_log_csv(os, res.log); });
  if (!res.series.empty())
    out.files["series.csv"] = to_csv([&](std::ostream& os) {
      os << "index,reward\n";
      for (const auto& p : res.series) os << p.index << ',' << format_number(p.value) << '\n';
    });
  out.files["posterior.json"] = dump(to_json(res.posterior));
  out.files["summary.json"] = dump({{"reward", res.reward.value},
                                    {"std_error", number_or_text(res.reward.std_error)},
                                    {"jobs_in_window", res.reward.jobs},
                                    {"mean_lag", res.posterior.mean_lag()}});
  return out;
}

json report_json(const ConditionReport& r) {
  return {{"condition_id", std::string(to_string(r.condition_id))},
          {"lhs", number_or_text(r.lhs)},
          {"rhs", number_or_text(r.rhs)},
          {"comparison", std::string(to_string(r.comparison))},
          {"verdict", std::string(to_string(r.verdict))},
          {"assumption_checked", r.assumption_checked},
          {"notes", r.notes}};
}

CommandResult cmd_check_conditions(const json& config) {
  const auto service = parse_distribution(required(config, "service"), "service");
  const auto delay = parse_distribution(required(config, "delay"), "delay");
  const auto reward = reward_or_default(config);
  std::vector<std::string> wanted{"thm2"};
  if (const json* c = find(config, "conditions")) {
    if (!c->is_array() || c->empty())
      throw ConfigError("conditions", "expected a non-empty array");
    wanted.clear();
    for (const auto& v : *c) {
      const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
      if (name != "thm1" && name != "cor1" && name != "cor2" && name != "thm2")
        throw ConfigError("conditions", "unknown condition '" + name +
                                            "' (expected thm1, cor1, cor2, thm2)");
      wanted.push_back(name);
    }
  }
  const auto* exp_reward = std::get_if<ExponentialReward>(&reward);
  const auto* poly_reward = std::get_if<PolynomialReward>(&reward);
  std::vector<ConditionReport> reports;
  for (const auto& name : wanted) {
    if (name == "thm1") {
      reports.push_back(check_general(service, delay, reward));
    } else if (name == "cor1") {
      if (!exp_reward) throw ConfigError("conditions", "cor1 needs an exp reward");
      reports.push_back(check_exponential(service, delay, exp_reward->kappa));
    } else if (name == "cor2") {
      if (!poly_reward) throw ConfigError("conditions", "cor2 needs a poly reward");
      reports.push_back(check_polynomial(service, delay, poly_reward->gamma));
    } else {
      if (!exp_reward) throw ConfigError("conditions", "thm2 needs an exp reward");
      const auto [c1, c2] = check_surrogate(service, delay, exp_reward->kappa);
      reports.push_back(c1);
      reports.push_back(c2);
    }
  }
  json arr = json::array();
  bool all_indeterminate = true;
  for (const auto& r : reports) {
    arr.push_back(report_json(r));
    all_indeterminate = all_indeterminate && r.verdict == Verdict::indeterminate;
  }
  CommandResult out;
  out.files["conditions.json"] = dump(arr);
  out.exit_code = all_indeterminate ? kIndeterminate : kSuccess;
  return out;
}

std::vector<double> parse_means(const json& config, std::string_view key) {
  const std::string path(key);
  const json* v = find(config, key);
  if (!v) {
    std::vector<double> out(50);
    for (int i = 0; i < 50; ++i) out[i] = 0.04 + (2.0 - 0.04) * i / 49.0;
    return out;
  }
  std::vector<double> out;
  if (v->is_array()) {
    for (const auto& x : *v) {
      if (!x.is_number() || !(x.get<double>() > 0.0))
        throw ConfigError(path, "means must be positive numbers");
      out.push_back(x.get<double>());
    }
    if (out.empty()) throw ConfigError(path, "expected at least one mean");
    return out;
  }
  reject_unknown_keys(*v, {"min", "max", "points"}, path);
  const double lo = get_number(*v, "min", path);
  const double hi = get_number(*v, "max", path);
  const auto points = get_count(*v, "points", path);
  if (!(lo > 0.0)) throw ConfigError(path + ".min", "must be positive");
  if (!(hi >= lo)) throw ConfigError(path + ".max", "must be >= min");
  if (points < 1) throw ConfigError(path + ".points", "must be positive");
  if (points == 1) return {lo};
  for (std::size_t i = 0; i < points; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  return out;
}

CommandResult cmd_region_scan(const json& config) {
  const double kappa = get_number(config, "kappa", "", 1.0);
  if (!(kappa > 0.0)) throw ConfigError("kappa", "must be positive");
  const auto mode = pick(config, "mode", "thm2_cond1", {"thm2_cond1", "cor1"});
  const auto sf = pick(config, "service_family", "exponential", {"exponential", "uniform"});
  const auto df = pick(config, "delay_family", "exponential", {"exponential", "uniform"});
  const auto ts = parse_means(config, "service_means");
  const auto td = parse_means(config, "delay_means");
  const auto family = [](const std::string& f) {
    return f == "exponential" ? LawFamily::exponential : LawFamily::uniform;
  };
  const auto scan = region_scan(ts, td, kappa,
                                mode == "cor1" ? ScanMode::cor1 : ScanMode::thm2_cond1, family(sf),
                                family(df));
  CommandResult out;
  out.files["region.csv"] = to_csv([&](std::ostream& os) { write_region_csv(os, scan); });
  return out;
}

CommandResult cmd_mean_shift(const json& config) {
  const auto kind_name = pick(config, "kind", "", {"gradual", "abrupt"});
  const auto kind = kind_name == "gradual" ? ShiftKind::gradual : ShiftKind::abrupt;
  ExperimentSpec spec;
  spec.id = "mean-shift";
  spec.methods = {Method::bayes};
  spec.service = parse_distribution(required(config, "service"), "service");
  spec.delay = parse_distribution(required(config, "delay"), "delay");
  spec.reward = reward_or_default(config);
  spec.schedule = parse_schedule(required(config, "schedule"), "schedule");
  const bool matches = kind == ShiftKind::gradual
                           ? std::holds_alternative<GradualLinear>(spec.schedule)
                           : std::holds_alternative<AbruptPiecewise>(spec.schedule);
  if (!matches && !is_stationary(spec.schedule))
    throw ConfigError("schedule.kind", "does not match kind '" + kind_name + "'");
  spec.n = get_count(config, "n", "", 50'000);
  if (spec.n < 2) throw ConfigError("n", "must be at least 2");
  check_schedule_covers(spec.schedule, spec.n, "schedule");
  if (find(config, "bayes")) spec.bayes = parse_bayes_config(config["bayes"], "bayes");
  MeanShiftOptions opts;
  opts.width = get_count(config, "width", "", opts.width);
  opts.stride = get_count(config, "stride", "", opts.stride);
  opts.seed = get_seed(config, "seed", "", 1);
  if (opts.width == 0 || opts.width > spec.n) throw ConfigError("width", "must lie in [1, n]");
  if (opts.stride == 0) throw ConfigError("stride", "must be positive");
  spec.reporting = ReportSliding{opts.width, opts.stride};
  spec.seeds = {opts.seed};

  const auto res = mean_shift_run(kind, spec, opts);
  CommandResult out;
  out.files["mean_shift.csv"] = to_csv([&](std::ostream& os) { write_mean_shift_csv(os, res); });
  out.files["posterior.json"] = dump(to_json(res.posterior));
  return out;
}

CommandResult cmd_suite(const json& config) {
  const auto specs = parse_suite(config);
  const auto rows = run_suite(specs);
  CommandResult out;
  out.files["suite.csv"] = to_csv([&](std::ostream& os) { write_suite_csv(os, rows); });
  return out;
}

void write_error(std::ostream& err, std::string_view kind, std::string_view field,
                 std::string_view message) {
  json rec = {{"error", kind}, {"message", message}};
  if (!field.empty()) rec["field"] = field;
  err << rec.dump() << '\n';
}

void write_artifacts(const fs::path& out_dir, const std::map<std::string, std::string>& files,
                     bool force) {
  const fs::path target = fs::absolute(out_dir);
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const fs::path tmp =
      parent / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directory(tmp);
  try {
    for (const auto& [name, content] : files) {
      std::ofstream os(tmp / name, std::ios::binary);
      os << content;
      if (!os) throw std::runtime_error("failed to write " + (tmp / name).string());
    }
    if (fs::exists(target)) {
      if (!force) throw std::runtime_error(target.string() + " appeared while running");
      fs::remove_all(target);
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
}

}  // namespace

const std::vector<SchemaKey>& config_schema() { return kSchema; }

std::vector<std::string> commands() {
  return {"simulate", "grid-search", "bayes", "check-conditions", "region-scan", "mean-shift",
          "suite"};
}

namespace {
std::string_view summary(std::string_view command) {
  static const std::map<std::string_view, std::string_view> text = {
      {"simulate", "fixed-lag trajectory and reward estimate"},
      {"grid-search", "reward over a lag grid (simulated, exact or surrogate)"},
      {"bayes", "adaptive lag selection with the gamma posterior"},
      {"check-conditions", "sufficient conditions for lag 0"},
      {"region-scan", "condition verdicts over a (t_s, t_d) grid"},
      {"mean-shift", "Bayesian tracking under drifting means"},
      {"suite", "batch of experiments to one results table"},
  };
  return text.at(command);
}
}  // namespace

std::vector<std::string> keys_for(std::string_view command) {
  std::vector<std::string> keys;
  for (const auto& k : kSchema)
    if (k.command == command) keys.emplace_back(k.key);
  return keys;
}

CommandResult execute(std::string_view command, const json& config_in) {
  const json config = config_in.is_null() ? json::object() : config_in;
  if (!config.is_object()) throw ConfigError("--config", "top level must be a JSON object");
  reject_unknown_keys(config, keys_for(command), "");
  CommandResult result;
  if (command == "simulate")
    result = cmd_simulate(config);
  else if (command == "grid-search")
    result = cmd_grid_search(config);
  else if (command == "bayes")
    result = cmd_bayes(config);
  else if (command == "check-conditions")
    result = cmd_check_conditions(config);
  else if (command == "region-scan")
    result = cmd_region_scan(config);
  else if (command == "mean-shift")
    result = cmd_mean_shift(config);
  else if (command == "suite")
    result = cmd_suite(config);
  else
    throw ConfigError("command", "unknown command '" + std::string(command) + "'");
  result.files["config.json"] = dump(config);
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lag-policy experiments for a buffer-2 queue"};
  app.require_subcommand(1);
  app.footer("Run `qlag <command> --help` for the config keys of each command.\n"
             "QLAG_THREADS caps worker threads.");

  struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    bool force = false;
  };
  std::map<std::string, Flags> flags;
  for (const auto& name : commands()) {
    auto& f = flags[name];
    auto* sub = app.add_subcommand(name, std::string(summary(name)));
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--out", f.out, "output directory (created atomically)")->required();
    sub->add_option("--seed", f.seed, "root seed (overrides the config)");
    sub->add_option("--set", f.sets, "override a config key, e.g. --set service.mean=0.5");
    sub->add_flag("--force", f.force, "replace an existing output directory");
    sub->footer(command_help(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kSuccess;
    write_error(err, "usage", "", e.what());
    return kValidationError;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const auto& f = flags[command];
  try {
    if (fs::exists(f.out) && !f.force)
      throw ConfigError("--out", "'" + f.out + "' exists; pass --force to replace it");
    json config = f.config.empty() ? json::object() : read_json_file(f.config);
    for (const auto& kv : f.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + kv + "'");
      apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.seed) {
      if (command == "suite") {
        if (config.contains("experiments") && config["experiments"].is_array())
          for (auto& e : config["experiments"]) e["seeds"] = json::array({*f.seed});
      } else if (!keys_for(command).empty()) {
        const auto keys = keys_for(command);
        if (std::find(keys.begin(), keys.end(), "seed") != keys.end()) config["seed"] = *f.seed;
      }
    }
    const auto result = execute(command, config);
    write_artifacts(f.out, result.files, f.force);
    for (const auto& [name, _] : result.files) out << (fs::path(f.out) / name).string() << '\n';
    if (result.exit_code == kIndeterminate)
      write_error(err, "indeterminate", "", "every requested condition is indeterminate");
    return result.exit_code;
  } catch (const ConfigError& e) {
    write_error(err, "validation", e.field(), e.what());
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    write_error(err, "validation", "", e.what());
    return kValidationError;
  } catch (const std::exception& e) {
    write_error(err, "runtime", "", e.what());
    return kRuntimeError;
  }
}

}  // namespace qlag::cli
