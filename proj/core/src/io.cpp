#include "qlag/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qlag/format.hpp"

namespace qlag {
namespace {

const json* find(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

void require_object(const json& j, std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path), "expected an object");
}

template <class F>
auto checked(std::string_view path, F&& body) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string(path), e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

std::string join_path(std::string_view parent, std::string_view key) {
  if (parent.empty()) return std::string(key);
  return std::string(parent) + "." + std::string(key);
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         std::string_view path) {
  require_object(j, path);
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(join_path(path, key), "unknown key");
}

double get_number(const json& j, std::string_view key, std::string_view path) {
  const auto field = join_path(path, key);
  const json* v = find(j, key);
  if (!v) throw ConfigError(field, "missing required field");
  if (!v->is_number()) throw ConfigError(field, "expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double get_number(const json& j, std::string_view key, std::string_view path, double fallback) {
  return find(j, key) ? get_number(j, key, path) : fallback;
}

std::size_t get_count(const json& j, std::string_view key, std::string_view path) {
  const auto field = join_path(path, key);
  const json* v = find(j, key);
  if (!v) throw ConfigError(field, "missing required field");
  if (!v->is_number_integer() || v->get<long long>() < 0)
    throw ConfigError(field, "expected a non-negative integer");
  return v->get<std::size_t>();
}

std::size_t get_count(const json& j, std::string_view key, std::string_view path,
                      std::size_t fallback) {
  return find(j, key) ? get_count(j, key, path) : fallback;
}

std::uint64_t get_seed(const json& j, std::string_view key, std::string_view path,
                       std::uint64_t fallback) {
  return find(j, key) ? static_cast<std::uint64_t>(get_count(j, key, path)) : fallback;
}

std::string get_string(const json& j, std::string_view key, std::string_view path) {
  const auto field = join_path(path, key);
  const json* v = find(j, key);
  if (!v) throw ConfigError(field, "missing required field");
  if (!v->is_string()) throw ConfigError(field, "expected a string");
  return v->get<std::string>();
}

DistributionSpec parse_distribution(const json& j, std::string_view path) {
  require_object(j, path);
  const auto kind = get_string(j, "kind", path);
  DistributionSpec spec;
  std::string blame(path);
  if (kind == "exponential") {
    reject_unknown_keys(j, {"kind", "mean"}, path);
    spec = Exponential{get_number(j, "mean", path)};
    blame = join_path(path, "mean");
  } else if (kind == "uniform") {
    reject_unknown_keys(j, {"kind", "lower", "upper"}, path);
    spec = Uniform{get_number(j, "lower", path), get_number(j, "upper", path)};
  } else if (kind == "truncnorm") {
    reject_unknown_keys(j, {"kind", "mu", "sigma", "lower", "upper"}, path);
    spec = TruncatedNormal{get_number(j, "mu", path), get_number(j, "sigma", path),
                           get_number(j, "lower", path), get_number(j, "upper", path)};
  } else if (kind == "deterministic") {
    reject_unknown_keys(j, {"kind", "value"}, path);
    spec = Deterministic{get_number(j, "value", path)};
    blame = join_path(path, "value");
  } else {
    throw ConfigError(join_path(path, "kind"),
                      "unknown distribution '" + kind +
                          "' (expected exponential, uniform, truncnorm, deterministic)");
  }
  checked(blame, [&] { validate(spec); return 0; });
  return spec;
}

json to_json(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>)
          return {{"kind", "exponential"}, {"mean", d.mean}};
        else if constexpr (std::is_same_v<T, Uniform>)
          return {{"kind", "uniform"}, {"lower", d.lower}, {"upper", d.upper}};
        else if constexpr (std::is_same_v<T, TruncatedNormal>)
          return {{"kind", "truncnorm"}, {"mu", d.mu}, {"sigma", d.sigma},
                  {"lower", d.lower},    {"upper", d.upper}};
        else
          return {{"kind", "deterministic"}, {"value", d.value}};
      },
      spec);
}

RewardSpec parse_reward(const json& j, std::string_view path) {
  require_object(j, path);
  const auto kind = get_string(j, "kind", path);
  RewardSpec spec;
  std::string blame;
  if (kind == "exp") {
    reject_unknown_keys(j, {"kind", "kappa"}, path);
    spec = ExponentialReward{get_number(j, "kappa", path)};
    blame = join_path(path, "kappa");
  } else if (kind == "poly") {
    reject_unknown_keys(j, {"kind", "gamma"}, path);
    spec = PolynomialReward{get_number(j, "gamma", path)};
    blame = join_path(path, "gamma");
  } else {
    throw ConfigError(join_path(path, "kind"),
                      "unknown reward '" + kind + "' (expected exp, poly)");
  }
  checked(blame, [&] { validate(spec); return 0; });
  return spec;
}

json to_json(const RewardSpec& spec) {
  if (const auto* e = std::get_if<ExponentialReward>(&spec))
    return {{"kind", "exp"}, {"kappa", e->kappa}};
  return {{"kind", "poly"}, {"gamma", std::get<PolynomialReward>(spec).gamma}};
}

ParamSchedule parse_schedule(const json& j, std::string_view path) {
  require_object(j, path);
  const auto kind = get_string(j, "kind", path);
  ParamSchedule schedule;
  if (kind == "stationary") {
    reject_unknown_keys(j, {"kind", "service_mean", "delay_mean"}, path);
    Stationary s;
    if (find(j, "service_mean")) s.service_mean = get_number(j, "service_mean", path);
    if (find(j, "delay_mean")) s.delay_mean = get_number(j, "delay_mean", path);
    schedule = s;
  } else if (kind == "gradual") {
    reject_unknown_keys(
        j, {"kind", "service_start", "service_end", "delay_start", "delay_end", "jobs"}, path);
    schedule = GradualLinear{get_number(j, "service_start", path),
                             get_number(j, "service_end", path),
                             get_number(j, "delay_start", path), get_number(j, "delay_end", path),
                             get_count(j, "jobs", path)};
  } else if (kind == "abrupt") {
    reject_unknown_keys(j, {"kind", "segments"}, path);
    const auto seg_path = join_path(path, "segments");
    const json* segs = find(j, "segments");
    if (!segs) throw ConfigError(seg_path, "missing required field");
    if (!segs->is_array() || segs->empty()) throw ConfigError(seg_path, "expected a non-empty array");
    AbruptPiecewise a;
    for (std::size_t i = 0; i < segs->size(); ++i) {
      const auto p = seg_path + "[" + std::to_string(i) + "]";
      const auto& s = (*segs)[i];
      reject_unknown_keys(s, {"length", "service_mean", "delay_mean"}, p);
      a.segments.push_back(
          {get_count(s, "length", p), get_number(s, "service_mean", p), get_number(s, "delay_mean", p)});
    }
    schedule = a;
  } else {
    throw ConfigError(join_path(path, "kind"),
                      "unknown schedule '" + kind + "' (expected stationary, gradual, abrupt)");
  }
  checked(path, [&] { validate(schedule); return 0; });
  return schedule;
}

json to_json(const ParamSchedule& schedule) {
  if (const auto* s = std::get_if<Stationary>(&schedule)) {
    json j = {{"kind", "stationary"}};
    if (s->service_mean) j["service_mean"] = *s->service_mean;
    if (s->delay_mean) j["delay_mean"] = *s->delay_mean;
    return j;
  }
  if (const auto* g = std::get_if<GradualLinear>(&schedule))
    return {{"kind", "gradual"},         {"service_start", g->service_start},
            {"service_end", g->service_end}, {"delay_start", g->delay_start},
            {"delay_end", g->delay_end},     {"jobs", g->jobs}};
  json segs = json::array();
  for (const auto& s : std::get<AbruptPiecewise>(schedule).segments)
    segs.push_back({{"length", s.length}, {"service_mean", s.service_mean},
                    {"delay_mean", s.delay_mean}});
  return {{"kind", "abrupt"}, {"segments", segs}};
}

Reporting parse_reporting(const json& j, std::string_view path) {
  require_object(j, path);
  const auto kind = get_string(j, "kind", path);
  if (kind == "last_k") {
    reject_unknown_keys(j, {"kind", "k"}, path);
    const auto k = get_count(j, "k", path, 5000);
    if (k == 0) throw ConfigError(join_path(path, "k"), "must be positive");
    return ReportLastK{k};
  }
  if (kind == "sliding") {
    reject_unknown_keys(j, {"kind", "width", "stride"}, path);
    const auto width = get_count(j, "width", path, 2000);
    const auto stride = get_count(j, "stride", path, 1);
    if (width == 0) throw ConfigError(join_path(path, "width"), "must be positive");
    if (stride == 0) throw ConfigError(join_path(path, "stride"), "must be positive");
    return ReportSliding{width, stride};
  }
  throw ConfigError(join_path(path, "kind"),
                    "unknown reporting mode '" + kind + "' (expected last_k, sliding)");
}

json to_json(const Reporting& reporting) {
  if (const auto* r = std::get_if<ReportLastK>(&reporting)) return {{"kind", "last_k"}, {"k", r->k}};
  const auto& s = std::get<ReportSliding>(reporting);
  return {{"kind", "sliding"}, {"width", s.width}, {"stride", s.stride}};
}

BayesConfig parse_bayes_config(const json& j, std::string_view path) {
  reject_unknown_keys(j, {"alpha0", "beta0", "eps_idle", "eps_busy"}, path);
  BayesConfig cfg;
  cfg.alpha0 = get_number(j, "alpha0", path, cfg.alpha0);
  cfg.beta0 = get_number(j, "beta0", path, cfg.beta0);
  cfg.eps_idle = get_number(j, "eps_idle", path, cfg.eps_idle);
  cfg.eps_busy = get_number(j, "eps_busy", path, cfg.eps_busy);
  checked(path, [&] { validate(cfg); return 0; });
  return cfg;
}

json to_json(const BayesConfig& cfg) {
  return {{"alpha0", cfg.alpha0},
          {"beta0", cfg.beta0},
          {"eps_idle", cfg.eps_idle},
          {"eps_busy", cfg.eps_busy}};
}

PosteriorState parse_posterior(const json& j, std::string_view path) {
  reject_unknown_keys(j, {"alpha", "beta", "updates_applied"}, path);
  PosteriorState post;
  post.alpha = get_number(j, "alpha", path);
  post.beta = get_number(j, "beta", path);
  post.updates_applied = get_count(j, "updates_applied", path, 0);
  if (!(post.alpha > 0.0)) throw ConfigError(join_path(path, "alpha"), "must be positive");
  if (!(post.beta > 0.0)) throw ConfigError(join_path(path, "beta"), "must be positive");
  return post;
}

json to_json(const PosteriorState& post) {
  return {{"alpha", post.alpha}, {"beta", post.beta}, {"updates_applied", post.updates_applied}};
}

GridSettings parse_grid_settings(const json& j, std::string_view path) {
  reject_unknown_keys(j, {"lag_min", "lag_max", "step", "n", "burn_in"}, path);
  GridSettings g;
  g.lag_min = get_number(j, "lag_min", path, g.lag_min);
  if (find(j, "lag_max")) g.lag_max = get_number(j, "lag_max", path);
  if (find(j, "step")) g.step = get_number(j, "step", path);
  g.n = get_count(j, "n", path, g.n);
  g.burn_in = get_count(j, "burn_in", path, g.burn_in);
  if (g.lag_min < 0.0) throw ConfigError(join_path(path, "lag_min"), "must be >= 0");
  if (g.lag_max && *g.lag_max < g.lag_min)
    throw ConfigError(join_path(path, "lag_max"), "must be >= lag_min");
  if (g.step && !(*g.step > 0.0)) throw ConfigError(join_path(path, "step"), "must be positive");
  return g;
}

ExperimentSpec parse_experiment(const json& j, std::string_view path) {
  reject_unknown_keys(j,
                      {"id", "service", "delay", "reward", "methods", "schedule", "n", "seeds",
                       "reporting", "bayes", "grid"},
                      path);
  ExperimentSpec spec;
  spec.id = get_string(j, "id", path);
  const auto section = [&](std::string_view key) -> const json& {
    const json* v = find(j, key);
    if (!v) throw ConfigError(join_path(path, key), "missing required field");
    return *v;
  };
  spec.service = parse_distribution(section("service"), join_path(path, "service"));
  spec.delay = parse_distribution(section("delay"), join_path(path, "delay"));
  if (find(j, "reward")) spec.reward = parse_reward(*find(j, "reward"), join_path(path, "reward"));
  const auto methods_path = join_path(path, "methods");
  const json& methods = section("methods");
  if (!methods.is_array()) throw ConfigError(methods_path, "expected an array of method names");
  for (const auto& m : methods) {
    const auto parsed = m.is_string() ? method_from_string(m.get<std::string>()) : std::nullopt;
    if (!parsed)
      throw ConfigError(methods_path,
                        "unknown method " + m.dump() +
                            " (expected grid, bayes, exact, surrogate, conditions)");
    spec.methods.insert(*parsed);
  }
  if (find(j, "schedule"))
    spec.schedule = parse_schedule(*find(j, "schedule"), join_path(path, "schedule"));
  spec.n = get_count(j, "n", path, spec.n);
  if (const json* seeds = find(j, "seeds")) {
    const auto seeds_path = join_path(path, "seeds");
    if (!seeds->is_array() || seeds->empty())
      throw ConfigError(seeds_path, "expected a non-empty array of seeds");
    spec.seeds.clear();
    for (const auto& s : *seeds) {
      if (!s.is_number_integer() || s.get<std::int64_t>() < 0) throw ConfigError(seeds_path, "seeds must be non-negative integers");
      spec.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (find(j, "reporting"))
    spec.reporting = parse_reporting(*find(j, "reporting"), join_path(path, "reporting"));
  if (find(j, "bayes")) spec.bayes = parse_bayes_config(*find(j, "bayes"), join_path(path, "bayes"));
  if (find(j, "grid")) spec.grid = parse_grid_settings(*find(j, "grid"), join_path(path, "grid"));
  checked(path, [&] { validate(spec); return 0; });
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  json methods = json::array();
  for (const auto m : spec.methods) methods.push_back(std::string(to_string(m)));
  json grid = {{"lag_min", spec.grid.lag_min}, {"n", spec.grid.n}, {"burn_in", spec.grid.burn_in}};
  if (spec.grid.lag_max) grid["lag_max"] = *spec.grid.lag_max;
  if (spec.grid.step) grid["step"] = *spec.grid.step;
  return {{"id", spec.id},
          {"service", to_json(spec.service)},
          {"delay", to_json(spec.delay)},
          {"reward", to_json(spec.reward)},
          {"methods", methods},
          {"schedule", to_json(spec.schedule)},
          {"n", spec.n},
          {"seeds", spec.seeds},
          {"reporting", to_json(spec.reporting)},
          {"bayes", to_json(spec.bayes)},
          {"grid", grid}};
}

std::vector<ExperimentSpec> parse_suite(const json& j) {
  reject_unknown_keys(j, {"experiments", "kappa_sweep"}, "");
  const json* exps = find(j, "experiments");
  if (!exps) throw ConfigError("experiments", "missing required field");
  if (!exps->is_array() || exps->empty())
    throw ConfigError("experiments", "expected a non-empty array");
  std::vector<ExperimentSpec> specs;
  for (std::size_t i = 0; i < exps->size(); ++i)
    specs.push_back(parse_experiment((*exps)[i], "experiments[" + std::to_string(i) + "]"));

  if (const json* sweep = find(j, "kappa_sweep")) {
    if (!sweep->is_array() || sweep->empty())
      throw ConfigError("kappa_sweep", "expected a non-empty array of kappa values");
    std::vector<ExperimentSpec> expanded;
    for (const auto& spec : specs) {
      if (!std::holds_alternative<ExponentialReward>(spec.reward)) {
        expanded.push_back(spec);
        continue;
      }
      for (const auto& k : *sweep) {
        if (!k.is_number() || !(k.get<double>() > 0.0))
          throw ConfigError("kappa_sweep", "kappa values must be positive numbers");
        auto clone = spec;
        clone.reward = ExponentialReward{k.get<double>()};
        clone.id = spec.id + "@k=" + format_number(k.get<double>());
        expanded.push_back(std::move(clone));
      }
    }
    specs = std::move(expanded);
  }
  std::set<std::string> ids;
  for (const auto& s : specs)
    if (!ids.insert(s.id).second) throw ConfigError("experiments", "duplicate id '" + s.id + "'");
  return specs;
}

void apply_override(json& j, std::string_view dotted_key, std::string_view value) {
  if (dotted_key.empty()) throw ConfigError("--set", "empty key");
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const std::string part(dotted_key.substr(start, dot == std::string_view::npos ? dotted_key.npos
                                                                                  : dot - start));
    if (part.empty()) throw ConfigError(std::string(dotted_key), "malformed key");
    if (!node->is_object()) {
      if (!node->is_null())
        throw ConfigError(std::string(dotted_key), "path crosses a non-object value");
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  auto parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(std::string(value)) : std::move(parsed);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("--config", "'" + path + "' is not valid JSON");
  return j;
}

}  // namespace qlag
