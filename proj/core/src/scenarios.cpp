#include "qlag/scenarios.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "qlag/analytics.hpp"
#include "qlag/format.hpp"
#include "qlag/parallel.hpp"

namespace qlag {
namespace {

std::optional<double> kappa_of(const RewardSpec& f) {
  if (const auto* e = std::get_if<ExponentialReward>(&f)) return e->kappa;
  return std::nullopt;
}

void write_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << format_number(*v);
}

bool has(const ExperimentSpec& spec, Method m) { return spec.methods.count(m) != 0; }

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::grid:
      return "grid";
    case Method::bayes:
      return "bayes";
    case Method::exact:
      return "exact";
    case Method::surrogate:
      return "surrogate";
    case Method::conditions:
      return "conditions";
  }
  return "?";
}

std::optional<Method> method_from_string(std::string_view name) {
  for (auto m : {Method::grid, Method::bayes, Method::exact, Method::surrogate, Method::conditions})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::string_view to_string(ShiftKind k) { return k == ShiftKind::gradual ? "gradual" : "abrupt"; }

void validate(const ExperimentSpec& spec) {
  validate(spec.service);
  validate(spec.delay);
  validate(spec.reward);
  validate(spec.schedule);
  validate(spec.bayes);
  if (spec.id.empty()) throw std::invalid_argument("experiment id must not be empty");
  if (spec.seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (spec.n < 2) throw std::invalid_argument("experiment needs at least 2 jobs");
  const std::size_t covered = schedule_length(spec.schedule);
  if (covered != 0 && covered < spec.n)
    throw InvalidScheduleError("piecewise schedule shorter than the run");
  if (const auto* r = std::get_if<ReportLastK>(&spec.reporting)) {
    if (r->k == 0 || r->k > spec.n) throw std::invalid_argument("reporting k must lie in [1, n]");
  } else {
    const auto& s = std::get<ReportSliding>(spec.reporting);
    if (s.width == 0 || s.width > spec.n || s.stride == 0)
      throw std::invalid_argument("sliding reporting needs 1 <= width <= n and stride >= 1");
  }
  if (spec.methods.count(Method::surrogate) && !kappa_of(spec.reward))
    throw std::invalid_argument("surrogate method needs an exponential reward");
  const auto opts = grid_options(spec, Objective::exact, 0);
  if (!(opts.lag_min >= 0.0) || !(opts.lag_max >= opts.lag_min) || !(opts.step > 0.0))
    throw std::invalid_argument("grid needs 0 <= lag_min <= lag_max and step > 0");
}

GridSearchOptions grid_options(const ExperimentSpec& spec, Objective objective,
                               std::uint64_t seed) {
  GridSearchOptions opts = default_grid(spec.service);
  opts.lag_min = spec.grid.lag_min;
  if (spec.grid.lag_max) opts.lag_max = *spec.grid.lag_max;
  opts.step = spec.grid.step ? *spec.grid.step : (opts.lag_max - opts.lag_min) / 60.0;
  opts.n = spec.grid.n;
  opts.burn_in = spec.grid.burn_in;
  opts.seed = seed;
  opts.objective = objective;
  opts.schedule = spec.schedule;
  return opts;
}

std::vector<SuiteRow> run_suite(const std::vector<ExperimentSpec>& specs) {
  std::set<std::string> ids;
  for (const auto& spec : specs) {
    validate(spec);
    if (!ids.insert(spec.id).second)
      throw std::invalid_argument("duplicate experiment id '" + spec.id + "'");
  }
  std::vector<SuiteRow> rows;
  for (const auto& spec : specs) {
    const auto kappa = kappa_of(spec.reward);

    // Seed-independent pieces first.
    std::optional<GridResult> sur;
    if (has(spec, Method::surrogate))
      sur = optimize(spec.service, spec.delay, spec.reward,
                     grid_options(spec, Objective::surrogate, 0));
    std::optional<GridResult> exact;
    if (has(spec, Method::exact))
      exact = optimize(spec.service, spec.delay, spec.reward,
                       grid_options(spec, Objective::exact, 0));
    std::optional<std::pair<ConditionReport, ConditionReport>> cond;
    if (has(spec, Method::conditions) && kappa)
      cond = check_surrogate(spec.service, spec.delay, *kappa);

    for (const auto seed : spec.seeds) {
      SuiteRow row;
      row.case_id = spec.id;
      row.seed = seed;
      row.kappa = kappa;
      if (sur) {
        row.g_sur = sur->best_reward;
        row.surrogate_lag = sur->best_lag;
      }
      if (exact) row.g_exact = exact->best_reward;
      if (cond) {
        row.cond1 = cond->first.verdict;
        row.cond2 = cond->second.verdict;
      }
      if (has(spec, Method::grid)) {
        const auto sim = optimize(spec.service, spec.delay, spec.reward,
                                  grid_options(spec, Objective::simulated, seed));
        row.g_sim = sim.best_reward;
      }
      rows.push_back(std::move(row));
    }
  }

  // Bayesian rows run in parallel; each run is sequential internally.
  std::vector<std::pair<const ExperimentSpec*, std::size_t>> bayes_jobs;
  std::size_t row_index = 0;
  for (const auto& spec : specs)
    for (std::size_t i = 0; i < spec.seeds.size(); ++i, ++row_index)
      if (has(spec, Method::bayes)) bayes_jobs.emplace_back(&spec, row_index);
  parallel_for(bayes_jobs.size(), [&](std::size_t j) {
    const auto& spec = *bayes_jobs[j].first;
    auto& row = rows[bayes_jobs[j].second];
    const auto res = run_adaptive(spec.service, spec.delay, spec.schedule, spec.reward, spec.n,
                                  spec.bayes, row.seed, spec.reporting);
    row.g_be = res.reward.value;
    row.bayes_lag = res.posterior.mean_lag();
    if (row.kappa && has(spec, Method::surrogate))
      row.g_tb = surrogate_reward(spec.service, spec.delay, *row.kappa, *row.bayes_lag);
  });
  return rows;
}

void write_suite_csv(std::ostream& os, const std::vector<SuiteRow>& rows) {
  os << "case,seed,kappa,G_sur,G_sim,G_be,G_tb\n";
  for (const auto& r : rows) {
    os << r.case_id << ',' << r.seed << ',';
    write_optional(os, r.kappa);
    os << ',';
    write_optional(os, r.g_sur);
    os << ',';
    write_optional(os, r.g_sim);
    os << ',';
    write_optional(os, r.g_be);
    os << ',';
    write_optional(os, r.g_tb);
    os << '\n';
  }
}

MeanShiftResult mean_shift_run(ShiftKind kind, const ExperimentSpec& base,
                               const MeanShiftOptions& options) {
  validate(base);
  if (!has(base, Method::bayes)) throw std::invalid_argument("mean shift needs the bayes method");
  const bool kind_ok = is_stationary(base.schedule) ||
                       (kind == ShiftKind::gradual &&
                        std::holds_alternative<GradualLinear>(base.schedule)) ||
                       (kind == ShiftKind::abrupt &&
                        std::holds_alternative<AbruptPiecewise>(base.schedule));
  if (!kind_ok)
    throw InvalidScheduleError("schedule does not match the " + std::string(to_string(kind)) +
                               " shift kind");
  if (options.width == 0 || options.width > base.n || options.stride == 0)
    throw std::invalid_argument("mean shift needs 1 <= width <= n and stride >= 1");

  const auto run = run_adaptive(base.service, base.delay, base.schedule, base.reward, base.n,
                                base.bayes, options.seed,
                                ReportSliding{options.width, options.stride});

  MeanShiftResult out;
  out.posterior = run.posterior;
  out.points.reserve(run.series.size());
  for (const auto& p : run.series) {
    const auto [s, d] = means_at(base.schedule, p.index);
    MeanShiftPoint pt;
    pt.index = p.index;
    pt.service_mean = s ? *s : mean(base.service);
    pt.delay_mean = d ? *d : mean(base.delay);
    pt.g_be = p.value;
    out.points.push_back(pt);
  }

  // Reference optimum per distinct parameter pair.
  std::map<std::pair<double, double>, double> cache;
  for (const auto& pt : out.points) cache.emplace(std::pair{pt.service_mean, pt.delay_mean}, 0.0);
  std::vector<std::map<std::pair<double, double>, double>::iterator> slots;
  for (auto it = cache.begin(); it != cache.end(); ++it) slots.push_back(it);
  parallel_for(slots.size(), [&](std::size_t i) {
    const auto [ts, td] = slots[i]->first;
    const auto service = with_mean(base.service, ts);
    const auto delay = with_mean(base.delay, td);
    GridSearchOptions opts = default_grid(service);
    opts.objective = Objective::exact;
    slots[i]->second = optimize(service, delay, base.reward, opts).best_reward;
  });
  for (auto& pt : out.points) pt.g_ref = cache.at({pt.service_mean, pt.delay_mean});
  return out;
}

double mean_relative_deviation(const MeanShiftResult& result, const ParamSchedule& schedule,
                               std::size_t from, std::size_t to, std::size_t settle) {
  std::vector<std::size_t> switches{0};
  if (const auto* a = std::get_if<AbruptPiecewise>(&schedule)) {
    std::size_t end = 0;
    for (const auto& seg : a->segments) {
      end += seg.length;
      switches.push_back(end);
    }
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& pt : result.points) {
    if (pt.index <= from || pt.index > to) continue;
    std::size_t last = 0;
    for (const auto s : switches)
      if (s < pt.index) last = s;
    if (pt.index - last < settle) continue;
    sum += std::abs(pt.g_be - pt.g_ref) / pt.g_ref;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no mean-shift points in the requested range");
  return sum / static_cast<double>(count);
}

void write_mean_shift_csv(std::ostream& os, const MeanShiftResult& result) {
  os << "index,t_s,t_d,G_be,G_ref\n";
  for (const auto& p : result.points)
    os << p.index << ',' << format_number(p.service_mean) << ',' << format_number(p.delay_mean)
       << ',' << format_number(p.g_be) << ',' << format_number(p.g_ref) << '\n';
}

}  // namespace qlag
