// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qlag/analytics.hpp"
#include "qlag/bayes.hpp"
#include "qlag/cli.hpp"
#include "qlag/conditions.hpp"
#include "qlag/distributions.hpp"
#include "qlag/gridsearch.hpp"
#include "qlag/parallel.hpp"
#include "qlag/scenarios.hpp"
#include "qlag/simulator.hpp"

using namespace qlag;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "  FAILED: " << what << "\n";
    }
  }
};

std::string fmt(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

GridSearchOptions exact_grid(double ts) {
  GridSearchOptions o;
  o.objective = Objective::exact;
  o.lag_min = 0.0;
  o.lag_max = 3.0 * ts;
  o.step = 0.05 * ts;
  return o;
}

// 1. dE[W]/dlag = -P(S - D > lag).
void wait_slope(Outcome& out) {
  const DistributionSpec s = Exponential{1.0}, d = Exponential{0.33};
  const double h = 1e-4;
  for (double lag : {0.0, 0.25, 0.5, 1.0}) {
    const double fd = (expected_positive_part(s, d, lag + h, ClosedForm{}).value -
                       expected_positive_part(s, d, lag - h, ClosedForm{}).value) /
                      (2 * h);
    const double target = -prob_diff_exceeds(s, d, lag);
    out.detail << "  lag " << lag << ": closed-form slope " << fmt(fd, 10) << " vs "
               << fmt(target, 10) << "\n";
    out.require(std::abs(fd - target) <= 1e-6, "closed-form slope at lag " + fmt(lag));
  }
  // Monte Carlo: central difference on one set of 1e7 (S, D) draws.
  const std::size_t n = 10'000'000;
  const double hm = 0.01;
  const double lags[] = {0.0, 0.25, 0.5, 1.0};
  double sum[4] = {}, sum_sq[4] = {};
  RandomStream rs = RandomStream::derive(2024, "acceptance-wait-service");
  RandomStream rd = RandomStream::derive(2024, "acceptance-wait-delay");
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sample(s, rs) - sample(d, rd);
    for (int k = 0; k < 4; ++k) {
      const double v =
          (std::max(x - lags[k] - hm, 0.0) - std::max(x - lags[k] + hm, 0.0)) / (2 * hm);
      sum[k] += v;
      sum_sq[k] += v * v;
    }
  }
  for (int k = 0; k < 4; ++k) {
    const double m = sum[k] / n;
    const double se = std::sqrt((sum_sq[k] / n - m * m) / n);
    const double target = -prob_diff_exceeds(s, d, lags[k]);
    out.detail << "  lag " << lags[k] << ": Monte-Carlo slope " << fmt(m) << " +- " << fmt(se, 3)
               << " vs " << fmt(target) << "\n";
    out.require(std::abs(m - target) <= 3 * se, "Monte-Carlo slope at lag " + fmt(lags[k]));
  }
}

// 2. Simulator against the closed forms.
void simulator_oracle(Outcome& out) {
  const DistributionSpec s = Exponential{1.0}, d = Exponential{0.33};
  const auto traj = run_fixed_lag(s, d, 0.0, 1'000'000, Stationary{}, 1);
  double w = 0.0;
  for (const auto& j : traj.jobs) w += j.wait;
  w /= static_cast<double>(traj.jobs.size());
  const auto est = estimate_reward(traj, ExponentialReward{1.0}, WindowAll{1000});
  const double exact = reward_exact(s, d, ExponentialReward{1.0}, 0.0, ClosedForm{}).value;
  out.detail << "  mean W " << fmt(w) << " vs 0.7519; G-hat " << fmt(est.value) << " +- "
             << fmt(est.std_error, 3) << " vs exact " << fmt(exact) << "\n";
  out.require(std::abs(w - 0.7519) / 0.7519 <= 0.01, "mean wait within 1%");
  out.require(std::abs(est.value - exact) <= 3 * est.std_error, "reward within 3 std errors");
}

// 3. The surrogate is an upper bound.
void surrogate_bound(Outcome& out) {
  struct Case {
    const char* name;
    DistributionSpec s, d;
  };
  const std::vector<Case> cases = {{"exp/exp", Exponential{1.0}, Exponential{0.33}},
                                   {"unif/unif", Uniform{0.0, 2.0}, Uniform{0.0, 0.66}}};
  const auto lags = lag_grid(0.0, 2.0, 0.1);
  for (const auto& c : cases) {
    for (double kappa : {0.5, 1.0}) {
      std::vector<RewardEstimate> est(lags.size());
      parallel_for(lags.size(), [&](std::size_t i) {
        const auto traj = run_fixed_lag(c.s, c.d, lags[i], 1'000'000, Stationary{}, 7);
        est[i] = estimate_reward(traj, ExponentialReward{kappa}, WindowAll{1000});
      });
      double worst = 1e300;
      for (std::size_t i = 0; i < lags.size(); ++i) {
        const double sur = surrogate_reward(c.s, c.d, kappa, lags[i]);
        const double margin = sur - (est[i].value - 3 * est[i].std_error);
        worst = std::min(worst, margin);
        out.require(margin >= 0.0, std::string(c.name) + " kappa " + fmt(kappa) + " lag " +
                                       fmt(lags[i]));
      }
      out.detail << "  " << c.name << " kappa " << kappa << ": min(G_sur - (G-hat - 3se)) = "
                 << fmt(worst) << "\n";
    }
  }
}

// 4. Surrogate condition 1 and the region boundary.
void surrogate_condition(Outcome& out) {
  const DistributionSpec s = Exponential{1.0}, d = Exponential{0.6};
  const auto [c1, c2] = check_surrogate(s, d, 1.0);
  out.require(c1.verdict == Verdict::holds, "condition 1 holds for (1, 0.6)");
  GridSearchOptions o;
  o.objective = Objective::surrogate;
  o.lag_max = 2.0;
  o.step = 0.05;
  const auto r = optimize(s, d, ExponentialReward{1.0}, o);
  out.detail << "  product " << fmt(c1.lhs) << ", surrogate best lag " << r.best_lag << "\n";
  out.require(r.best_lag == 0.0, "surrogate grid optimum at lag 0");

  std::vector<double> grid(50);
  for (int i = 0; i < 50; ++i) grid[i] = 0.04 * (i + 1);
  const auto scan = region_scan(grid, grid, 1.0, ScanMode::thm2_cond1, LawFamily::exponential,
                                LawFamily::exponential);
  int mismatches = 0, holds = 0, indeterminate = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double ts = grid[i], td = grid[k];
      const auto v = scan.at(i, k);
      if (v == Verdict::indeterminate) {
        ++indeterminate;
        if (td < 1.0) ++mismatches;  // M_D(1) exists for t_d < 1
        continue;
      }
      const bool expected = td >= ts / (1.0 + ts) * (1.0 - 1e-12);
      holds += v == Verdict::holds;
      if ((v == Verdict::holds) != expected) ++mismatches;
    }
  }
  out.detail << "  50x50 scan: " << holds << " holds, " << indeterminate
             << " indeterminate (t_d >= 1/kappa), " << mismatches << " boundary mismatches\n";
  out.require(mismatches == 0, "region boundary cell-exact");
}

// 5. Specialised optimality checks agree with the general one; holds => lag 0.
void optimality_consistency(Outcome& out) {
  std::mt19937_64 rng(515);
  std::uniform_real_distribution<double> ts_u(0.1, 2.0), td_u(0.1, 4.0), rate(0.01, 2.0);
  int holds = 0, confirmed = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double ts = ts_u(rng), td = td_u(rng), kappa = rate(rng), gamma = rate(rng);
    const int family = i % 4;
    const DistributionSpec s = family < 2 ? DistributionSpec{Exponential{ts}}
                                          : DistributionSpec{Uniform{0.0, 2.0 * ts}};
    const DistributionSpec d = family % 2 == 0 ? DistributionSpec{Exponential{td}}
                                               : DistributionSpec{Uniform{0.0, 2.0 * td}};
    const RewardSpec fe = ExponentialReward{kappa}, fp = PolynomialReward{gamma};
    const auto e = check_exponential(s, d, kappa);
    const auto ge = check_general(s, d, fe);
    const auto p = check_polynomial(s, d, gamma);
    const auto gp = check_general(s, d, fp);
    for (const auto& [a, b] : {std::pair{&e, &ge}, std::pair{&p, &gp}}) {
      const double dl = std::abs(a->lhs - b->lhs);
      const double dr = std::isinf(a->rhs) && a->rhs == b->rhs ? 0.0 : std::abs(a->rhs - b->rhs);
      worst = std::max({worst, dl, dr});
      out.require(dl <= 1e-9 && dr <= 1e-9, "dual-path agreement, set " + std::to_string(i));
      out.require(a->verdict == b->verdict, "verdict agreement, set " + std::to_string(i));
    }
    for (const auto& [rep, f] : {std::pair{&e, fe}, std::pair{&p, fp}}) {
      if (rep->verdict != Verdict::holds) continue;
      ++holds;
      const auto r = optimize(s, d, f, exact_grid(ts));
      const bool ok = r.best_lag == 0.0;
      confirmed += ok;
      out.require(ok, "holds verdict not confirmed, set " + std::to_string(i) + " (" +
                          describe(s) + ", " + describe(d) + ", " + describe(f) +
                          ") best lag " + fmt(r.best_lag));
    }
  }
  out.detail << "  max |lhs/rhs difference| " << fmt(worst, 3) << "; holds verdicts " << holds
             << ", confirmed by grid search " << confirmed << "\n";
}

// 6. Conjugate update.
void conjugacy(Outcome& out) {
  const BayesConfig cfg;
  const auto post = update({1.0, 1.0, 0}, 0.5, ServerState::idle, ServerState::idle, cfg);
  out.require(post.alpha == 4.0 && post.beta == 1.5, "Gamma(1,1) + idle-idle 0.5 -> Gamma(4,1.5)");
  const auto busy = update({1.0, 1.0, 0}, 0.5, ServerState::busy, ServerState::busy, cfg);
  out.require(busy.alpha == 2.0 && busy.beta == 1.5, "busy-busy -> Gamma(2,1.5)");
  const PosteriorState p{5.0, 2.0, 3};
  const auto m1 = update(p, 0.7, ServerState::busy, ServerState::idle, cfg);
  const auto m2 = update(p, 0.7, ServerState::idle, ServerState::busy, cfg);
  out.require(m1.alpha == 5.0 && m1.beta == 2.0 && m2.alpha == 5.0 && m2.beta == 2.0,
              "mixed states leave the posterior unchanged");
  out.detail << "  Gamma(" << post.alpha << ", " << post.beta << ")\n";
}

// 7. Bayesian convergence on cases A-D.
void bayes_convergence(Outcome& out) {
  struct Case {
    std::string id;
    DistributionSpec s, d;
    double ts;
  };
  std::vector<Case> cases;
  const auto add = [&](const std::string& name, auto make_s, auto make_d) {
    cases.push_back({name + "1", make_s(1.0), make_d(0.33), 1.0});
    cases.push_back({name + "2", make_s(0.5), make_d(0.1667), 0.5});
  };
  const auto ex = [](double m) { return DistributionSpec{Exponential{m}}; };
  const auto un = [](double m) { return DistributionSpec{Uniform{0.0, 2.0 * m}}; };
  add("A", ex, ex);
  add("B", ex, un);
  add("C", un, un);
  add("D", un, ex);
  for (const auto& c : cases) {
    const auto best = optimize(c.s, c.d, ExponentialReward{1.0}, exact_grid(c.ts));
    std::vector<double> g(10), lag(10);
    parallel_for(10, [&](std::size_t k) {
      const auto res = run_adaptive(c.s, c.d, Stationary{}, ExponentialReward{1.0}, 50'000,
                                    BayesConfig{}, k + 1, ReportLastK{5000});
      g[k] = res.reward.value;
      lag[k] = res.posterior.mean_lag();
    });
    double mg = 0.0, ml = 0.0;
    for (int k = 0; k < 10; ++k) mg += g[k] / 10, ml += lag[k] / 10;
    const double rel = (mg - best.best_reward) / best.best_reward;
    out.detail << "  " << c.id << ": G_be " << fmt(mg) << " vs optimum " << fmt(best.best_reward)
               << " at lag " << fmt(best.best_lag) << " (" << fmt(100 * rel, 3)
               << "%), mean posterior lag " << fmt(ml, 3) << "\n";
    out.require(std::abs(rel) <= 0.05, c.id + " within 5%");
  }
}

// 8. Mean-shift tracking.
void mean_shift(Outcome& out) {
  ExperimentSpec base;
  base.id = "shift";
  base.service = Exponential{1.0};
  base.delay = Exponential{0.33};
  base.reward = ExponentialReward{1.0};
  base.methods = {Method::bayes};
  base.n = 50'000;
  base.reporting = ReportSliding{2000, 250};

  auto abrupt = base;
  abrupt.schedule = AbruptPiecewise{{{10'000, 1.0, 0.33}, {40'000, 0.5, 0.1667}}};
  const auto a = mean_shift_run(ShiftKind::abrupt, abrupt, {2000, 250, 1});
  const double seg1 = mean_relative_deviation(a, abrupt.schedule, 0, 10'000, 2000);
  const double seg2 = mean_relative_deviation(a, abrupt.schedule, 10'000, 50'000, 2000);
  out.detail << "  abrupt: segment deviation " << fmt(100 * seg1, 3) << "% / "
             << fmt(100 * seg2, 3) << "% (G_ref " << fmt(a.points.front().g_ref) << " -> "
             << fmt(a.points.back().g_ref) << ")\n";
  out.require(seg1 <= 0.10 && seg2 <= 0.10, "abrupt segments within 10%");

  auto gradual = base;
  gradual.schedule = GradualLinear{1.0, 0.5, 0.33, 0.1667, 50'000};
  const auto g = mean_shift_run(ShiftKind::gradual, gradual, {2000, 250, 1});
  const double dev = mean_relative_deviation(g, gradual.schedule, 5000, 50'000, 0);
  out.detail << "  gradual: mean |G_be - G_ref| / G_ref after job 5000 = " << fmt(100 * dev, 3)
             << "%\n";
  out.require(dev <= 0.10, "gradual ramp within 10%");
}

// 9. Byte-identical CLI artifacts for pinned seeds.
void determinism(Outcome& out) {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "qlag_acceptance_determinism";
  fs::remove_all(root);
  const std::string exp1 = R"(service={"kind":"exponential","mean":1})";
  const std::string d33 = R"(delay={"kind":"exponential","mean":0.33})";
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--seed", "3", "--set", exp1, "--set", d33, "--set", "n=20000", "--set",
       "lag=0.3"},
      {"grid-search", "--seed", "3", "--set", exp1, "--set", d33, "--set", "n=10000", "--set",
       "lag_max=1", "--set", "step=0.1"},
      {"grid-search", "--set", R"(service={"kind":"uniform","lower":0,"upper":2})", "--set",
       R"(delay={"kind":"truncnorm","mu":0.33,"sigma":0.165,"lower":0,"upper":0.66})", "--set",
       "objective=exact", "--set", "lag_max=1", "--set", "step=0.1"},
      {"bayes", "--seed", "3", "--set", exp1, "--set", d33, "--set", "n=20000", "--set",
       R"(reporting={"kind":"sliding","width":2000,"stride":500})"},
      {"check-conditions", "--set", exp1, "--set", R"(delay={"kind":"exponential","mean":0.6})",
       "--set", R"(conditions=["thm1","cor1","thm2"])"},
      {"region-scan", "--set", R"(service_means={"min":0.04,"max":2,"points":20})", "--set",
       R"(delay_means={"min":0.04,"max":2,"points":20})"},
      {"mean-shift", "--seed", "3", "--set", "kind=abrupt", "--set", exp1, "--set", d33, "--set",
       "n=20000", "--set",
       R"(schedule={"kind":"abrupt","segments":[{"length":10000,"service_mean":1,"delay_mean":0.33},{"length":10000,"service_mean":0.5,"delay_mean":0.1667}]})"},
      {"suite", "--seed", "3", "--set",
       R"(experiments=[{"id":"A1","service":{"kind":"exponential","mean":1},"delay":{"kind":"exponential","mean":0.33},"methods":["grid","bayes","exact","surrogate"],"n":20000,"grid":{"n":10000,"lag_max":1,"step":0.25}}])"},
  };
  const auto run = [&](std::vector<std::string> args, const fs::path& dir, const char* threads) {
    ::setenv("QLAG_THREADS", threads, 1);
    args.insert(args.begin() + 1, {"--out", dir.string()});
    args.insert(args.begin(), "qlag");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
    if (code != 0) out.detail << "  " << args[1] << " exited " << code << ": " << e.str();
    return code;
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  int files = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const auto a = root / ("a" + std::to_string(i));
    const auto b = root / ("b" + std::to_string(i));
    const bool ok = run(commands[i], a, "1") == 0 && run(commands[i], b, "4") == 0;
    out.require(ok, commands[i][0] + " ran");
    if (!ok) continue;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      out.require(slurp(entry.path()) == slurp(b / entry.path().filename()),
                  commands[i][0] + "/" + entry.path().filename().string() + " identical");
    }
  }
  ::unsetenv("QLAG_THREADS");
  fs::remove_all(root);
  out.detail << "  " << commands.size() << " commands, " << files
             << " artifacts compared (1 vs 4 threads)\n";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "wait slope equals -P(S-D>lag)", 30, wait_slope},
      {2, "simulator agrees with the closed forms", 60, simulator_oracle},
      {3, "surrogate upper-bounds the simulated reward", 300, surrogate_bound},
      {4, "surrogate condition 1 and region boundary", 120, surrogate_condition},
      {5, "optimality checks: dual paths and grid confirmation", 600, optimality_consistency},
      {6, "conjugate posterior update", 1, conjugacy},
      {7, "bayesian reward within 5% of the optimum (cases A-D)", 600, bayes_convergence},
      {8, "mean-shift tracking", 600, mean_shift},
      {9, "byte-identical CLI artifacts", 60, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs <= c.budget_s, "runtime " + fmt(secs, 3) + " s over budget " +
                                        fmt(c.budget_s) + " s");
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " ["
              << fmt(secs, 3) << " s]\n"
              << out.detail.str() << std::flush;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
