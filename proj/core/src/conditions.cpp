#include "qlag/conditions.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qlag/analytics.hpp"
#include "qlag/format.hpp"
#include "qlag/parallel.hpp"

namespace qlag {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAssumptionTol = 1e-6;
// Relative slack on M_S(-k) M_D(k) >= 1 so products that equal 1 analytically
// but round a few ulps low still count as on the boundary.
constexpr double kProductSlack = 1e-12;

double sqrt_p_gap(double p) { return p > 0.0 ? 1.0 / std::sqrt(p) - std::sqrt(p) : kInf; }

Verdict compare(double lhs, double rhs, Comparison c) {
  if (std::isnan(lhs) || std::isnan(rhs)) return Verdict::indeterminate;
  switch (c) {
    case Comparison::less_equal:
      return lhs <= rhs ? Verdict::holds : Verdict::fails;
    case Comparison::less:
      return lhs < rhs ? Verdict::holds : Verdict::fails;
    case Comparison::greater_equal:
      return lhs >= rhs * (1.0 - kProductSlack) ? Verdict::holds : Verdict::fails;
  }
  return Verdict::indeterminate;
}

// Shared tail of the general-family conditions: fills rhs, verdict and the
// assumption flag once lhs is known.
ConditionReport finish_general(ConditionId id, const DistributionSpec& service,
                               const DistributionSpec& delay, double lhs, bool converged,
                               std::string notes) {
  ConditionReport r;
  r.condition_id = id;
  r.comparison = Comparison::less_equal;
  const double p = prob_diff_exceeds(service, delay, 0.0);
  r.lhs = lhs;
  r.rhs = sqrt_p_gap(p);
  r.verdict = converged ? compare(r.lhs, r.rhs, r.comparison) : Verdict::indeterminate;
  r.assumption_checked = verify_assumption(service, delay, default_probe_grid()).holds;
  if (!converged) notes += (notes.empty() ? "" : "; ") + std::string("quadrature missed tolerance");
  if (p == 0.0) notes += (notes.empty() ? "" : "; ") + std::string("P(S-D>0)=0: rhs unbounded");
  r.notes = std::move(notes);
  return r;
}

}  // namespace

std::string_view to_string(ConditionId id) {
  switch (id) {
    case ConditionId::thm1_general:
      return "thm1_general";
    case ConditionId::cor1_exponential:
      return "cor1_exponential";
    case ConditionId::cor2_polynomial:
      return "cor2_polynomial";
    case ConditionId::thm2_cond1:
      return "thm2_cond1";
    case ConditionId::thm2_cond2:
      return "thm2_cond2";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::fails:
      return "fails";
    case Verdict::indeterminate:
      return "indeterminate";
  }
  return "?";
}

std::string_view to_string(Comparison c) {
  switch (c) {
    case Comparison::less_equal:
      return "<=";
    case Comparison::less:
      return "<";
    case Comparison::greater_equal:
      return ">=";
  }
  return "?";
}

std::vector<double> default_probe_grid() {
  constexpr int kPoints = 64;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i)
    grid[i] = std::exp(std::log(20.0) * static_cast<double>(i + 1) / kPoints);
  grid.back() = 20.0;
  return grid;
}

AssumptionCheck verify_assumption(const DistributionSpec& service, const DistributionSpec& delay,
                                  const std::vector<double>& probe_grid) {
  if (probe_grid.size() < 20) throw std::invalid_argument("probe grid needs at least 20 points");
  for (std::size_t i = 0; i < probe_grid.size(); ++i) {
    if (!(probe_grid[i] > 1.0)) throw std::invalid_argument("probe grid must lie in (1, inf)");
    if (i > 0 && !(probe_grid[i] > probe_grid[i - 1]))
      throw std::invalid_argument("probe grid must be strictly increasing");
  }
  AssumptionCheck out;
  double prev = probe_grid[0] * probe_grid[0] * prob_diff_exceeds(service, delay, probe_grid[0]);
  for (std::size_t i = 1; i < probe_grid.size(); ++i) {
    const double x = probe_grid[i];
    const double cur = x * x * prob_diff_exceeds(service, delay, x);
    const double increase = cur - prev;
    if (increase > out.worst_increase) {
      out.worst_increase = increase;
      out.worst_from = probe_grid[i - 1];
      out.worst_to = x;
    }
    prev = cur;
  }
  out.holds = out.worst_increase <= kAssumptionTol;
  return out;
}

ConditionReport check_general(const DistributionSpec& service, const DistributionSpec& delay,
                              const RewardFunction& f) {
  validate(service);
  validate(delay);
  const auto slope_sq =
      expectation(service, [&](double x) { const double d = f.derivative(x); return d * d; });
  bool inner_ok = true;
  const auto pair_reward = expectation(service, [&](double x) {
    const auto inner = expectation(service, [&](double y) { return f.value(x + y); });
    inner_ok = inner_ok && inner.converged;
    return inner.value;
  });
  const double scale = mean(delay) + mean(service) + 1.0;
  const double lhs = scale * std::sqrt(slope_sq.value) / pair_reward.value;
  return finish_general(ConditionId::thm1_general, service, delay, lhs,
                        slope_sq.converged && pair_reward.converged && inner_ok,
                        "f = " + f.name);
}

ConditionReport check_general(const DistributionSpec& service, const DistributionSpec& delay,
                              const RewardSpec& f) {
  validate(f);
  return check_general(service, delay, as_function(f));
}

ConditionReport check_exponential(const DistributionSpec& service, const DistributionSpec& delay,
                                  double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  validate(service);
  validate(delay);
  const double m1 = mgf(service, -kappa);
  const double m2 = mgf(service, -2.0 * kappa);
  const double lhs = kappa * (mean(delay) + mean(service) + 1.0) * std::sqrt(m2) / (m1 * m1);
  return finish_general(ConditionId::cor1_exponential, service, delay, lhs, std::isfinite(lhs),
                        "");
}

ConditionReport check_polynomial(const DistributionSpec& service, const DistributionSpec& delay,
                                 double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  validate(service);
  validate(delay);
  const auto neg_moment =
      expectation(service, [&](double x) { return std::pow(x + 1.0, -2.0 * gamma - 2.0); });
  bool inner_ok = true;
  const auto pair_moment = expectation(service, [&](double x) {
    const auto inner =
        expectation(service, [&](double y) { return std::pow(x + y + 1.0, -gamma); });
    inner_ok = inner_ok && inner.converged;
    return inner.value;
  });
  const double lhs = gamma * (mean(delay) + mean(service) + 1.0) * std::sqrt(neg_moment.value) /
                     pair_moment.value;
  return finish_general(ConditionId::cor2_polynomial, service, delay, lhs,
                        neg_moment.converged && pair_moment.converged && inner_ok, "");
}

std::pair<ConditionReport, ConditionReport> check_surrogate(const DistributionSpec& service,
                                                            const DistributionSpec& delay,
                                                            double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  validate(service);
  validate(delay);
  ConditionReport c1;
  c1.condition_id = ConditionId::thm2_cond1;
  c1.comparison = Comparison::greater_equal;
  c1.rhs = 1.0;
  ConditionReport c2;
  c2.condition_id = ConditionId::thm2_cond2;
  c2.comparison = Comparison::less;

  double product = 0.0;
  try {
    product = mgf(service, -kappa) * mgf(delay, kappa);
  } catch (const DivergentMgfError& e) {
    c1.lhs = c2.lhs = c2.rhs = std::numeric_limits<double>::quiet_NaN();
    c1.verdict = c2.verdict = Verdict::indeterminate;
    c1.notes = c2.notes = std::string("M_D(kappa) diverges: ") + e.what();
    return {c1, c2};
  }
  c1.lhs = product;
  c1.verdict = compare(c1.lhs, c1.rhs, c1.comparison);

  const auto ew0 = closed_form_wait_available(service, delay)
                       ? expected_wait(service, delay, 0.0, ClosedForm{})
                       : expected_wait(service, delay, 0.0, NumericIntegration{});
  const double p_delay_wins = 1.0 - prob_diff_exceeds(service, delay, 0.0);
  c2.lhs = std::log(1.0 / product) / kappa + mean(delay) + ew0.value;
  c2.rhs = p_delay_wins / kappa;
  c2.verdict = ew0.converged ? compare(c2.lhs, c2.rhs, c2.comparison) : Verdict::indeterminate;
  if (is_point_mass(service) && is_point_mass(delay) &&
      std::get<Deterministic>(service).value == std::get<Deterministic>(delay).value)
    c2.notes = "S - D has an atom at 0; ties counted into P(D >= S)";
  return {c1, c2};
}

std::string_view to_string(LawFamily f) {
  return f == LawFamily::exponential ? "exponential" : "uniform";
}

std::string_view to_string(ScanMode m) { return m == ScanMode::thm2_cond1 ? "thm2_cond1" : "cor1"; }

DistributionSpec law_with_mean(LawFamily family, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("mean must be positive");
  if (family == LawFamily::exponential) return Exponential{m};
  return Uniform{0.0, 2.0 * m};
}

RegionScan region_scan(const std::vector<double>& service_means,
                       const std::vector<double>& delay_means, double kappa, ScanMode mode,
                       LawFamily service_family, LawFamily delay_family) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  RegionScan scan;
  scan.service_means = service_means;
  scan.delay_means = delay_means;
  scan.verdicts.assign(service_means.size() * delay_means.size(), Verdict::indeterminate);
  const std::size_t cols = delay_means.size();
  parallel_for(scan.verdicts.size(), [&](std::size_t cell) {
    const auto service = law_with_mean(service_family, service_means[cell / cols]);
    const auto delay = law_with_mean(delay_family, delay_means[cell % cols]);
    scan.verdicts[cell] = mode == ScanMode::thm2_cond1
                              ? check_surrogate(service, delay, kappa).first.verdict
                              : check_exponential(service, delay, kappa).verdict;
  });
  return scan;
}

void write_region_csv(std::ostream& os, const RegionScan& scan) {
  os << "t_s,t_d,verdict\n";
  for (std::size_t i = 0; i < scan.service_means.size(); ++i)
    for (std::size_t k = 0; k < scan.delay_means.size(); ++k)
      os << format_number(scan.service_means[i]) << ',' << format_number(scan.delay_means[k])
         << ',' << to_string(scan.at(i, k)) << '\n';
}

}  // namespace qlag
