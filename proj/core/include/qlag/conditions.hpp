#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qlag/distributions.hpp"
#include "qlag/reward.hpp"

namespace qlag {

// Sufficient conditions for the no-lag policy (lag = 0) to be optimal. A
// `fails` verdict says nothing about the optimum.

enum class ConditionId { thm1_general, cor1_exponential, cor2_polynomial, thm2_cond1, thm2_cond2 };
enum class Verdict { holds, fails, indeterminate };
/// How lhs is compared against rhs for the condition to hold.
enum class Comparison { less_equal, less, greater_equal };

std::string_view to_string(ConditionId id);
std::string_view to_string(Verdict v);
std::string_view to_string(Comparison c);

struct ConditionReport {
  ConditionId condition_id = ConditionId::thm1_general;
  double lhs = 0.0;
  double rhs = 0.0;  // +inf when P(S - D > 0) = 0
  Comparison comparison = Comparison::less_equal;
  Verdict verdict = Verdict::indeterminate;
  /// The lag^2 * P(S - D > lag) monotonicity assumption behind the general
  /// bound was verified on the default probe grid.
  bool assumption_checked = false;
  std::string notes;
};

struct AssumptionCheck {
  bool holds = true;
  /// Largest increase of lag^2 * P(S - D > lag) between adjacent probes.
  double worst_increase = 0.0;
  double worst_from = 0.0;
  double worst_to = 0.0;
};

/// 64 log-spaced probes in (1, 20].
std::vector<double> default_probe_grid();

/// lag^2 * P(S - D > lag) is non-increasing across `probe_grid` to within 1e-6.
/// The grid must be sorted, lie in (1, inf) and hold at least 20 points.
AssumptionCheck verify_assumption(const DistributionSpec& service, const DistributionSpec& delay,
                                  const std::vector<double>& probe_grid);

/// E[D+S+1] sqrt(E[f'(S)^2]) / E[f(S+S_{-1})] <= 1/sqrt(p) - sqrt(p),
/// p = P(S_{-1} - D > 0).
ConditionReport check_general(const DistributionSpec& service, const DistributionSpec& delay,
                              const RewardFunction& f);
ConditionReport check_general(const DistributionSpec& service, const DistributionSpec& delay,
                              const RewardSpec& f);

/// kappa E[D+S+1] sqrt(M_S(-2k)) / M_S(-k)^2 <= 1/sqrt(p) - sqrt(p).
ConditionReport check_exponential(const DistributionSpec& service, const DistributionSpec& delay,
                                  double kappa);

/// gamma E[D+S+1] sqrt(E[(S+1)^(-2g-2)]) / E[(S+S_{-1}+1)^(-g)] <= 1/sqrt(p) - sqrt(p).
ConditionReport check_polynomial(const DistributionSpec& service, const DistributionSpec& delay,
                                 double gamma);

/// Conditions under which the surrogate is maximized at lag 0:
///   (1) M_S(-k) M_D(k) >= 1
///   (2) (1/k) ln(1/(M_D(k) M_S(-k))) + E[D] + E[W]|_{lag=0} < (1/k) P(D > S)
/// Both reports are indeterminate when M_D(k) diverges.
std::pair<ConditionReport, ConditionReport> check_surrogate(const DistributionSpec& service,
                                                            const DistributionSpec& delay,
                                                            double kappa);

enum class LawFamily { exponential, uniform };
enum class ScanMode { thm2_cond1, cor1 };

std::string_view to_string(LawFamily f);
std::string_view to_string(ScanMode m);

/// Law of the family with the given mean; uniform laws are Uniform(0, 2 mean).
DistributionSpec law_with_mean(LawFamily family, double mean);

struct RegionScan {
  std::vector<double> service_means;
  std::vector<double> delay_means;
  /// verdicts[i * delay_means.size() + k] for (service_means[i], delay_means[k]).
  std::vector<Verdict> verdicts;

  Verdict at(std::size_t i, std::size_t k) const { return verdicts[i * delay_means.size() + k]; }
};

RegionScan region_scan(const std::vector<double>& service_means,
                       const std::vector<double>& delay_means, double kappa, ScanMode mode,
                       LawFamily service_family = LawFamily::exponential,
                       LawFamily delay_family = LawFamily::exponential);

/// CSV with header `t_s,t_d,verdict`, row-major over service means.
void write_region_csv(std::ostream& os, const RegionScan& scan);

}  // namespace qlag
