#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <variant>

#include "qlag/distributions.hpp"
#include "qlag/reward.hpp"

namespace qlag {

// Stationary quantities of the lag policy:
//
//   W = max(S_{-1} - lag - D, 0)
//   G = E[f(W + S)] / (lag + E[D] + E[W])
//
// with S_{-1}, S, D independent and S_{-1} ~ S.

struct ClosedForm {};
struct NumericIntegration {
  double tol = 1e-9;
};
struct MonteCarlo {
  std::size_t n = 10'000'000;
  std::uint64_t seed = 0;
};
using EvalMethod = std::variant<ClosedForm, NumericIntegration, MonteCarlo>;

void validate(const EvalMethod& method);

class ClosedFormUnavailableError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic methods
  bool converged = true;
};

bool closed_form_wait_available(const DistributionSpec& service, const DistributionSpec& delay);

/// E[max(S - D - offset, 0)] for any real offset. Negative offsets are not a
/// lag a policy can apply but keep the function differentiable through 0.
Estimate expected_positive_part(const DistributionSpec& service, const DistributionSpec& delay,
                                double offset, const EvalMethod& method);

/// E[W] at a lag >= 0.
Estimate expected_wait(const DistributionSpec& service, const DistributionSpec& delay, double lag,
                       const EvalMethod& method);

struct WaitDerivative {
  double value = 0.0;
  /// S - D has an atom at `lag`; the derivative is one-sided there.
  bool kink = false;
};

/// dE[W]/dlag = -P(S - D > lag).
WaitDerivative wait_derivative(const DistributionSpec& service, const DistributionSpec& delay,
                               double lag);

bool closed_form_reward_available(const DistributionSpec& service, const DistributionSpec& delay,
                                  const RewardSpec& f);

/// G at a fixed lag. ClosedForm covers exponential service and delay under the
/// exponential reward, and point-mass pairs under either reward.
Estimate reward_exact(const DistributionSpec& service, const DistributionSpec& delay,
                      const RewardSpec& f, double lag, const EvalMethod& method);

/// Numeric evaluation of G reusable across lags.
///
/// E[f(W+S)] is computed by conditioning on (S_{-1}, D):
/// h(w) = E_S[f(w + S)] is tabulated on 2048 points over [0, q_0.999(S)] and
/// interpolated with a cubic B-spline; a coarser table covers the tail up to
/// the integration bound and direct quadrature takes over beyond it.
class ExactRewardEvaluator {
 public:
  ExactRewardEvaluator(DistributionSpec service, DistributionSpec delay, RewardSpec f);
  ~ExactRewardEvaluator();
  ExactRewardEvaluator(ExactRewardEvaluator&&) noexcept;
  ExactRewardEvaluator& operator=(ExactRewardEvaluator&&) noexcept;

  /// E[f(W + S)] at `lag`.
  NumericResult numerator(double lag) const;
  /// G at `lag`.
  Estimate operator()(double lag) const;
  /// h(w) = E_S[f(w + S)].
  double conditional_reward(double w) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Upper bound on G for f = exp(-kappa T):
///   M_S(-k) min(M_S(-k) e^{k lag} M_D(k), 1) / (lag + E[D] + E[W](lag)).
/// Throws DivergentMgfError when M_D(kappa) does not exist.
double surrogate_reward(const DistributionSpec& service, const DistributionSpec& delay,
                        double kappa, double lag);

/// Smallest lag at which M_S(-k) M_D(k) e^{k lag} reaches 1; 0 when the product
/// already is >= 1.
double delta_star(const DistributionSpec& service, const DistributionSpec& delay, double kappa);

}  // namespace qlag
