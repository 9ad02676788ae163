#include "qlag/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "quadrature.hpp"

namespace qlag {
namespace {

constexpr std::size_t kConditionalGridPoints = 2048;
constexpr double kConditionalGridQuantile = 0.999;
// Coarser table from the 0.999 quantile out to the integration cutoff.
constexpr std::size_t kTailGridPoints = 512;

// E[(U - offset)^+] for U = S - D with S, D exponential.
double exp_pair_positive_part(const Exponential& s, const Exponential& d, double offset) {
  const double rate_s = 1.0 / s.mean;
  const double rate_d = 1.0 / d.mean;
  if (offset >= 0.0) return rate_d / (rate_s + rate_d) * std::exp(-rate_s * offset) / rate_s;
  // (x)^+ = x + (-x)^+ with the roles of S and D swapped in the tail term.
  return (s.mean - d.mean) - offset +
         rate_s / (rate_s + rate_d) * std::exp(rate_d * offset) / rate_d;
}

Estimate best_wait(const DistributionSpec& service, const DistributionSpec& delay, double lag) {
  if (closed_form_wait_available(service, delay))
    return expected_positive_part(service, delay, lag, ClosedForm{});
  return expected_positive_part(service, delay, lag, NumericIntegration{});
}

// (mean, std error) of samples produced by `draw`.
template <class Draw>
Estimate monte_carlo_mean(std::size_t n, Draw&& draw) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    sum_sq += x * x;
  }
  const double dn = static_cast<double>(n);
  const double m = sum / dn;
  const double var = std::max(0.0, (sum_sq - dn * m * m) / (dn - 1.0));
  return {m, std::sqrt(var / dn), true};
}

}  // namespace

void validate(const EvalMethod& method) {
  if (const auto* q = std::get_if<NumericIntegration>(&method)) {
    if (!(q->tol > 0.0)) throw std::invalid_argument("integration tolerance must be positive");
  } else if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
    if (mc->n < 10'000) throw std::invalid_argument("Monte-Carlo needs at least 1e4 samples");
  }
}

bool closed_form_wait_available(const DistributionSpec& service, const DistributionSpec& delay) {
  return (is_exponential(service) && is_exponential(delay)) || is_point_mass(service) ||
         is_point_mass(delay);
}

Estimate expected_positive_part(const DistributionSpec& service, const DistributionSpec& delay,
                                double offset, const EvalMethod& method) {
  validate(method);
  if (std::holds_alternative<ClosedForm>(method)) {
    if (const auto* s = std::get_if<Exponential>(&service)) {
      if (const auto* d = std::get_if<Exponential>(&delay))
        return {exp_pair_positive_part(*s, *d, offset), 0.0, true};
    }
    if (const auto* d = std::get_if<Deterministic>(&delay))
      return {excess_mean(service, d->value + offset), 0.0, true};
    if (const auto* s = std::get_if<Deterministic>(&service)) {
      // E[(a - D)^+] = a - E[D] + E[(D - a)^+]
      const double a = s->value - offset;
      return {std::max(0.0, a - mean(delay) + excess_mean(delay, a)), 0.0, true};
    }
    throw ClosedFormUnavailableError("no closed form for E[W] with " + describe(service) +
                                     " service and " + describe(delay) + " delay");
  }

  if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
    auto s_rng = RandomStream::derive(mc->seed, {"expected_wait", "service"});
    auto d_rng = RandomStream::derive(mc->seed, {"expected_wait", "delay"});
    return monte_carlo_mean(mc->n, [&] {
      const double s = sample(service, s_rng);
      const double d = sample(delay, d_rng);
      return std::max(s - d - offset, 0.0);
    });
  }

  // Condition on D and use the closed-form stop-loss transform of S.
  if (const auto* d = std::get_if<Deterministic>(&delay))
    return {excess_mean(service, d->value + offset), 0.0, true};
  const Support s = support(service);
  std::vector<double> breaks{s.lower - offset};
  if (std::isfinite(s.upper)) breaks.push_back(s.upper - offset);
  const auto r = detail::integrate(
      [&](double y) { return pdf(delay, y) * excess_mean(service, y + offset); },
      support(delay).lower, integration_upper(delay), breaks);
  return {r.value, 0.0, r.converged};
}

Estimate expected_wait(const DistributionSpec& service, const DistributionSpec& delay, double lag,
                       const EvalMethod& method) {
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be >= 0");
  return expected_positive_part(service, delay, lag, method);
}

WaitDerivative wait_derivative(const DistributionSpec& service, const DistributionSpec& delay,
                               double lag) {
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be >= 0");
  WaitDerivative out;
  out.value = -prob_diff_exceeds(service, delay, lag);
  if (const auto* s = std::get_if<Deterministic>(&service)) {
    if (const auto* d = std::get_if<Deterministic>(&delay)) out.kink = (s->value - d->value == lag);
  }
  return out;
}

bool closed_form_reward_available(const DistributionSpec& service, const DistributionSpec& delay,
                                  const RewardSpec& f) {
  if (is_point_mass(service) && is_point_mass(delay)) return true;
  return is_exponential(service) && is_exponential(delay) &&
         std::holds_alternative<ExponentialReward>(f);
}

Estimate reward_exact(const DistributionSpec& service, const DistributionSpec& delay,
                      const RewardSpec& f, double lag, const EvalMethod& method) {
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be >= 0");
  validate(method);

  if (std::holds_alternative<ClosedForm>(method)) {
    if (!closed_form_reward_available(service, delay, f))
      throw ClosedFormUnavailableError("no closed form for G with " + describe(service) +
                                       " service, " + describe(delay) + " delay and reward " +
                                       describe(f));
    if (is_point_mass(service)) {
      const double s = std::get<Deterministic>(service).value;
      const double d = std::get<Deterministic>(delay).value;
      const double w = std::max(s - lag - d, 0.0);
      return {eval(f, w + s) / (lag + d + w), 0.0, true};
    }
    // Exponential pair: given W > 0, W is Exp(rate_s) by memorylessness, so
    // M_W(-k) = 1 - p + p rate_s / (rate_s + k) with p = P(S - D > lag).
    const auto& s = std::get<Exponential>(service);
    const auto& d = std::get<Exponential>(delay);
    const double kappa = std::get<ExponentialReward>(f).kappa;
    const double rate_s = 1.0 / s.mean;
    const double p = prob_diff_exceeds(service, delay, lag);
    const double mw = 1.0 - p + p * rate_s / (rate_s + kappa);
    const double ew = exp_pair_positive_part(s, d, lag);
    return {mgf(service, -kappa) * mw / (lag + d.mean + ew), 0.0, true};
  }

  if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
    // Independent triples (S_{-1}, D, S); ratio estimator with delta-method error.
    auto prev_rng = RandomStream::derive(mc->seed, {"reward_exact", "previous_service"});
    auto d_rng = RandomStream::derive(mc->seed, {"reward_exact", "delay"});
    auto s_rng = RandomStream::derive(mc->seed, {"reward_exact", "service"});
    double a_sum = 0.0, b_sum = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < mc->n; ++i) {
      const double prev = sample(service, prev_rng);
      const double d = sample(delay, d_rng);
      const double s = sample(service, s_rng);
      const double w = std::max(prev - lag - d, 0.0);
      const double a = eval(f, w + s);
      const double b = lag + d + w;
      a_sum += a;
      b_sum += b;
      aa += a * a;
      bb += b * b;
      ab += a * b;
    }
    const double n = static_cast<double>(mc->n);
    const double ma = a_sum / n;
    const double mb = b_sum / n;
    const double g = ma / mb;
    const double var_a = (aa - n * ma * ma) / (n - 1.0);
    const double var_b = (bb - n * mb * mb) / (n - 1.0);
    const double cov = (ab - n * ma * mb) / (n - 1.0);
    const double var_resid = std::max(0.0, var_a - 2.0 * g * cov + g * g * var_b);
    return {g, std::sqrt(var_resid / n) / mb, true};
  }

  return ExactRewardEvaluator(service, delay, f)(lag);
}

struct ExactRewardEvaluator::Impl {
  DistributionSpec service;
  DistributionSpec delay;
  RewardSpec f;
  double grid_end = 0.0;
  double tail_end = 0.0;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> tail;

  double direct_h(double w) const {
    return expectation(service, [&](double x) { return eval(f, w + x); }).value;
  }

  double h(double w) const {
    if (!spline) return direct_h(w);
    if (w <= grid_end) return (*spline)(w);
    if (tail && w <= tail_end) return (*tail)(w);
    return direct_h(w);
  }

  // E over S_{-1} of h(max(S_{-1} - c, 0)) for a fixed c = lag + D.
  double inner(double c) const {
    if (const auto* s = std::get_if<Deterministic>(&service)) return h(std::max(s->value - c, 0.0));
    const double lo = std::max(c, support(service).lower);
    const double hi = integration_upper(service);
    const double idle_part = h(0.0) * cdf(service, c);
    const auto busy =
        detail::integrate([&](double s) { return h(s - c) * pdf(service, s); }, lo, hi);
    return idle_part + busy.value;
  }
};

ExactRewardEvaluator::ExactRewardEvaluator(DistributionSpec service, DistributionSpec delay,
                                           RewardSpec f)
    : impl_(std::make_unique<Impl>()) {
  validate(service);
  validate(delay);
  validate(f);
  impl_->service = std::move(service);
  impl_->delay = std::move(delay);
  impl_->f = f;
  if (!is_point_mass(impl_->service)) {
    impl_->grid_end = quantile(impl_->service, kConditionalGridQuantile);
    const double step = impl_->grid_end / static_cast<double>(kConditionalGridPoints - 1);
    std::vector<double> values(kConditionalGridPoints);
    for (std::size_t i = 0; i < kConditionalGridPoints; ++i)
      values[i] = impl_->direct_h(static_cast<double>(i) * step);
    impl_->spline = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.begin(), values.end(), 0.0, step);

    impl_->tail_end = integration_upper(impl_->service);
    if (impl_->tail_end > impl_->grid_end) {
      const double tail_step =
          (impl_->tail_end - impl_->grid_end) / static_cast<double>(kTailGridPoints - 1);
      std::vector<double> tail_values(kTailGridPoints);
      for (std::size_t i = 0; i < kTailGridPoints; ++i)
        tail_values[i] = impl_->direct_h(impl_->grid_end + static_cast<double>(i) * tail_step);
      impl_->tail =
          std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
              tail_values.begin(), tail_values.end(), impl_->grid_end, tail_step);
    }
  }
}

ExactRewardEvaluator::~ExactRewardEvaluator() = default;
ExactRewardEvaluator::ExactRewardEvaluator(ExactRewardEvaluator&&) noexcept = default;
ExactRewardEvaluator& ExactRewardEvaluator::operator=(ExactRewardEvaluator&&) noexcept = default;

double ExactRewardEvaluator::conditional_reward(double w) const { return impl_->h(w); }

NumericResult ExactRewardEvaluator::numerator(double lag) const {
  const auto& d = impl_->delay;
  if (const auto* dd = std::get_if<Deterministic>(&d)) return {impl_->inner(lag + dd->value), 0, true};
  const Support s = support(impl_->service);
  std::vector<double> breaks{s.lower - lag};
  if (std::isfinite(s.upper)) breaks.push_back(s.upper - lag);
  return detail::integrate([&](double y) { return pdf(d, y) * impl_->inner(lag + y); },
                           support(d).lower, integration_upper(d), breaks);
}

Estimate ExactRewardEvaluator::operator()(double lag) const {
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be >= 0");
  const auto num = numerator(lag);
  const auto ew = best_wait(impl_->service, impl_->delay, lag);
  return {num.value / (lag + mean(impl_->delay) + ew.value), 0.0, num.converged && ew.converged};
}

double surrogate_reward(const DistributionSpec& service, const DistributionSpec& delay,
                        double kappa, double lag) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be >= 0");
  const double ms = mgf(service, -kappa);
  const double md = mgf(delay, kappa);
  const double bound = std::min(ms * std::exp(kappa * lag) * md, 1.0);
  const double ew = best_wait(service, delay, lag).value;
  return ms * bound / (lag + mean(delay) + ew);
}

double delta_star(const DistributionSpec& service, const DistributionSpec& delay, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  const double product = mgf(service, -kappa) * mgf(delay, kappa);
  if (product >= 1.0) return 0.0;
  return std::log(1.0 / product) / kappa;
}

}  // namespace qlag
