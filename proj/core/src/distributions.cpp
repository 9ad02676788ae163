#include "qlag/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "quadrature.hpp"

namespace qlag {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const boost::math::normal_distribution<double>& standard_normal() {
  static const boost::math::normal_distribution<double> n(0.0, 1.0);
  return n;
}

double phi(double z) { return boost::math::pdf(standard_normal(), z); }
double Phi(double z) { return boost::math::cdf(standard_normal(), z); }
double Q(double z) { return boost::math::cdf(boost::math::complement(standard_normal(), z)); }

// Standardized window of a truncated normal. Probabilities are taken from the
// tail that keeps precision when the window sits far from mu.
struct TruncWindow {
  double alpha;
  double beta;
  bool right_tail;  // window lies above mu: use upper-tail probabilities
  double mass;

  explicit TruncWindow(const TruncatedNormal& t)
      : alpha((t.lower - t.mu) / t.sigma),
        beta((t.upper - t.mu) / t.sigma),
        right_tail(alpha > 0.0),
        mass(right_tail ? Q(alpha) - Q(beta) : Phi(beta) - Phi(alpha)) {}

  // P(alpha < Z <= z), z clamped into the window.
  double mass_below(double z) const {
    z = std::clamp(z, alpha, beta);
    return right_tail ? Q(alpha) - Q(z) : Phi(z) - Phi(alpha);
  }
  // P(z < Z <= beta)
  double mass_above(double z) const {
    z = std::clamp(z, alpha, beta);
    return right_tail ? Q(z) - Q(beta) : Phi(beta) - Phi(z);
  }
};

double trunc_mean(const TruncatedNormal& t) {
  const TruncWindow w(t);
  return t.mu + t.sigma * (phi(w.alpha) - phi(w.beta)) / w.mass;
}

double trunc_quantile(const TruncatedNormal& t, double p) {
  const TruncWindow w(t);
  double z;
  if (w.right_tail) {
    const double q = Q(w.alpha) - p * w.mass;
    z = boost::math::quantile(boost::math::complement(standard_normal(), std::max(q, 1e-300)));
  } else {
    const double c = Phi(w.alpha) + p * w.mass;
    z = boost::math::quantile(standard_normal(), std::clamp(c, 1e-300, 1.0 - 1e-16));
  }
  return std::clamp(t.mu + t.sigma * z, t.lower, t.upper);
}

double exponential_quantile(double mean, double p) { return -mean * std::log1p(-p); }

// Interior points where an integrand built from the law's cdf or pdf bends.
std::array<double, 2> kinks(const DistributionSpec& spec) {
  const Support s = support(spec);
  return {s.lower, std::isfinite(s.upper) ? s.upper : s.lower};
}

double prob_diff_exceeds_mc(const DistributionSpec& service, const DistributionSpec& delay,
                            double x) {
  constexpr std::size_t kDraws = 10'000'000;
  auto s_rng = RandomStream::derive(0x51a7e, {"prob_diff_exceeds", "service"});
  auto d_rng = RandomStream::derive(0x51a7e, {"prob_diff_exceeds", "delay"});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double s = sample(service, s_rng);
    const double d = sample(delay, d_rng);
    if (s - d > x) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(kDraws);
}

}  // namespace

void validate(const DistributionSpec& spec) {
  std::visit(
      overloaded{
          [](const Exponential& e) {
            if (!(e.mean > 0.0) || !std::isfinite(e.mean))
              throw std::invalid_argument("exponential mean must be positive and finite");
          },
          [](const Uniform& u) {
            if (!(u.lower >= 0.0)) throw std::invalid_argument("uniform lower must be >= 0");
            if (!(u.upper > u.lower) || !std::isfinite(u.upper))
              throw std::invalid_argument("uniform upper must be finite and > lower");
          },
          [](const TruncatedNormal& t) {
            if (!std::isfinite(t.mu)) throw std::invalid_argument("truncnorm mu must be finite");
            if (!(t.sigma > 0.0) || !std::isfinite(t.sigma))
              throw std::invalid_argument("truncnorm sigma must be positive");
            if (!(t.lower >= 0.0)) throw std::invalid_argument("truncnorm lower must be >= 0");
            if (!(t.upper > t.lower) || !std::isfinite(t.upper))
              throw std::invalid_argument("truncnorm upper must be finite and > lower");
            if (!(TruncWindow(t).mass > 0.0))
              throw std::invalid_argument("truncnorm window carries no probability mass");
          },
          [](const Deterministic& d) {
            if (!(d.value >= 0.0) || !std::isfinite(d.value))
              throw std::invalid_argument("deterministic value must be finite and >= 0");
          },
      },
      spec);
}

std::string_view kind_name(const DistributionSpec& spec) {
  return std::visit(overloaded{
                        [](const Exponential&) { return std::string_view("exponential"); },
                        [](const Uniform&) { return std::string_view("uniform"); },
                        [](const TruncatedNormal&) { return std::string_view("truncnorm"); },
                        [](const Deterministic&) { return std::string_view("deterministic"); },
                    },
                    spec);
}

std::string describe(const DistributionSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Exponential& e) { os << "Exponential(mean=" << e.mean << ")"; },
                 [&](const Uniform& u) { os << "Uniform(" << u.lower << ", " << u.upper << ")"; },
                 [&](const TruncatedNormal& t) {
                   os << "TruncatedNormal(mu=" << t.mu << ", sigma=" << t.sigma << ", ["
                      << t.lower << ", " << t.upper << "])";
                 },
                 [&](const Deterministic& d) { os << "Deterministic(" << d.value << ")"; },
             },
             spec);
  return os.str();
}

bool is_point_mass(const DistributionSpec& spec) {
  return std::holds_alternative<Deterministic>(spec);
}

bool is_exponential(const DistributionSpec& spec) {
  return std::holds_alternative<Exponential>(spec);
}

double sample(const DistributionSpec& spec, RandomStream& rng) {
  return std::visit(overloaded{
                        [&](const Exponential& e) { return -e.mean * std::log(rng.uniform()); },
                        [&](const Uniform& u) {
                          return u.lower + (u.upper - u.lower) * rng.uniform();
                        },
                        [&](const TruncatedNormal& t) { return trunc_quantile(t, rng.uniform()); },
                        [](const Deterministic& d) { return d.value; },
                    },
                    spec);
}

double mean(const DistributionSpec& spec) {
  return std::visit(overloaded{
                        [](const Exponential& e) { return e.mean; },
                        [](const Uniform& u) { return 0.5 * (u.lower + u.upper); },
                        [](const TruncatedNormal& t) { return trunc_mean(t); },
                        [](const Deterministic& d) { return d.value; },
                    },
                    spec);
}

bool mgf_exists(const DistributionSpec& spec, double a) {
  if (const auto* e = std::get_if<Exponential>(&spec)) return a * e->mean < 1.0;
  return true;
}

double mgf(const DistributionSpec& spec, double a) {
  if (a == 0.0) return 1.0;
  return std::visit(
      overloaded{
          [a](const Exponential& e) {
            if (a * e.mean >= 1.0) {
              std::ostringstream os;
              os << "E[exp(aX)] diverges for exponential mean " << e.mean << " at a = " << a;
              throw DivergentMgfError(os.str());
            }
            return 1.0 / (1.0 - a * e.mean);
          },
          [a](const Uniform& u) {
            const double width = u.upper - u.lower;
            return std::exp(a * u.lower) * std::expm1(a * width) / (a * width);
          },
          [a, &spec](const TruncatedNormal&) {
            return expectation(spec, [a](double x) { return std::exp(a * x); }).value;
          },
          [a](const Deterministic& d) { return std::exp(a * d.value); },
      },
      spec);
}

double pdf(const DistributionSpec& spec, double x) {
  return std::visit(overloaded{
                        [x](const Exponential& e) {
                          return x < 0.0 ? 0.0 : std::exp(-x / e.mean) / e.mean;
                        },
                        [x](const Uniform& u) {
                          return (x < u.lower || x > u.upper) ? 0.0 : 1.0 / (u.upper - u.lower);
                        },
                        [x](const TruncatedNormal& t) {
                          if (x < t.lower || x > t.upper) return 0.0;
                          const TruncWindow w(t);
                          return phi((x - t.mu) / t.sigma) / (t.sigma * w.mass);
                        },
                        [](const Deterministic&) { return 0.0; },
                    },
                    spec);
}

double cdf(const DistributionSpec& spec, double x) {
  return std::visit(overloaded{
                        [x](const Exponential& e) {
                          return x <= 0.0 ? 0.0 : -std::expm1(-x / e.mean);
                        },
                        [x](const Uniform& u) {
                          return std::clamp((x - u.lower) / (u.upper - u.lower), 0.0, 1.0);
                        },
                        [x](const TruncatedNormal& t) {
                          if (x <= t.lower) return 0.0;
                          if (x >= t.upper) return 1.0;
                          const TruncWindow w(t);
                          return w.mass_below((x - t.mu) / t.sigma) / w.mass;
                        },
                        [x](const Deterministic& d) { return x >= d.value ? 1.0 : 0.0; },
                    },
                    spec);
}

double survival(const DistributionSpec& spec, double x) {
  return std::visit(overloaded{
                        [x](const Exponential& e) {
                          return x <= 0.0 ? 1.0 : std::exp(-x / e.mean);
                        },
                        [x](const Uniform& u) {
                          return std::clamp((u.upper - x) / (u.upper - u.lower), 0.0, 1.0);
                        },
                        [x](const TruncatedNormal& t) {
                          if (x <= t.lower) return 1.0;
                          if (x >= t.upper) return 0.0;
                          const TruncWindow w(t);
                          return w.mass_above((x - t.mu) / t.sigma) / w.mass;
                        },
                        [x](const Deterministic& d) { return x < d.value ? 1.0 : 0.0; },
                    },
                    spec);
}

double quantile(const DistributionSpec& spec, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  return std::visit(overloaded{
                        [p](const Exponential& e) { return exponential_quantile(e.mean, p); },
                        [p](const Uniform& u) { return u.lower + p * (u.upper - u.lower); },
                        [p](const TruncatedNormal& t) { return trunc_quantile(t, p); },
                        [](const Deterministic& d) { return d.value; },
                    },
                    spec);
}

Support support(const DistributionSpec& spec) {
  return std::visit(overloaded{
                        [](const Exponential&) { return Support{0.0, kInf}; },
                        [](const Uniform& u) { return Support{u.lower, u.upper}; },
                        [](const TruncatedNormal& t) { return Support{t.lower, t.upper}; },
                        [](const Deterministic& d) { return Support{d.value, d.value}; },
                    },
                    spec);
}

double integration_upper(const DistributionSpec& spec) {
  if (const auto* e = std::get_if<Exponential>(&spec))
    return exponential_quantile(e->mean, 1.0 - detail::kTailMass);
  return support(spec).upper;
}

NumericResult expectation(const DistributionSpec& spec, const std::function<double(double)>& g) {
  if (const auto* d = std::get_if<Deterministic>(&spec)) return {g(d->value), 0.0, true};
  const double lo = support(spec).lower;
  const double hi = integration_upper(spec);
  return detail::integrate([&](double x) { return g(x) * pdf(spec, x); }, lo, hi);
}

double excess_mean(const DistributionSpec& spec, double c) {
  return std::visit(
      overloaded{
          [c](const Exponential& e) {
            return c <= 0.0 ? e.mean - c : e.mean * std::exp(-c / e.mean);
          },
          [c](const Uniform& u) {
            if (c <= u.lower) return 0.5 * (u.lower + u.upper) - c;
            if (c >= u.upper) return 0.0;
            const double r = u.upper - c;
            return r * r / (2.0 * (u.upper - u.lower));
          },
          [c](const TruncatedNormal& t) {
            if (c <= t.lower) return trunc_mean(t) - c;
            if (c >= t.upper) return 0.0;
            // (1/Z) * integral_c^upper (x - c) phi((x - mu)/sigma) / sigma dx
            const TruncWindow w(t);
            const double zc = (c - t.mu) / t.sigma;
            const double tail = w.mass_above(zc);
            const double value =
                ((t.mu - c) * tail + t.sigma * (phi(zc) - phi(w.beta))) / w.mass;
            return std::max(value, 0.0);
          },
          [c](const Deterministic& d) { return std::max(d.value - c, 0.0); },
      },
      spec);
}

double prob_diff_exceeds(const DistributionSpec& service, const DistributionSpec& delay,
                         double x) {
  if (const auto* s = std::get_if<Exponential>(&service)) {
    if (const auto* d = std::get_if<Exponential>(&delay)) {
      const double rate_s = 1.0 / s->mean;
      const double rate_d = 1.0 / d->mean;
      const double at_zero = rate_d / (rate_s + rate_d);
      // x < 0 branch: 1 - P(D - S >= -x), same memoryless argument with roles swapped.
      return x >= 0.0 ? at_zero * std::exp(-rate_s * x)
                      : 1.0 - (rate_s / (rate_s + rate_d)) * std::exp(rate_d * x);
    }
  }
  if (const auto* d = std::get_if<Deterministic>(&delay)) return survival(service, x + d->value);
  if (const auto* s = std::get_if<Deterministic>(&service)) {
    // P(D < c - x); delay is continuous here so the boundary carries no mass.
    return cdf(delay, s->value - x);
  }

  const auto service_kinks = kinks(service);
  const std::array<double, 2> breaks{service_kinks[0] - x, service_kinks[1] - x};
  const auto result = detail::integrate(
      [&](double y) { return pdf(delay, y) * survival(service, x + y); },
      support(delay).lower, integration_upper(delay), breaks);
  if (result.converged) return std::clamp(result.value, 0.0, 1.0);
  return prob_diff_exceeds_mc(service, delay, x);
}

DistributionSpec with_mean(const DistributionSpec& spec, double target_mean) {
  if (!std::isfinite(target_mean) || target_mean < 0.0)
    throw std::invalid_argument("target mean must be finite and nonnegative");
  if (target_mean == mean(spec)) return spec;
  return std::visit(
      overloaded{
          [&](const Exponential&) -> DistributionSpec {
            if (!(target_mean > 0.0)) throw std::invalid_argument("exponential mean must be > 0");
            return Exponential{target_mean};
          },
          [&](const Uniform& u) -> DistributionSpec {
            if (!(target_mean > 0.0)) throw std::invalid_argument("uniform mean must be > 0");
            const double scale = target_mean / (0.5 * (u.lower + u.upper));
            return Uniform{u.lower * scale, u.upper * scale};
          },
          [&](const TruncatedNormal& t) -> DistributionSpec {
            const double shift = target_mean - trunc_mean(t);
            if (t.lower + shift >= 0.0)
              return TruncatedNormal{t.mu + shift, t.sigma, t.lower + shift, t.upper + shift};
            const double width = t.upper - t.lower;
            if (!(target_mean > 0.0 && target_mean < width))
              throw std::invalid_argument("truncnorm mean unreachable with the window pinned at 0");
            // Mean of the pinned window is increasing in mu; bisect.
            // Beyond 30 sigma outside the window the mass underflows.
            double lo = -30.0 * t.sigma;
            double hi = width + 30.0 * t.sigma;
            if (!(trunc_mean(TruncatedNormal{lo, t.sigma, 0.0, width}) < target_mean &&
                  trunc_mean(TruncatedNormal{hi, t.sigma, 0.0, width}) > target_mean))
              throw std::invalid_argument("truncnorm mean unreachable with the window pinned at 0");
            for (int i = 0; i < 200; ++i) {
              const double mid = 0.5 * (lo + hi);
              if (trunc_mean(TruncatedNormal{mid, t.sigma, 0.0, width}) < target_mean)
                lo = mid;
              else
                hi = mid;
            }
            return TruncatedNormal{0.5 * (lo + hi), t.sigma, 0.0, width};
          },
          [&](const Deterministic&) -> DistributionSpec { return Deterministic{target_mean}; },
      },
      spec);
}

}  // namespace qlag
