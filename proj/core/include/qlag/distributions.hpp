#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "qlag/rng.hpp"

namespace qlag {

// Parametric laws for service times S and call-to-arrival delays D. All
// supports lie in [0, inf).

struct Exponential {
  double mean = 1.0;
};

struct Uniform {
  double lower = 0.0;
  double upper = 1.0;
};

/// Normal(mu, sigma) conditioned on [lower, upper].
struct TruncatedNormal {
  double mu = 0.0;
  double sigma = 1.0;
  double lower = 0.0;
  double upper = 1.0;
};

struct Deterministic {
  double value = 0.0;
};

using DistributionSpec = std::variant<Exponential, Uniform, TruncatedNormal, Deterministic>;

/// E[exp(aX)] does not exist for the requested argument.
class DivergentMgfError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Outcome of a numeric evaluation together with its error estimate.
struct NumericResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

struct Support {
  double lower = 0.0;
  double upper = 0.0;  // +inf for unbounded laws
};

/// Throws std::invalid_argument when the parameters violate the law's invariants.
void validate(const DistributionSpec& spec);

std::string_view kind_name(const DistributionSpec& spec);
std::string describe(const DistributionSpec& spec);

bool is_point_mass(const DistributionSpec& spec);
bool is_exponential(const DistributionSpec& spec);

double sample(const DistributionSpec& spec, RandomStream& rng);

double mean(const DistributionSpec& spec);

/// M_X(a) = E[exp(aX)]. Closed form except for the truncated normal, which is
/// integrated numerically. Throws DivergentMgfError outside the domain.
double mgf(const DistributionSpec& spec, double a);
bool mgf_exists(const DistributionSpec& spec, double a);

double pdf(const DistributionSpec& spec, double x);
/// P(X <= x)
double cdf(const DistributionSpec& spec, double x);
/// P(X > x)
double survival(const DistributionSpec& spec, double x);
double quantile(const DistributionSpec& spec, double p);

Support support(const DistributionSpec& spec);
/// Upper end used for numeric integration: the support bound, or the
/// 1 - 1e-12 quantile for unbounded laws.
double integration_upper(const DistributionSpec& spec);

/// E[g(X)] by adaptive quadrature over the support (point evaluation for a
/// deterministic law).
NumericResult expectation(const DistributionSpec& spec, const std::function<double(double)>& g);

/// Stop-loss transform E[max(X - c, 0)], closed form for every law. Any real c.
double excess_mean(const DistributionSpec& spec, double c);

/// P(S - D > x) for independent S ~ service, D ~ delay.
///
/// Closed form for an exponential pair or when either side is a point mass;
/// otherwise the convolution is integrated numerically, falling back to 1e7
/// Monte-Carlo draws if the quadrature misses its tolerance.
double prob_diff_exceeds(const DistributionSpec& service, const DistributionSpec& delay, double x);

/// Same law family with its mean moved to `target_mean`.
///
/// Exponential: mean replaced. Uniform: both endpoints scaled. Truncated normal:
/// mu and the window shifted together with sigma and window width held; if the
/// shifted window would leave [0, inf) it is pinned at 0 and mu is re-solved.
/// Deterministic: value replaced.
DistributionSpec with_mean(const DistributionSpec& spec, double target_mean);

}  // namespace qlag
