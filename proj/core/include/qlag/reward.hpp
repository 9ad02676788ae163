#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>

namespace qlag {

/// f(T) = exp(-kappa T)
struct ExponentialReward {
  double kappa = 1.0;
};

/// f(T) = (T + 1)^(-gamma)
struct PolynomialReward {
  double gamma = 1.0;
};

using RewardSpec = std::variant<ExponentialReward, PolynomialReward>;

void validate(const RewardSpec& f);
std::string_view kind_name(const RewardSpec& f);
std::string describe(const RewardSpec& f);

double eval(const RewardSpec& f, double t);
double deriv(const RewardSpec& f, double t);

/// Any non-negative, non-increasing reward with a derivative. The shipped
/// families convert to it; the general optimality check accepts it directly.
struct RewardFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string name;
};

RewardFunction as_function(const RewardSpec& f);

}  // namespace qlag
