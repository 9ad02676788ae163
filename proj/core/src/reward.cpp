#include "qlag/reward.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qlag {

void validate(const RewardSpec& f) {
  if (const auto* e = std::get_if<ExponentialReward>(&f)) {
    if (!(e->kappa > 0.0) || !std::isfinite(e->kappa))
      throw std::invalid_argument("reward kappa must be positive and finite");
  } else {
    const auto& p = std::get<PolynomialReward>(f);
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma))
      throw std::invalid_argument("reward gamma must be positive and finite");
  }
}

std::string_view kind_name(const RewardSpec& f) {
  return std::holds_alternative<ExponentialReward>(f) ? "exp" : "poly";
}

std::string describe(const RewardSpec& f) {
  std::ostringstream os;
  if (const auto* e = std::get_if<ExponentialReward>(&f))
    os << "exp(-" << e->kappa << " T)";
  else
    os << "(T + 1)^-" << std::get<PolynomialReward>(f).gamma;
  return os.str();
}

double eval(const RewardSpec& f, double t) {
  if (const auto* e = std::get_if<ExponentialReward>(&f)) return std::exp(-e->kappa * t);
  return std::pow(t + 1.0, -std::get<PolynomialReward>(f).gamma);
}

double deriv(const RewardSpec& f, double t) {
  if (const auto* e = std::get_if<ExponentialReward>(&f))
    return -e->kappa * std::exp(-e->kappa * t);
  const double g = std::get<PolynomialReward>(f).gamma;
  return -g * std::pow(t + 1.0, -g - 1.0);
}

RewardFunction as_function(const RewardSpec& f) {
  return RewardFunction{[f](double t) { return eval(f, t); },
                        [f](double t) { return deriv(f, t); }, describe(f)};
}

}  // namespace qlag
