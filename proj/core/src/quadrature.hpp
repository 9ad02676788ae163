#pragma once

#include <functional>
#include <span>

#include "qlag/distributions.hpp"

namespace qlag::detail {

// Absolute tolerance a quadrature result must meet to count as converged.
inline constexpr double kQuadratureAbsTol = 1e-9;
// Exponential-tailed integrals are truncated at this upper quantile.
inline constexpr double kTailMass = 1e-12;

using Integral = NumericResult;

// Adaptive Gauss-Kronrod on [a, b]. Empty or reversed ranges integrate to 0.
Integral integrate(const std::function<double(double)>& f, double a, double b);

// Same, split at interior breakpoints (kinks or jumps of the integrand).
// Breakpoints outside (a, b) are ignored.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   std::span<const double> breakpoints);

}  // namespace qlag::detail
