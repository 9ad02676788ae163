#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qlag::detail {

namespace {
constexpr unsigned kMaxDepth = 12;
constexpr double kRelTol = 1e-11;
}  // namespace

Integral integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return {};
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, kMaxDepth, kRelTol, &error, &l1);
  Integral out;
  out.value = value;
  out.error = error;
  out.converged = std::isfinite(value) && error <= kQuadratureAbsTol;
  return out;
}

Integral integrate(const std::function<double(double)>& f, double a, double b,
                   std::span<const double> breakpoints) {
  if (!(b > a)) return {};
  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Integral total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Integral piece = integrate(f, cuts[i], cuts[i + 1]);
    total.value += piece.value;
    total.error += piece.error;
    total.converged = total.converged && piece.converged;
  }
  total.converged = total.converged && total.error <= kQuadratureAbsTol;
  return total;
}

}  // namespace qlag::detail
