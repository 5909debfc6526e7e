#include <algorithm>
#include <cmath>
#include <limits>

#include "fama/error.hpp"
#include "fama/specfun.hpp"

namespace fama::specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUnderflow = 1e-290;

// x^s e^{-x} / Gamma(s + 1): the step between consecutive regularized
// incomplete gammas, Q(s + 1, x) = Q(s, x) + step(s, x).
double gamma_step(double s, double x) {
  return std::exp(-x + s * std::log(x) - std::lgamma(s + 1.0));
}

}  // namespace

// Poisson mixture of incomplete gammas,
//   Q_nu(a, b) = sum_k e^{-mu} mu^k / k! * Q(nu + k, b^2 / 2),   mu = a^2 / 2,
// summed outward from the Poisson mode in both directions with the incomplete
// gammas advanced by their two-term recurrence. When b^2 sits below the mean
// of the noncentral chi-square the lower-tail mixture is summed instead and
// complemented, so whichever tail is small keeps its relative accuracy.
double marcum_q(double nu, double a, double b) {
  detail::require(std::isfinite(nu) && nu >= 0.5, "marcum_q: order must be >= 0.5");
  detail::require(std::isfinite(a) && a >= 0.0, "marcum_q: a must be finite and >= 0");
  detail::require(std::isfinite(b) && b >= 0.0, "marcum_q: b must be finite and >= 0");
  if (b == 0.0) return 1.0;

  const double x = 0.5 * b * b;
  const double mu = 0.5 * a * a;
  if (mu == 0.0) return gamma_q(nu, x);

  const bool upper = b * b > 2.0 * nu + a * a;
  const double k0 = std::floor(mu);
  const double s0 = nu + k0;
  const double p0 = std::exp(-mu + k0 * std::log(mu) - std::lgamma(k0 + 1.0));
  const double t0 = upper ? gamma_q(s0, x) : gamma_p(s0, x);
  const double g0 = gamma_step(s0, x);

  double sum = p0 * t0;

  // Forward: k = k0 + 1, k0 + 2, ...
  {
    double p = p0;
    double t = t0;
    double g = g0;  // step at s = nu + k
    for (double k = k0; k < k0 + 1e7; k += 1.0) {
      t = upper ? t + g : std::max(0.0, t - g);
      const double s_next = nu + k + 1.0;
      g = (g < kUnderflow) ? gamma_step(s_next, x) : g * x / s_next;
      p *= mu / (k + 1.0);
      sum += p * t;
      const double kk = k + 1.0;
      if (kk > mu) {
        const double tail = p * (kk + 1.0) / (kk + 1.0 - mu);
        if (tail <= kEps * 1e-2 * sum || p < 1e-300) break;
      }
    }
  }

  // Backward: k = k0 - 1, ..., 0.
  {
    double p = p0;
    double t = t0;
    double g = g0;  // step at s = nu + k
    for (double k = k0; k >= 1.0; k -= 1.0) {
      g = (g < kUnderflow) ? gamma_step(nu + k - 1.0, x) : g * (nu + k) / x;
      t = upper ? t - g : t + g;
      p *= k / mu;
      if (t <= 0.0) break;
      const double term = p * t;
      sum += term;
      // Remaining terms are bounded by a geometric series in r = j / mu.
      const double r = (k - 1.0) / mu;
      const double bound = upper ? term : p;
      if (r < 1.0 && bound * r / (1.0 - r) <= kEps * 1e-2 * sum) break;
    }
  }

  const double q = upper ? sum : 1.0 - sum;
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace fama::specfun
