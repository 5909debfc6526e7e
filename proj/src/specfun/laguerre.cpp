#include <cmath>
#include <string>

#include "fama/error.hpp"
#include "fama/quadrature.hpp"

namespace fama::specfun {
namespace {

constexpr int kMaxNewton = 100;
constexpr double kNewtonTol = 1e-14;
// For high orders the recurrence round-off can sit above kNewtonTol; a step
// that stops shrinking below this bound is accepted as converged.
constexpr double kRoundoffTol = 1e-11;
constexpr double kBracketTol = 1e-9;

struct LaguerrePair {
  double value;  // L^alpha_n(x)
  double below;  // L^alpha_{n-1}(x)
};

LaguerrePair laguerre_pair(double alpha, int n, double x) {
  double cur = 1.0;
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

}  // namespace

double laguerre_poly(double alpha, int n, double x) {
  detail::require(n >= 0, "laguerre_poly: degree must be >= 0");
  return laguerre_pair(alpha, n, x).value;
}

QuadratureRule gauss_laguerre_rule(double alpha, int order) {
  detail::require(std::isfinite(alpha) && alpha > -1.0, "gauss_laguerre_rule: alpha must exceed -1");
  detail::require(order >= 1, "gauss_laguerre_rule: order must be >= 1");

  const int n = order;
  QuadratureRule rule;
  rule.alpha = alpha;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  const double log_front = std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0) - 2.0 * std::log(n + 1.0);

  // Jacobi matrix of the monic recurrence: diagonal 2k + alpha + 1, off-diagonal
  // sqrt(k (k + alpha)). Its Sturm count brackets each root, so large alpha
  // needs no asymptotic initial guesses.
  auto count_below = [&](double x) {
    int count = 0;
    double d = 1.0;
    for (int k = 0; k < n; ++k) {
      const double off2 = k == 0 ? 0.0 : k * (k + alpha);
      d = (2.0 * k + alpha + 1.0 - x) - off2 / d;
      if (d == 0.0) d = -1e-300;
      if (d < 0.0) ++count;
    }
    return count;
  };
  const double upper = 4.0 * n + 2.0 * alpha + 2.0;

  double lo = 0.0;
  for (int i = 0; i < n; ++i) {
    double hi = upper;
    while (hi - lo > kBracketTol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) > i) hi = mid; else lo = mid;
    }
    const double bracket_lo = lo, bracket_hi = hi;
    double z = 0.5 * (lo + hi);
    bool converged = false;
    double last_step = HUGE_VAL;
    for (int it = 0; it < kMaxNewton; ++it) {
      const auto [p, pm1] = laguerre_pair(alpha, n, z);
      const double dp = (n * p - (n + alpha) * pm1) / z;
      const double step = std::abs(p / dp);
      if (step >= last_step && step <= kRoundoffTol * std::abs(z)) {
        converged = true;
        break;
      }
      z -= p / dp;
      if (step <= kNewtonTol * std::abs(z)) {
        converged = true;
        break;
      }
      last_step = step;
    }
    const double slack = 1e-6 * (bracket_hi - bracket_lo) + kRoundoffTol * bracket_hi;
    if (!converged || !(z > 0.0) || z < bracket_lo - slack || z > bracket_hi + slack ||
        (i > 0 && !(z > rule.nodes[i - 1]))) {
      throw ConvergenceError("gauss_laguerre_rule: root " + std::to_string(i) + " of L^" +
                             std::to_string(alpha) + "_" + std::to_string(n) + " not isolated");
    }
    lo = bracket_hi;
    rule.nodes[i] = z;
    const double next = laguerre_pair(alpha, n + 1, z).value;
    rule.weights[i] = std::exp(log_front + std::log(z) - 2.0 * std::log(std::abs(next)));
  }
  return rule;
}

}  // namespace fama::specfun
