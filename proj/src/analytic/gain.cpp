#include <algorithm>
#include <cmath>

#include "fama/analytic.hpp"
#include "fama/error.hpp"
#include "fama/specfun.hpp"

namespace fama::analytic {
namespace {

void check_probability(double p, const char* who) {
  detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, std::string(who) + ": p_out must lie in [0, 1]");
}

void check_pool(int users, int pool, const char* who) {
  detail::require(users >= 1, std::string(who) + ": U must be >= 1");
  detail::require(pool >= users, std::string(who) + ": pool size M must be >= U");
}

}  // namespace

double mux_gain(int users, double p_out) {
  detail::require(users >= 1, "mux_gain: U must be >= 1");
  check_probability(p_out, "mux_gain");
  return users * (1.0 - p_out);
}

double ofama_gain(int users, int pool, double p_out) {
  check_pool(users, pool, "ofama_gain");
  check_probability(p_out, "ofama_gain");
  const double x = 1.0 - p_out;
  double sum = 0.0;
  for (int u = pool - users + 1; u <= pool; ++u) sum += specfun::reg_inc_beta(x, pool - u + 1.0, u);
  return std::clamp(sum, 0.0, static_cast<double>(users));
}

double ofama_gain_approx(int users, int pool, double p_out) {
  check_pool(users, pool, "ofama_gain_approx");
  check_probability(p_out, "ofama_gain_approx");
  return std::min<double>(users, pool * (1.0 - p_out));
}

double ofama_gain_derivative(int users, int pool, double p_out) {
  check_pool(users, pool, "ofama_gain_derivative");
  check_probability(p_out, "ofama_gain_derivative");
  // d/dp I_{1-p}(a, b) = -x^{a-1} (1 - x)^{b-1} / B(a, b), x = 1 - p.
  const double x = 1.0 - p_out;
  double d = 0.0;
  for (int u = pool - users + 1; u <= pool; ++u) {
    const double a = pool - u + 1.0;
    const double b = u;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double density = 0.0;
    if ((x == 0.0 && a > 1.0) || (x == 1.0 && b > 1.0)) {
      density = 0.0;
    } else {
      const double lx = (a == 1.0) ? 0.0 : (a - 1.0) * std::log(x);
      const double l1x = (b == 1.0) ? 0.0 : (b - 1.0) * std::log1p(-x);
      density = std::exp(lx + l1x - log_beta);
    }
    d -= density;
  }
  return d;
}

}  // namespace fama::analytic
