#include <cmath>
#include <limits>

#include "fama/error.hpp"
#include "fama/specfun.hpp"

namespace fama::specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// log of x^s e^{-x} / Gamma(s), the common prefactor of P and Q.
double log_gamma_prefactor(double s, double x) {
  return -x + s * std::log(x) - std::lgamma(s);
}

double gamma_p_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return sum * std::exp(log_gamma_prefactor(s, x));
    }
  }
  throw ConvergenceError("gamma_p: series did not converge");
}

double gamma_q_cf(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return std::exp(log_gamma_prefactor(s, x)) * h;
  }
  throw ConvergenceError("gamma_q: continued fraction did not converge");
}

double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("reg_inc_beta: continued fraction did not converge");
}

}  // namespace

double log_gamma(double x) {
  detail::require(std::isfinite(x) && x > 0.0, "log_gamma: argument must be positive");
  return std::lgamma(x);
}

double pochhammer(double x, int j) {
  detail::require(j >= 0, "pochhammer: j must be >= 0");
  detail::require(std::isfinite(x), "pochhammer: x must be finite");
  if (j == 0) return 1.0;
  if (x > 0.0 && j > 20) return std::exp(log_pochhammer(x, j));
  double p = 1.0;
  for (int i = 0; i < j; ++i) p *= x + i;
  return p;
}

double log_pochhammer(double x, int j) {
  detail::require(j >= 0, "log_pochhammer: j must be >= 0");
  detail::require(std::isfinite(x) && x > 0.0, "log_pochhammer: x must be positive");
  if (j == 0) return 0.0;
  return std::lgamma(x + j) - std::lgamma(x);
}

double gamma_p(double s, double x) {
  detail::require(std::isfinite(s) && s > 0.0, "gamma_p: shape must be positive");
  detail::require(!std::isnan(x) && x >= 0.0, "gamma_p: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_cf(s, x);
}

double gamma_q(double s, double x) {
  detail::require(std::isfinite(s) && s > 0.0, "gamma_q: shape must be positive");
  detail::require(!std::isnan(x) && x >= 0.0, "gamma_q: argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

double reg_inc_beta(double x, double a, double b) {
  detail::require(std::isfinite(a) && a > 0.0 && std::isfinite(b) && b > 0.0,
                  "reg_inc_beta: shapes must be positive");
  detail::require(x >= 0.0 && x <= 1.0, "reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace fama::specfun
