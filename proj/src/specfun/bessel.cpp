#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fama/error.hpp"
#include "fama/specfun.hpp"

namespace fama::specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Above this argument J0 switches from Miller recurrence to the Hankel
// expansion; the expansion's smallest term there is ~e^{-2x}.
constexpr double kJ0AsymptoticFrom = 40.0;

// Below this argument e^{-x} I_nu(x) is summed from the ascending series.
constexpr double kIScaledSeriesUpTo = 25.0;

double j0_asymptotic(double x) {
  // DLMF 10.17.3 with nu = 0: a_k = prod_{i<=k} (-(2i-1)^2) / (k! 8^k).
  double p = 0.0;
  double q = 0.0;
  double ak = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 80; ++k) {
    if (k > 0) ak *= -((2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
    const double mag = std::abs(ak);
    if (mag > prev) break;
    prev = mag;
    switch (k % 4) {
      case 0: p += ak; break;
      case 1: q += ak; break;
      case 2: p -= ak; break;
      default: q -= ak; break;
    }
    if (mag < kEps * 1e-2) break;
  }
  const double chi = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Miller's backward recurrence normalized by J0 + 2 sum J_{2k} = 1.
double j0_miller(double x) {
  const int top = 2 * (static_cast<int>(x / 2.0) + 30);
  double next = 0.0;  // J_{k+1}
  double cur = 1e-30; // J_k
  double norm = 0.0;
  double j0 = 0.0;
  for (int k = top; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
  }
  j0 = cur;
  norm += j0;
  return j0 / norm;
}

double log_i_scaled_series(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 10000; ++k) {
    term *= q / (k * (nu + k));
    sum += term;
    if (term < kEps * 1e-2 * sum && k > std::sqrt(q)) break;
  }
  return -x + nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + std::log(sum);
}

// Hankel expansion of e^{-x} I_nu(x) (DLMF 10.40.1). Returns false when the
// series cannot reach full double precision at this (nu, x).
bool log_i_scaled_hankel(double nu, double x, double& out) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  bool converged = false;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag == 0.0) {
      converged = true;
      break;
    }
    if (mag > prev) break;
    sum += term;
    prev = mag;
    if (mag < kEps * 0.5 * std::abs(sum)) {
      converged = true;
      break;
    }
  }
  if (!converged || sum <= 0.0) return false;
  out = -0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
  return true;
}

// I_{nu+1}(x) / I_nu(x) by the continued fraction
//   1 / (2(nu+1)/x + 1 / (2(nu+2)/x + ...)), modified Lentz.
double i_ratio_cf(double nu, double x) {
  constexpr double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 1000000; ++k) {
    const double b = 2.0 * (nu + k) / x;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) return f;
  }
  throw ConvergenceError("bessel_i: continued fraction for I ratio did not converge");
}

}  // namespace

double bessel_j0(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j0: argument must be finite");
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double q = 0.25 * ax * ax;
    return 1.0 - q + 0.25 * q * q;
  }
  if (ax >= kJ0AsymptoticFrom) return j0_asymptotic(ax);
  return j0_miller(ax);
}

std::vector<double> log_bessel_i_scaled_run(double nu0, int count, double x) {
  detail::require(count >= 1, "bessel_i: run length must be positive");
  detail::require(std::isfinite(nu0) && nu0 >= 0.0, "bessel_i: base order must be >= 0");
  detail::require(std::isfinite(x) && x >= 0.0, "bessel_i: argument must be finite and >= 0");

  std::vector<double> out(static_cast<std::size_t>(count));
  if (x == 0.0) {
    for (int k = 0; k < count; ++k) out[k] = (nu0 + k == 0.0) ? 0.0 : kNegInf;
    return out;
  }
  if (x <= kIScaledSeriesUpTo) {
    for (int k = 0; k < count; ++k) out[k] = log_i_scaled_series(nu0 + k, x);
    return out;
  }

  const double top = nu0 + (count - 1);
  double h_top = 0.0;
  double h_above = 0.0;
  if (log_i_scaled_hankel(top, x, h_top) && log_i_scaled_hankel(top + 1.0, x, h_above)) {
    // Downward recurrence from two accurate values; relative magnitudes stay
    // moderate because x is large compared with the orders.
    out[count - 1] = h_top;
    double upper = std::exp(h_above - h_top);
    double cur = 1.0;
    for (int k = count - 1; k >= 1; --k) {
      const double nu = nu0 + k;
      const double lower = (2.0 * nu / x) * cur + upper;
      upper = cur;
      cur = lower;
      out[k - 1] = h_top + std::log(cur);
    }
    return out;
  }

  // Continued fraction at the top order, recur down to the fractional base
  // order in [0, 1), normalize there with the Hankel expansion (valid for
  // x > 25 and orders below one).
  const double base = top - std::floor(top);
  const int steps = static_cast<int>(std::lround(top - base));
  double upper = i_ratio_cf(top, x);
  double cur = 1.0;
  double log_offset = 0.0;
  std::vector<double> unnormalized(static_cast<std::size_t>(count));
  auto store = [&](double order, double value) {
    const double idx = order - nu0;
    if (idx >= -0.5) {
      const auto k = static_cast<std::size_t>(std::lround(idx));
      if (k < unnormalized.size()) unnormalized[k] = std::log(value) + log_offset;
    }
  };
  store(top, cur);
  for (int s = 0; s < steps; ++s) {
    const double nu = top - s;
    const double lower = (2.0 * nu / x) * cur + upper;
    upper = cur;
    cur = lower;
    if (cur > 1e200) {
      cur *= 1e-200;
      upper *= 1e-200;
      log_offset += 200.0 * std::numbers::ln10;
    }
    store(nu - 1.0, cur);
  }
  double h_base = 0.0;
  if (!log_i_scaled_hankel(base, x, h_base)) {
    throw ConvergenceError("bessel_i: asymptotic normalization failed at x = " + std::to_string(x));
  }
  const double shift = h_base - (std::log(cur) + log_offset);
  for (int k = 0; k < count; ++k) out[k] = unnormalized[k] + shift;
  return out;
}

double bessel_i_scaled(double nu, double x) {
  detail::require(std::isfinite(nu), "bessel_i: order must be finite");
  detail::require(std::isfinite(x) && x >= 0.0, "bessel_i: argument must be finite and >= 0");
  if (nu < 0.0) {
    detail::require(nu == std::floor(nu), "bessel_i: negative order must be an integer");
    nu = -nu;
  }
  return std::exp(log_bessel_i_scaled_run(nu, 1, x)[0]);
}

}  // namespace fama::specfun
