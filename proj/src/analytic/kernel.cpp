#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "fama/analytic.hpp"
#include "fama/error.hpp"
#include "fama/specfun.hpp"

namespace fama::analytic {

ConditionalKernel::ConditionalKernel(double gamma, double delta, int m, int U_tilde)
    : gamma_(gamma), delta_(delta), m_(m), U_tilde_(U_tilde) {
  detail::require(std::isfinite(gamma) && gamma > 0.0, "g_kernel: gamma must be positive");
  detail::require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "g_kernel: delta must lie in (0, 1)");
  detail::require(m >= 1, "g_kernel: m must be >= 1");
  detail::require(U_tilde >= 1, "g_kernel: U~ must be >= 1");
  kappa_ = delta / (2.0 * (1.0 - delta));
  log_gamma_ = std::log(gamma);
  log_gamma1_ = std::log1p(gamma);

  const int top = m + U_tilde - 2;
  log_coef_.resize(static_cast<std::size_t>(top + 1));
  for (int k = 0; k <= top; ++k) {
    auto& row = log_coef_[static_cast<std::size_t>(k)];
    for (int j = 0; j <= top - k; ++j) {
      row.push_back(specfun::log_pochhammer(m + U_tilde - (j + k) - 1, j) - std::lgamma(j + 1.0));
    }
  }
}

double ConditionalKernel::operator()(double r, double r_tilde) const {
  detail::require(std::isfinite(r) && r > 0.0, "g_kernel: r must be positive");
  detail::require(std::isfinite(r_tilde) && r_tilde > 0.0, "g_kernel: r~ must be positive");

  const double g1 = gamma_ + 1.0;
  const double a = std::sqrt(2.0 * kappa_ * gamma_ * r_tilde / g1);
  const double b = std::sqrt(2.0 * kappa_ * r / g1);
  const double q = specfun::marcum_q(U_tilde_, a, b);

  const double sg = std::sqrt(gamma_ * r_tilde);
  const double sr = std::sqrt(r);
  const double z = 2.0 * kappa_ * sg * sr / g1;
  // exp(-kappa (gamma r~ + r) / (gamma + 1)) * e^{z}, folded into one
  // non-positive exponent.
  const double gap = sg - sr;
  const double exponent = -kappa_ * gap * gap / g1;

  const double log_r = std::log(r);
  const double log_rt = std::log(r_tilde);
  const double log_front = -(m_ + U_tilde_ - 1) * log_gamma1_ +
                           0.5 * (1 - m_) * (log_r - log_gamma_ - log_rt) + exponent;
  const double log_ratio = log_r - log_rt;

  // Orders 1 - m + j + k span [1 - m, U~ - 1]; I_{-n} = I_n.
  const int max_order = std::max(m_ - 1, U_tilde_ - 1);
  const auto log_i = specfun::log_bessel_i_scaled_run(0.0, max_order + 1, z);

  double sum = 0.0;
  const int top = m_ + U_tilde_ - 2;
  for (int k = 0; k <= top; ++k) {
    const auto& row = log_coef_[static_cast<std::size_t>(k)];
    const double k_part = log_front + k * log_gamma1_;
    for (int j = 0; j <= top - k; ++j) {
      const int n = j + k;
      const double li = log_i[static_cast<std::size_t>(std::abs(1 - m_ + n))];
      if (li == -std::numeric_limits<double>::infinity()) continue;
      sum += std::exp(k_part + row[static_cast<std::size_t>(j)] + 0.5 * n * log_ratio +
                      0.5 * (j - k) * log_gamma_ + li);
    }
  }
  return std::clamp(q - sum, 0.0, 1.0);
}

double g_kernel(double gamma, double r, double r_tilde, double delta, int m, int U_tilde) {
  return ConditionalKernel(gamma, delta, m, U_tilde)(r, r_tilde);
}

}  // namespace fama::analytic
