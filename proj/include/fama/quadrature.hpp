#pragma once

#include <vector>

namespace fama::specfun {

/// Generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on (0, inf).
///
/// Invariants: nodes strictly positive and increasing; weights positive and
/// summing to Gamma(alpha + 1); exact for polynomials of degree <= 2n - 1.
struct QuadratureRule {
  double alpha = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }
};

/// Generalized Laguerre polynomial L^alpha_n(x) by the three-term recurrence.
double laguerre_poly(double alpha, int n, double x);

/// Builds the order-n rule. Nodes are the roots of L^alpha_n found by Newton
/// iteration; weights are
///   w_i = Gamma(n + alpha + 1) x_i / (n! (n + 1)^2 [L^alpha_{n+1}(x_i)]^2).
QuadratureRule gauss_laguerre_rule(double alpha, int order);

}  // namespace fama::specfun
