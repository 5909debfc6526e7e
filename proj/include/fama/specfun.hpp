#pragma once

// Special-function kernels used by the outage-probability engine.
//
// Everything here is a pure function of its arguments. Functions whose result
// would overflow for large arguments (modified Bessel I) are exposed in their
// exponentially scaled form.

#include <vector>

namespace fama::specfun {

/// Zeroth-order Bessel function of the first kind.
double bessel_j0(double x);

/// Exponentially scaled modified Bessel function of the first kind,
/// e^{-x} I_nu(x), for x >= 0.
///
/// Real orders nu >= 0 are supported. Negative orders are accepted only when
/// integral, using I_{-n} = I_n.
double bessel_i_scaled(double nu, double x);

/// log(e^{-x} I_{nu0 + k}(x)) for k = 0 .. count-1.
///
/// Evaluates a run of consecutive orders at one argument with a single
/// continued-fraction / downward-recurrence pass. Entries are -inf where the
/// function is exactly zero (x = 0 and order > 0).
std::vector<double> log_bessel_i_scaled_run(double nu0, int count, double x);

double log_gamma(double x);

/// Rising factorial (x)_j = x (x+1) ... (x+j-1).
double pochhammer(double x, int j);

/// log (x)_j for x > 0.
double log_pochhammer(double x, int j);

/// Regularized lower incomplete gamma P(s, x).
double gamma_p(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x), computed
/// directly so that small upper tails keep their relative accuracy.
double gamma_q(double s, double x);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// Generalized Marcum Q function Q_nu(a, b) for real nu >= 0.5.
///
/// Q_nu(a, b) is the survival function at b^2 of a noncentral chi-square
/// variable with 2 nu degrees of freedom and noncentrality a^2.
double marcum_q(double nu, double a, double b);

}  // namespace fama::specfun
