#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fama::numerics {

/// Vector-valued integrand: writes dim() components of f(t) into out.
using VectorIntegrand = std::function<void(double t, std::span<double> out)>;

struct AdaptiveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-300;
  int initial_panels = 8;
  int max_intervals = 4000;
};

struct IntegrationResult {
  std::vector<double> value;
  std::vector<double> error;
  long evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of a vector-valued
/// function over [a, b]. The interval with the largest scaled error is
/// bisected until every component meets max(abs_tol, rel_tol |I_c|).
///
/// Throws ConvergenceError if max_intervals is exhausted.
IntegrationResult integrate_adaptive(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                     const AdaptiveOptions& options = {});

/// Scalar convenience wrapper.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& options = {}, double* error = nullptr);

}  // namespace fama::numerics
