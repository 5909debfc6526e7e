#pragma once

// Closed-form and numerically integrated outage probability for slow and fast
// FAMA over block-correlated Nakagami-m channels, plus multiplexing gains.
//
// Channel scale parameters are normalized to one: the SIR is a ratio of
// powers, so a common scale cancels.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fama/correlation.hpp"
#include "fama/quadrature.hpp"

namespace fama::analytic {

using correlation::BlockStructure;

struct SystemConfig {
  int users = 2;                        // U
  int m = 1;                            // desired-link fading order
  std::vector<int> interferer_orders;   // m_u for each of the U - 1 interferers
  double gamma = 1.0;                   // SIR threshold, linear
  int ports = 2;                        // N
  double aperture = 1.0;                // W

  /// U users where every link (desired and interfering) has order m.
  static SystemConfig uniform(int users, int m, double gamma, int ports = 2, double aperture = 1.0);

  /// Sum of the interferer fading orders.
  int total_interferer_order() const;
  void validate() const;
};

double db_to_linear(double db);

/// Moment-matched single-Nakagami description of the fast-FAMA composite
/// interference.
struct FastParams {
  int U_tilde = 1;       // sum of interferer orders
  double m_tilde = 1.0;  // matched fading order
  double U_hat = 1.0;    // U_tilde / m_tilde, the threshold scale

  /// Integer order used by kernel-based methods: round(m_tilde), at least 1.
  int m_tilde_int() const;
};

FastParams fast_params(const std::vector<int>& interferer_orders);

enum class Method { exact_integral, quadrature, upper_bound, monte_carlo };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct OutageEstimate {
  double value = 0.0;
  Method method = Method::quadrature;
  double error = 0.0;
  std::map<std::string, std::string> meta;
};

/// Conditional outage kernel G(gamma; r, r~) for fixed (gamma, delta, m, U~).
///
/// Evaluates Pr[X <= gamma Y | block variables] where r and r~ are the
/// chi-square block variables of the desired and interfering links. The
/// Bessel/exponential part is assembled in log space, one exponentiation per
/// (j, k) term.
class ConditionalKernel {
 public:
  ConditionalKernel(double gamma, double delta, int m, int U_tilde);

  double operator()(double r, double r_tilde) const;

  double gamma() const { return gamma_; }
  double delta() const { return delta_; }
  int m() const { return m_; }
  int U_tilde() const { return U_tilde_; }

 private:
  double gamma_;
  double delta_;
  int m_;
  int U_tilde_;
  double kappa_;        // delta / (2 (1 - delta))
  double log_gamma_;    // log(gamma)
  double log_gamma1_;   // log(gamma + 1)
  // log[(m + U~ - (j + k) - 1)_j / j!] indexed by (k, j).
  std::vector<std::vector<double>> log_coef_;
};

double g_kernel(double gamma, double r, double r_tilde, double delta, int m, int U_tilde);

/// Outage probability of one port with i.i.d. Nakagami desired order m and a
/// total interference order `shape` (real allowed):
///   1 - sum_{i<m} gamma^i (shape)_i / (i! (gamma + 1)^{shape + i}).
double single_port_op(double gamma, int m, double shape);

/// (single_port_op)^B: the outage of B independent antennas, an upper bound
/// on the block-correlated outage.
double op_upper_bound(double gamma, int m, double shape, int blocks);

struct ExactOptions {
  double rel_tol = 1e-8;
  int max_intervals = 4000;
};

inline constexpr int kDefaultQuadratureOrder = 50;

/// Block-product outage by adaptive 2-D integration of E[G^{L_b}].
OutageEstimate op_slow_exact(const SystemConfig& cfg, const BlockStructure& blocks,
                             const ExactOptions& options = {});

/// Block-product outage by generalized Gauss-Laguerre quadrature of order
/// (n_I, n_J) in the desired and interfering block variables.
OutageEstimate op_slow_quadrature(const SystemConfig& cfg, const BlockStructure& blocks,
                                  int n_I = kDefaultQuadratureOrder, int n_J = kDefaultQuadratureOrder);

struct FastOptions {
  ExactOptions exact;
  int n_I = kDefaultQuadratureOrder;
  int n_J = kDefaultQuadratureOrder;
};

/// Fast-FAMA outage: the slow-FAMA evaluator with gamma <- U_hat gamma and
/// U~ <- m~ (rounded for kernel-based methods, exact for the bound).
OutageEstimate op_fast(const SystemConfig& cfg, const BlockStructure& blocks, Method method,
                       const FastOptions& options = {});

/// Slow-FAMA dispatcher over the analytic methods.
OutageEstimate op_slow(const SystemConfig& cfg, const BlockStructure& blocks, Method method,
                       const FastOptions& options = {});

/// Per-block outage values E[G^{L}] for each distinct length, in the order of
/// `lengths`; exposed for the block-product law.
std::vector<double> block_outages_quadrature(double gamma, int m, int shape, double delta,
                                             const std::vector<int>& lengths, int n_I, int n_J);

double mux_gain(int users, double p_out);

/// Opportunistic FAMA gain: sum_{u=M-U+1}^{M} I_{1-p}(M - u + 1, u).
double ofama_gain(int users, int pool, double p_out);

/// min(U, M (1 - p)).
double ofama_gain_approx(int users, int pool, double p_out);

/// d ofama_gain / d p_out, for first-order error propagation.
double ofama_gain_derivative(int users, int pool, double p_out);

}  // namespace fama::analytic
