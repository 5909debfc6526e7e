#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "fama/analytic.hpp"
#include "fama/error.hpp"
#include "fama/integrate.hpp"
#include "fama/specfun.hpp"

namespace fama::analytic {
namespace {

constexpr double kClampSlack = 1e-9;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> distinct_lengths(const std::vector<int>& lengths) {
  std::vector<int> out = lengths;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t index_of(const std::vector<int>& sorted, int len) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), len) - sorted.begin());
}

// Clamps round-off excursions outside [0, 1]; anything larger is a failure.
double checked_probability(double v, OutageEstimate& est) {
  if (v >= 0.0 && v <= 1.0) return v;
  if (v < -kClampSlack || v > 1.0 + kClampSlack || std::isnan(v)) {
    throw ConvergenceError("outage evaluation left [0, 1]: " + fmt_double(v));
  }
  est.meta["clamped_from"] = fmt_double(v);
  return std::clamp(v, 0.0, 1.0);
}

// Normalized Gauss-Laguerre weights w_i / Gamma(alpha + 1), i.e. a rule for
// the gamma(alpha + 1) probability density.
std::vector<double> normalized_weights(const specfun::QuadratureRule& rule) {
  std::vector<double> w(rule.weights.size());
  const double log_norm = std::lgamma(rule.alpha + 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(std::log(rule.weights[i]) - log_norm);
  return w;
}

struct KernelTarget {
  double gamma;
  int m;
  int shape;
};

double product_over_blocks(const std::vector<int>& lengths, const std::vector<int>& distinct,
                           const std::vector<double>& per_length) {
  double p = 1.0;
  for (int len : lengths) p *= per_length[index_of(distinct, len)];
  return p;
}

std::vector<double> exact_block_outages(const KernelTarget& target, double delta, const std::vector<int>& distinct,
                                        const ExactOptions& options, double& max_rel_err, long& evaluations) {
  const ConditionalKernel kernel(target.gamma, delta, target.m, target.shape);
  const std::size_t dim = distinct.size();

  // Tolerance scale per component from a cheap quadrature pass so that small
  // block outages are still resolved to relative accuracy.
  const auto scale = block_outages_quadrature(target.gamma, target.m, target.shape, delta, distinct, 20, 20);

  // r = c t / (1 - t) with c the chi-square mean 2 (alpha + 1), so the bulk
  // of each weight sits mid-interval. Returns log of weight * Jacobian.
  auto mapped = [](double t, int order, double& r) {
    const double c = 2.0 * order;
    r = c * t / (1.0 - t);
    if (r <= 0.0 || !std::isfinite(r)) return -std::numeric_limits<double>::infinity();
    return (order - 1) * std::log(r) - 0.5 * r - order * std::numbers::ln2 - std::lgamma(order) + std::log(c) -
           2.0 * std::log1p(-t);
  };

  numerics::AdaptiveOptions inner_opts;
  inner_opts.rel_tol = 0.1 * options.rel_tol;
  inner_opts.max_intervals = options.max_intervals;
  inner_opts.initial_panels = 4;
  numerics::AdaptiveOptions outer_opts;
  outer_opts.rel_tol = options.rel_tol;
  outer_opts.max_intervals = options.max_intervals;
  outer_opts.initial_panels = 4;
  double min_scale = 1.0;
  for (double s : scale) min_scale = std::min(min_scale, std::max(s, 1e-280));
  inner_opts.abs_tol = 1e-3 * options.rel_tol * min_scale;
  outer_opts.abs_tol = 1e-2 * options.rel_tol * min_scale;

  long evals = 0;
  const numerics::VectorIntegrand outer = [&](double tt, std::span<double> out) {
    double rt = 0.0;
    const double log_wt = mapped(tt, target.shape, rt);
    std::fill(out.begin(), out.end(), 0.0);
    if (log_wt < -700.0) return;
    const numerics::VectorIntegrand inner = [&](double t, std::span<double> in) {
      double r = 0.0;
      const double log_w = mapped(t, target.m, r);
      std::fill(in.begin(), in.end(), 0.0);
      if (log_w < -700.0) return;
      const double w = std::exp(log_w);
      const double g = kernel(r, rt);
      for (std::size_t c = 0; c < dim; ++c) in[c] = w * std::pow(g, distinct[c]);
    };
    auto res = numerics::integrate_adaptive(inner, dim, 0.0, 1.0, inner_opts);
    evals += res.evaluations;
    const double wt = std::exp(log_wt);
    for (std::size_t c = 0; c < dim; ++c) out[c] = wt * res.value[c];
  };
  auto res = numerics::integrate_adaptive(outer, dim, 0.0, 1.0, outer_opts);
  evaluations = evals;
  max_rel_err = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    if (res.value[c] > 0.0) max_rel_err = std::max(max_rel_err, res.error[c] / res.value[c]);
  }
  return res.value;
}

OutageEstimate quadrature_estimate(const KernelTarget& target, const BlockStructure& blocks, int n_I, int n_J) {
  blocks.validate();
  const auto distinct = distinct_lengths(blocks.lengths);
  const auto per = block_outages_quadrature(target.gamma, target.m, target.shape, blocks.delta, distinct, n_I, n_J);
  OutageEstimate est;
  est.method = Method::quadrature;
  est.value = checked_probability(product_over_blocks(blocks.lengths, distinct, per), est);
  est.meta["n_I"] = std::to_string(n_I);
  est.meta["n_J"] = std::to_string(n_J);
  est.meta["B"] = std::to_string(blocks.count());
  return est;
}

OutageEstimate exact_estimate(const KernelTarget& target, const BlockStructure& blocks, const ExactOptions& options) {
  blocks.validate();
  detail::require(options.rel_tol > 0.0, "op_exact: rel_tol must be positive");
  const auto distinct = distinct_lengths(blocks.lengths);
  double rel_err = 0.0;
  long evals = 0;
  const auto per = exact_block_outages(target, blocks.delta, distinct, options, rel_err, evals);
  OutageEstimate est;
  est.method = Method::exact_integral;
  est.value = checked_probability(product_over_blocks(blocks.lengths, distinct, per), est);
  // First-order propagation through the product of block factors.
  est.error = est.value * rel_err * static_cast<double>(blocks.count());
  est.meta["rel_tol"] = fmt_double(options.rel_tol);
  est.meta["kernel_evaluations"] = std::to_string(evals);
  est.meta["B"] = std::to_string(blocks.count());
  return est;
}

OutageEstimate bound_estimate(double gamma, int m, double shape, const BlockStructure& blocks) {
  blocks.validate();
  OutageEstimate est;
  est.method = Method::upper_bound;
  est.value = op_upper_bound(gamma, m, shape, blocks.count());
  est.meta["B"] = std::to_string(blocks.count());
  return est;
}

}  // namespace

SystemConfig SystemConfig::uniform(int users, int m, double gamma, int ports, double aperture) {
  SystemConfig cfg;
  cfg.users = users;
  cfg.m = m;
  cfg.interferer_orders.assign(static_cast<std::size_t>(std::max(users - 1, 0)), m);
  cfg.gamma = gamma;
  cfg.ports = ports;
  cfg.aperture = aperture;
  return cfg;
}

int SystemConfig::total_interferer_order() const {
  return std::accumulate(interferer_orders.begin(), interferer_orders.end(), 0);
}

void SystemConfig::validate() const {
  detail::require(users >= 2, "config: U must be >= 2 (at least one interferer)");
  detail::require(m >= 1, "config: m must be >= 1");
  detail::require(static_cast<int>(interferer_orders.size()) == users - 1,
                  "config: need exactly U - 1 interferer fading orders");
  for (int mu : interferer_orders) detail::require(mu >= 1, "config: interferer fading orders must be >= 1");
  detail::require(std::isfinite(gamma) && gamma > 0.0, "config: gamma must be positive (linear)");
  detail::require(ports >= 1, "config: N must be >= 1");
  detail::require(std::isfinite(aperture) && aperture >= 0.0, "config: W must be >= 0");
}

double db_to_linear(double db) {
  detail::require(!std::isnan(db), "db_to_linear: NaN");
  return std::pow(10.0, db / 10.0);
}

int FastParams::m_tilde_int() const { return std::max(1, static_cast<int>(std::lround(m_tilde))); }

FastParams fast_params(const std::vector<int>& interferer_orders) {
  detail::require(!interferer_orders.empty(), "fast_params: need at least one interferer");
  long total = 0;
  long squares = 0;
  for (int mu : interferer_orders) {
    detail::require(mu >= 1, "fast_params: fading orders must be >= 1");
    total += mu;
    squares += static_cast<long>(mu) * mu;
  }
  // Cross sum over ordered pairs of distinct interferers.
  const long cross = total * total - squares;
  FastParams fp;
  fp.U_tilde = static_cast<int>(total);
  fp.m_tilde = static_cast<double>(total * total) / static_cast<double>(total + cross);
  fp.U_hat = static_cast<double>(total) / fp.m_tilde;
  return fp;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::exact_integral: return "exact";
    case Method::quadrature: return "quad";
    case Method::upper_bound: return "ub";
    case Method::monte_carlo: return "mc";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "exact" || name == "exact_integral") return Method::exact_integral;
  if (name == "quad" || name == "quadrature") return Method::quadrature;
  if (name == "ub" || name == "upper_bound") return Method::upper_bound;
  if (name == "mc" || name == "monte_carlo") return Method::monte_carlo;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

double single_port_op(double gamma, int m, double shape) {
  detail::require(std::isfinite(gamma) && gamma > 0.0, "single_port_op: gamma must be positive");
  detail::require(m >= 1, "single_port_op: m must be >= 1");
  detail::require(std::isfinite(shape) && shape > 0.0, "single_port_op: shape must be positive");
  const double lg = std::log(gamma);
  const double lg1 = std::log1p(gamma);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    sum += std::exp(i * lg + specfun::log_pochhammer(shape, i) - std::lgamma(i + 1.0) - (shape + i) * lg1);
  }
  return std::clamp(1.0 - sum, 0.0, 1.0);
}

double op_upper_bound(double gamma, int m, double shape, int blocks) {
  detail::require(blocks >= 1, "op_upper_bound: B must be >= 1");
  return std::pow(single_port_op(gamma, m, shape), blocks);
}

std::vector<double> block_outages_quadrature(double gamma, int m, int shape, double delta,
                                             const std::vector<int>& lengths, int n_I, int n_J) {
  detail::require(n_I >= 1 && n_J >= 1, "quadrature: orders must be >= 1");
  for (int len : lengths) detail::require(len >= 1, "quadrature: block lengths must be >= 1");
  const ConditionalKernel kernel(gamma, delta, m, shape);
  const auto rule_i = specfun::gauss_laguerre_rule(m - 1.0, n_I);
  const auto rule_j = specfun::gauss_laguerre_rule(shape - 1.0, n_J);
  const auto wi = normalized_weights(rule_i);
  const auto wj = normalized_weights(rule_j);

  std::vector<double> out(lengths.size(), 0.0);
  for (int i = 0; i < n_I; ++i) {
    for (int j = 0; j < n_J; ++j) {
      const double g = kernel(2.0 * rule_i.nodes[i], 2.0 * rule_j.nodes[j]);
      const double w = wi[i] * wj[j];
      for (std::size_t c = 0; c < lengths.size(); ++c) out[c] += w * std::pow(g, lengths[c]);
    }
  }
  return out;
}

OutageEstimate op_slow_exact(const SystemConfig& cfg, const BlockStructure& blocks, const ExactOptions& options) {
  cfg.validate();
  return exact_estimate({cfg.gamma, cfg.m, cfg.total_interferer_order()}, blocks, options);
}

OutageEstimate op_slow_quadrature(const SystemConfig& cfg, const BlockStructure& blocks, int n_I, int n_J) {
  cfg.validate();
  return quadrature_estimate({cfg.gamma, cfg.m, cfg.total_interferer_order()}, blocks, n_I, n_J);
}

OutageEstimate op_slow(const SystemConfig& cfg, const BlockStructure& blocks, Method method,
                       const FastOptions& options) {
  cfg.validate();
  switch (method) {
    case Method::quadrature: return op_slow_quadrature(cfg, blocks, options.n_I, options.n_J);
    case Method::exact_integral: return op_slow_exact(cfg, blocks, options.exact);
    case Method::upper_bound: return bound_estimate(cfg.gamma, cfg.m, cfg.total_interferer_order(), blocks);
    case Method::monte_carlo: break;
  }
  throw DomainError("op_slow: Monte Carlo estimates come from the montecarlo module");
}

OutageEstimate op_fast(const SystemConfig& cfg, const BlockStructure& blocks, Method method,
                       const FastOptions& options) {
  cfg.validate();
  const FastParams fp = fast_params(cfg.interferer_orders);
  const double gamma = fp.U_hat * cfg.gamma;
  OutageEstimate est;
  switch (method) {
    case Method::quadrature:
      est = quadrature_estimate({gamma, cfg.m, fp.m_tilde_int()}, blocks, options.n_I, options.n_J);
      break;
    case Method::exact_integral:
      est = exact_estimate({gamma, cfg.m, fp.m_tilde_int()}, blocks, options.exact);
      break;
    case Method::upper_bound:
      est = bound_estimate(gamma, cfg.m, fp.m_tilde, blocks);
      break;
    case Method::monte_carlo:
      throw DomainError("op_fast: Monte Carlo estimates come from the montecarlo module");
  }
  est.meta["m_tilde"] = fmt_double(fp.m_tilde);
  est.meta["U_hat"] = fmt_double(fp.U_hat);
  if (method != Method::upper_bound) est.meta["m_tilde_int"] = std::to_string(fp.m_tilde_int());
  return est;
}

}  // namespace fama::analytic
