#include "fama/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>

#include "fama/error.hpp"
#include "fama/integrate.hpp"
#include "fama/specfun.hpp"

namespace fama::correlation {

void CorrelationSpec::validate() const {
  detail::require(ports >= 1, "correlation: port count must be positive");
  detail::require(std::isfinite(aperture) && aperture >= 0.0, "correlation: aperture W must be >= 0");
  if (model == CorrelationModel::jakes) {
    detail::require(ports >= 2, "correlation: the Jakes model needs N >= 2 (it divides by N - 1)");
  } else {
    detail::require(std::isfinite(mu) && mu >= 0.0 && mu < 1.0, "correlation: mu must lie in [0, 1)");
  }
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymmetricMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
  return worst;
}

int BlockStructure::ports() const { return std::accumulate(lengths.begin(), lengths.end(), 0); }

std::vector<int> BlockStructure::port_to_block() const {
  std::vector<int> map;
  map.reserve(static_cast<std::size_t>(ports()));
  for (int b = 0; b < count(); ++b) map.insert(map.end(), static_cast<std::size_t>(lengths[b]), b);
  return map;
}

void BlockStructure::validate() const {
  detail::require(!lengths.empty(), "blocks: need at least one block");
  for (int len : lengths) detail::require(len >= 1, "blocks: every block length must be >= 1");
  detail::require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "blocks: delta must lie strictly inside (0, 1)");
  detail::require(std::isfinite(rho_th) && rho_th > 0.0, "blocks: rho_th must be positive");
}

SymmetricMatrix jakes_matrix(const CorrelationSpec& spec) {
  detail::require(spec.model == CorrelationModel::jakes, "jakes_matrix: spec is not a Jakes model");
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.ports);
  // Toeplitz: one J0 evaluation per lag.
  std::vector<double> lag(n);
  const double scale = 2.0 * std::numbers::pi * spec.aperture / (spec.ports - 1);
  for (std::size_t d = 0; d < n; ++d) lag[d] = specfun::bessel_j0(scale * static_cast<double>(d));
  SymmetricMatrix sigma(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sigma(i, j) = lag[i > j ? i - j : j - i];
  return sigma;
}

std::vector<double> symmetric_eigenvalues(const SymmetricMatrix& matrix) {
  constexpr double kOffTol = 1e-12;
  constexpr int kMaxSweeps = 100;
  const std::size_t n = matrix.size();
  detail::require(n >= 1, "symmetric_eigenvalues: empty matrix");
  detail::require(matrix.asymmetry() <= 1e-12, "symmetric_eigenvalues: matrix is not symmetric");

  SymmetricMatrix a = matrix;
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  frob = std::sqrt(frob);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > kOffTol * std::max(frob, 1.0)) {
    if (++sweep > kMaxSweeps) throw ConvergenceError("symmetric_eigenvalues: Jacobi sweeps exhausted");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double h = t * apq;
        a(p, p) -= h;
        a(q, q) += h;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = a(r, p);
          const double hh = a(r, q);
          const double rp = g - s * (hh + g * tau);
          const double rq = hh + s * (g - hh * tau);
          a(r, p) = a(p, r) = rp;
          a(r, q) = a(q, r) = rq;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

BlockStructure block_partition(std::span<const double> eigenvalues, int ports, double delta, double rho_th) {
  detail::require(ports >= 1, "block_partition: port count must be positive");
  detail::require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "block_partition: delta must lie in (0, 1)");
  detail::require(std::isfinite(rho_th) && rho_th > 0.0, "block_partition: rho_th must be positive");
  detail::require(std::is_sorted(eigenvalues.begin(), eigenvalues.end(), std::greater<>()),
                  "block_partition: eigenvalues must be sorted in descending order");

  BlockStructure blocks;
  blocks.delta = delta;
  blocks.rho_th = rho_th;
  for (double lambda : eigenvalues) {
    if (lambda < rho_th) break;
    blocks.eigenvalues_used.push_back(lambda);
  }
  if (blocks.eigenvalues_used.empty()) {
    throw DomainError("block_partition: no eigenvalue reaches rho_th = " + std::to_string(rho_th));
  }
  // More dominant eigenvalues than ports cannot happen for a correlation
  // matrix; cap defensively so every block keeps at least one port.
  if (static_cast<int>(blocks.eigenvalues_used.size()) > ports) blocks.eigenvalues_used.resize(ports);

  for (double lambda : blocks.eigenvalues_used) {
    const double raw = std::round((lambda - 1.0) / delta + 1.0);
    blocks.lengths.push_back(static_cast<int>(std::max(1.0, raw)));
  }

  int residual = ports - blocks.ports();
  const int count = blocks.count();
  for (int b = 0; residual != 0; b = (b + 1) % count) {
    if (residual > 0) {
      ++blocks.lengths[b];
      --residual;
    } else if (blocks.lengths[b] > 1) {
      --blocks.lengths[b];
      ++residual;
    }
  }
  return blocks;
}

BlockStructure constant_structure(int ports, double delta) {
  detail::require(ports >= 1, "constant_structure: port count must be positive");
  detail::require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "constant_structure: delta must lie in (0, 1)");
  BlockStructure blocks;
  blocks.lengths = {ports};
  blocks.delta = delta;
  return blocks;
}

double aperture_mean_correlation(double aperture) {
  detail::require(std::isfinite(aperture) && aperture >= 0.0, "aperture_mean_correlation: W must be >= 0");
  if (aperture == 0.0) return 1.0;
  const double k = 2.0 * std::numbers::pi * aperture;
  numerics::AdaptiveOptions opts;
  opts.rel_tol = 1e-12;
  opts.initial_panels = 4 + static_cast<int>(2.0 * aperture);
  const double v = numerics::integrate_adaptive([k](double s) { return (1.0 - s) * specfun::bessel_j0(k * s); },
                                                0.0, 1.0, opts);
  return 2.0 * v;
}

double constant_model_mu2(double aperture) {
  // A(W) stays positive; the floor only guards round-off at huge W.
  return std::sqrt(std::max(aperture_mean_correlation(aperture), 1e-300));
}

BlockStructure resolve_blocks(const CorrelationSpec& spec, double delta, double rho_th) {
  spec.validate();
  if (spec.model == CorrelationModel::constant) {
    const double d = spec.mu > 0.0 ? spec.mu * spec.mu : constant_model_mu2(spec.aperture);
    auto blocks = constant_structure(spec.ports, std::clamp(d, 1e-12, 1.0 - 1e-12));
    blocks.rho_th = rho_th;
    return blocks;
  }
  const auto eig = symmetric_eigenvalues(jakes_matrix(spec));
  return block_partition(eig, spec.ports, delta, rho_th);
}

}  // namespace fama::correlation
