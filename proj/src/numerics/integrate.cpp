#include "fama/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>

#include "fama/error.hpp"

namespace fama::numerics {
namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  std::vector<double> value;
  std::vector<double> error;
  double priority;
};

struct ByPriority {
  bool operator()(const Segment& lhs, const Segment& rhs) const { return lhs.priority < rhs.priority; }
};

class Kronrod15 {
 public:
  Kronrod15(const VectorIntegrand& f, std::size_t dim) : f_(f), dim_(dim), samples_(15 * dim) {}

  Segment apply(double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int k = 0; k < 15; ++k) {
      const double x = (k < 7) ? center - half * kXgk[k] : (k == 7 ? center : center + half * kXgk[14 - k]);
      f_(x, std::span<double>(samples_.data() + k * dim_, dim_));
    }
    evaluations_ += 15;

    Segment seg{a, b, std::vector<double>(dim_), std::vector<double>(dim_), 0.0};
    for (std::size_t c = 0; c < dim_; ++c) {
      auto at = [&](int k) { return samples_[k * dim_ + c]; };
      double resk = kWgk[7] * at(7);
      double resg = kWg[3] * at(7);
      for (int j = 0; j < 7; ++j) {
        const double pair = at(j) + at(14 - j);
        resk += kWgk[j] * pair;
        if (j % 2 == 1) resg += kWg[j / 2] * pair;
      }
      const double mean = 0.5 * resk;
      double resasc = kWgk[7] * std::abs(at(7) - mean);
      for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(at(j) - mean) + std::abs(at(14 - j) - mean));
      resasc *= std::abs(half);
      double err = std::abs((resk - resg) * half);
      if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
      seg.value[c] = resk * half;
      seg.error[c] = err;
    }
    return seg;
  }

  long evaluations() const { return evaluations_; }

 private:
  const VectorIntegrand& f_;
  std::size_t dim_;
  std::vector<double> samples_;
  long evaluations_ = 0;
};

}  // namespace

IntegrationResult integrate_adaptive(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                     const AdaptiveOptions& options) {
  detail::require(dim >= 1, "integrate_adaptive: dimension must be positive");
  detail::require(std::isfinite(a) && std::isfinite(b) && a < b, "integrate_adaptive: need finite a < b");
  detail::require(options.initial_panels >= 1, "integrate_adaptive: need at least one panel");

  Kronrod15 rule(f, dim);
  std::vector<double> total(dim, 0.0);
  std::vector<double> total_err(dim, 0.0);

  auto tolerance = [&](std::size_t c) { return std::max(options.abs_tol, options.rel_tol * std::abs(total[c])); };
  // Priority: the worst component error relative to its tolerance.
  auto prioritize = [&](Segment& seg) {
    double worst = 0.0;
    for (std::size_t c = 0; c < dim; ++c) worst = std::max(worst, seg.error[c] / tolerance(c));
    seg.priority = worst;
  };

  std::vector<Segment> initial;
  const double width = (b - a) / options.initial_panels;
  for (int p = 0; p < options.initial_panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p + 1 == options.initial_panels) ? b : lo + width;
    initial.push_back(rule.apply(lo, hi));
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += initial.back().value[c];
      total_err[c] += initial.back().error[c];
    }
  }
  std::priority_queue<Segment, std::vector<Segment>, ByPriority> heap;
  for (auto& seg : initial) {
    prioritize(seg);
    heap.push(std::move(seg));
  }

  auto converged = [&] {
    for (std::size_t c = 0; c < dim; ++c)
      if (total_err[c] > tolerance(c)) return false;
    return true;
  };

  int intervals = options.initial_panels;
  while (!converged()) {
    if (intervals >= options.max_intervals) {
      throw ConvergenceError("integrate_adaptive: no convergence after " + std::to_string(intervals) +
                             " intervals (rel_tol " + std::to_string(options.rel_tol) + ")");
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = rule.apply(worst.a, mid);
    Segment right = rule.apply(mid, worst.b);
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += left.value[c] + right.value[c] - worst.value[c];
      total_err[c] += left.error[c] + right.error[c] - worst.error[c];
    }
    prioritize(left);
    prioritize(right);
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++intervals;
  }

  // Recompute sums from the final partition to shed accumulated round-off.
  std::fill(total.begin(), total.end(), 0.0);
  std::fill(total_err.begin(), total_err.end(), 0.0);
  while (!heap.empty()) {
    const Segment& seg = heap.top();
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += seg.value[c];
      total_err[c] += seg.error[c];
    }
    heap.pop();
  }
  return {std::move(total), std::move(total_err), rule.evaluations()};
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& options, double* error) {
  const VectorIntegrand vf = [&f](double t, std::span<double> out) { out[0] = f(t); };
  auto result = integrate_adaptive(vf, 1, a, b, options);
  if (error != nullptr) *error = result.error[0];
  return result.value[0];
}

}  // namespace fama::numerics
