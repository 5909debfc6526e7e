#include "fama/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "fama/error.hpp"

namespace fama::montecarlo {
namespace {

std::uint64_t splitmix_step(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Draws the powers of one link type over all ports. Each block owns `order`
// complex common components; each port adds its own independent ones.
class LinkSampler {
 public:
  LinkSampler(const std::vector<int>& block_map, int blocks, double phi)
      : block_map_(block_map), blocks_(blocks), phi_(phi) {}

  // power[n] = sum_l |g_nl|^2 with g_nl = (x + phi X_b) + j (y + phi Y_b).
  // When `first` is non-empty it receives g_n1 for each port.
  void draw(int order, TrialRng& rng, std::span<double> power, std::span<std::complex<double>> first) {
    common_.resize(static_cast<std::size_t>(blocks_) * order);
    for (auto& c : common_) {
      const double re = normal_(rng);
      c = {re, normal_(rng)};
    }
    for (std::size_t n = 0; n < power.size(); ++n) {
      const auto* base = common_.data() + static_cast<std::size_t>(block_map_[n]) * order;
      double sum = 0.0;
      for (int l = 0; l < order; ++l) {
        const double re = normal_(rng) + phi_ * base[l].real();
        const double im = normal_(rng) + phi_ * base[l].imag();
        if (l == 0 && !first.empty()) first[n] = {re, im};
        sum += re * re + im * im;
      }
      power[n] = sum;
    }
  }

 private:
  const std::vector<int>& block_map_;
  int blocks_;
  double phi_;
  std::vector<std::complex<double>> common_;
  boost::random::normal_distribution<double> normal_;
};

// Reusable per-worker state for drawing trials.
class TrialSampler {
 public:
  TrialSampler(const SystemConfig& cfg, const BlockStructure& blocks, Mode mode)
      : cfg_(cfg),
        mode_(mode),
        block_map_(blocks.port_to_block()),
        link_(block_map_, blocks.count(), std::sqrt(blocks.delta / (1.0 - blocks.delta))) {
    if (mode == Mode::fast_nakagami_approx) {
      const auto fp = analytic::fast_params(cfg.interferer_orders);
      approx_order_ = fp.m_tilde_int();
      approx_scale_ = fp.U_hat;
    }
    const auto n = block_map_.size();
    scratch_.resize(n);
    first_.resize(n);
    composite_.resize(n);
  }

  void draw(TrialRng& rng, TrialBatch& out) {
    const auto n = block_map_.size();
    out.desired_power.resize(n);
    out.interference_power.assign(n, 0.0);
    link_.draw(cfg_.m, rng, out.desired_power, {});

    switch (mode_) {
      case Mode::slow:
        for (int order : cfg_.interferer_orders) {
          link_.draw(order, rng, scratch_, {});
          for (std::size_t p = 0; p < n; ++p) out.interference_power[p] += scratch_[p];
        }
        break;
      case Mode::fast_nakagami_approx:
        link_.draw(approx_order_, rng, scratch_, {});
        for (std::size_t p = 0; p < n; ++p) out.interference_power[p] = approx_scale_ * scratch_[p];
        break;
      case Mode::fast_composite: {
        std::fill(composite_.begin(), composite_.end(), std::complex<double>{});
        for (int order : cfg_.interferer_orders) {
          // Unit-modulus symbol with uniform phase, common to all ports.
          const std::complex<double> symbol = std::polar(1.0, phase_(rng));
          link_.draw(order, rng, scratch_, first_);
          for (std::size_t p = 0; p < n; ++p) {
            // Envelope from all components, phase from the first.
            const double mag = std::abs(first_[p]);
            const std::complex<double> unit = mag > 0.0 ? first_[p] / mag : std::complex<double>{1.0, 0.0};
            composite_[p] += symbol * std::sqrt(scratch_[p]) * unit;
          }
        }
        for (std::size_t p = 0; p < n; ++p) out.interference_power[p] = std::norm(composite_[p]);
        break;
      }
    }
    out.block_map = block_map_;
  }

  double max_sir(TrialRng& rng) {
    draw(rng, batch_);
    return batch_.max_sir();
  }

 private:
  const SystemConfig& cfg_;
  Mode mode_;
  std::vector<int> block_map_;
  LinkSampler link_;
  int approx_order_ = 1;
  double approx_scale_ = 1.0;
  std::vector<double> scratch_;
  std::vector<std::complex<double>> first_;
  std::vector<std::complex<double>> composite_;
  TrialBatch batch_;
  boost::random::uniform_real_distribution<double> phase_{0.0, 2.0 * std::numbers::pi};
};

void check_inputs(const SystemConfig& cfg, const BlockStructure& blocks) {
  cfg.validate();
  blocks.validate();
  detail::require(blocks.ports() == cfg.ports, "montecarlo: block lengths must sum to N = " +
                                                   std::to_string(cfg.ports));
}

OutageEstimate make_estimate(std::uint64_t outages, std::uint64_t trials) {
  OutageEstimate est;
  est.method = analytic::Method::monte_carlo;
  const double n = static_cast<double>(trials);
  est.value = static_cast<double>(outages) / n;
  est.error = std::sqrt(est.value * (1.0 - est.value) / n);
  est.meta["trials"] = std::to_string(trials);
  est.meta["outages"] = std::to_string(outages);
  return est;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::slow: return "slow";
    case Mode::fast_composite: return "fast_composite";
    case Mode::fast_nakagami_approx: return "fast_nakagami_approx";
  }
  return "?";
}

Mode mode_from_string(std::string_view name) {
  if (name == "slow") return Mode::slow;
  if (name == "fast_composite" || name == "composite") return Mode::fast_composite;
  if (name == "fast_nakagami_approx" || name == "fast" || name == "approx") return Mode::fast_nakagami_approx;
  throw DomainError("unknown Monte Carlo mode '" + std::string(name) + "'");
}

void McSettings::validate() const { detail::require(trials >= 1, "montecarlo: trials must be >= 1"); }

unsigned default_thread_count() {
  if (const char* env = std::getenv("FAMA_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial) {
  // Two mixing rounds decorrelate neighbouring (seed, trial) keys.
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix_step(s);
  std::uint64_t t = trial ^ 0xD1B54A32D192ED03ULL;
  state_ = a ^ splitmix_step(t);
}

TrialRng::result_type TrialRng::operator()() { return splitmix_step(state_); }

double TrialBatch::max_sir() const {
  double best = 0.0;
  for (std::size_t n = 0; n < desired_power.size(); ++n)
    best = std::max(best, desired_power[n] / interference_power[n]);
  return best;
}

TrialBatch sample_trial(const SystemConfig& cfg, const BlockStructure& blocks, Mode mode, TrialRng& rng) {
  check_inputs(cfg, blocks);
  TrialSampler sampler(cfg, blocks, mode);
  TrialBatch batch;
  sampler.draw(rng, batch);
  return batch;
}

std::vector<double> sample_max_sir(const SystemConfig& cfg, const BlockStructure& blocks, const McSettings& settings) {
  check_inputs(cfg, blocks);
  settings.validate();
  const std::uint64_t trials = settings.trials;
  std::vector<double> out(trials);

  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(settings.threads == 0 ? default_thread_count() : settings.threads, trials));
  auto run = [&](std::uint64_t lo, std::uint64_t hi) {
    TrialSampler sampler(cfg, blocks, settings.mode);
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRng rng(settings.seed, t);
      out[t] = sampler.max_sir(rng);
    }
  };
  if (workers <= 1) {
    run(0, trials);
    return out;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = trials * w / workers;
    const std::uint64_t hi = trials * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      try {
        run(lo, hi);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

std::vector<OutageEstimate> outage_from_samples(std::span<const double> max_sir, std::span<const double> gammas) {
  detail::require(!max_sir.empty(), "montecarlo: no samples");
  std::vector<OutageEstimate> out;
  out.reserve(gammas.size());
  for (double g : gammas) {
    detail::require(std::isfinite(g) && g > 0.0, "montecarlo: gamma must be positive");
    const auto outages = static_cast<std::uint64_t>(
        std::count_if(max_sir.begin(), max_sir.end(), [g](double s) { return s <= g; }));
    out.push_back(make_estimate(outages, max_sir.size()));
  }
  return out;
}

std::vector<OutageEstimate> estimate_op_curve(const SystemConfig& cfg, const BlockStructure& blocks,
                                              const McSettings& settings, std::span<const double> gammas) {
  const auto samples = sample_max_sir(cfg, blocks, settings);
  auto out = outage_from_samples(samples, gammas);
  for (auto& est : out) {
    est.meta["seed"] = std::to_string(settings.seed);
    est.meta["mode"] = std::string(to_string(settings.mode));
    est.meta["B"] = std::to_string(blocks.count());
  }
  return out;
}

OutageEstimate estimate_op(const SystemConfig& cfg, const BlockStructure& blocks, const McSettings& settings) {
  const double g[] = {cfg.gamma};
  return estimate_op_curve(cfg, blocks, settings, g).front();
}

GainEstimate gains_from_op(int users, int pool, double p_out, double p_out_error) {
  detail::require(pool >= users, "gains: the pool M must be >= U");
  detail::require(p_out_error >= 0.0, "gains: standard error must be >= 0");
  GainEstimate g;
  g.p_out = p_out;
  g.p_out_error = p_out_error;
  g.mux_gain = analytic::mux_gain(users, p_out);
  g.mux_gain_error = users * p_out_error;
  g.ofama_gain = analytic::ofama_gain(users, pool, p_out);
  g.ofama_gain_error = std::abs(analytic::ofama_gain_derivative(users, pool, p_out)) * p_out_error;
  return g;
}

GainEstimate estimate_gains(const SystemConfig& cfg, const BlockStructure& blocks, const McSettings& settings,
                            int pool) {
  detail::require(pool >= cfg.users, "gains: the pool M must be >= U");
  const auto op = estimate_op(cfg, blocks, settings);
  return gains_from_op(cfg.users, pool, op.value, op.error);
}

}  // namespace fama::montecarlo
