#pragma once

// Monte Carlo oracle: synthesizes block-correlated Nakagami-m channels port by
// port, selects the best port and counts outages.
//
// Every trial draws from its own counter-based stream keyed by (seed, trial),
// and outcomes are aggregated as exact integer counts, so an estimate depends
// only on (config, blocks, settings) and never on the worker count.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fama/analytic.hpp"

namespace fama::montecarlo {

using analytic::OutageEstimate;
using analytic::SystemConfig;
using correlation::BlockStructure;

enum class Mode {
  slow,                  // SIR X_n / Y_n, interferers summed in power
  fast_composite,        // SIR X_n / |sum_u s_u h_n^(u)|^2 with random symbols
  fast_nakagami_approx,  // SIR X_n / (U_hat Z_n), the moment-matched model
};

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct McSettings {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  Mode mode = Mode::slow;
  unsigned threads = 0;  // 0: default_thread_count()

  void validate() const;
};

/// Worker count from FAMA_THREADS, else the hardware concurrency (at least 1).
unsigned default_thread_count();

/// SplitMix64 stream for one trial. Satisfies UniformRandomBitGenerator.
class TrialRng {
 public:
  using result_type = std::uint64_t;

  TrialRng(std::uint64_t seed, std::uint64_t trial);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t state_;
};

/// Per-port powers of one channel realization. All powers share the scale of
/// the desired link (unit per-component variance before correlation).
struct TrialBatch {
  std::vector<double> desired_power;       // X_n
  std::vector<double> interference_power;  // Y_n, composite power, or U_hat Z_n
  std::vector<int> block_map;              // port -> block index

  /// max_n desired / interference.
  double max_sir() const;
};

/// One channel realization for `mode`, drawn from `rng`.
TrialBatch sample_trial(const SystemConfig& cfg, const BlockStructure& blocks, Mode mode, TrialRng& rng);

/// Best-port SIR for every trial, in trial order.
std::vector<double> sample_max_sir(const SystemConfig& cfg, const BlockStructure& blocks, const McSettings& settings);

/// Outage fraction at cfg.gamma with standard error sqrt(p (1 - p) / trials).
OutageEstimate estimate_op(const SystemConfig& cfg, const BlockStructure& blocks, const McSettings& settings);

/// Outage fractions at several linear thresholds from one shared trial set.
std::vector<OutageEstimate> estimate_op_curve(const SystemConfig& cfg, const BlockStructure& blocks,
                                              const McSettings& settings, std::span<const double> gammas);

/// Outage fractions from precomputed best-port SIRs.
std::vector<OutageEstimate> outage_from_samples(std::span<const double> max_sir, std::span<const double> gammas);

struct GainEstimate {
  double p_out = 0.0;
  double p_out_error = 0.0;
  double mux_gain = 0.0;
  double mux_gain_error = 0.0;
  double ofama_gain = 0.0;
  double ofama_gain_error = 0.0;
};

/// Multiplexing gains at an outage estimate, standard errors by the first-order
/// delta method.
GainEstimate gains_from_op(int users, int pool, double p_out, double p_out_error);

/// Gains at the Monte Carlo outage of cfg; pool is the O-FAMA user pool M >= U.
GainEstimate estimate_gains(const SystemConfig& cfg, const BlockStructure& blocks, const McSettings& settings,
                            int pool);

}  // namespace fama::montecarlo
