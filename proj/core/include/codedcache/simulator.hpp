#pragma once

#include <cstdint>
#include <vector>

#include "codedcache/merge_queue.hpp"
#include "codedcache/placement.hpp"
#include "codedcache/request.hpp"

namespace codedcache {

/// What "queue length L" counts when capping the pending backlog:
/// unmerged raw requests (the default reading) or merged queue entries,
/// exposed for sensitivity analysis.
enum class QueueMetric { Raw, Entries };

struct SimConfig {
  int num_caches = 0;      // K
  double cache_prob = 0.0;  // p
  unsigned tau = 0;
  uint64_t queue_len = 0;   // L, cap on pending raw requests (or entries)
  uint64_t warmup = 0;      // raw requests processed before measuring
  uint64_t measured = 0;    // raw requests in the measured window
  uint64_t rng_seed = 0;
  QueueMetric metric = QueueMetric::Raw;

  void validate() const;

  /// Default windows: warmup 10 L, measured max(2e5, 20 L).
  static SimConfig defaults(int K, double p, unsigned tau, uint64_t L,
                            uint64_t seed);
};

struct GainResult {
  double gain = 0.0;        // served / transmissions over the measured window
  uint64_t transmissions = 0;
  uint64_t served = 0;
  double mean_entry_size = 0.0;  // average pending raw/entry ratio
  double gain_stderr = 0.0;      // from 10 batch means of the measured window
  // bookkeeping for conservation checks
  uint64_t generated = 0;
  uint64_t served_total = 0;  // including warmup
  uint64_t pending_raw = 0;
};

/// Draws one synthetic request: origin uniform on {1..K}, every other
/// cache present in the availability set independently with probability p.
/// Deadline and symbol sequence number are supplied by the caller.
RawRequest sample_request(SplitMix64& rng, int num_caches, double p,
                          Millis deadline, uint32_t seq);

/// Monte Carlo steady state: one arrival at a time with deadline =
/// arrival index + L, departing the earliest-deadline entry whenever the
/// pending backlog exceeds L. Gain is measured over the post-warmup
/// window only. gain is NaN if the window produced no transmissions.
GainResult run_steady_state(const SimConfig& cfg);

/// Large-queue limit of the global coding gain: K p / (1 - (1-p)^K).
/// p = 0 is rejected (the expression degenerates; the limit is 1).
double asymptotic_gain(int num_caches, double p);

/// Queue sizing helper: users * rate[b/s] * delay[s] / (8 * symbol_bytes),
/// rounded to the nearest integer.
uint64_t expected_queue_length(uint64_t users, double video_rate_bps,
                               double delay_s, double symbol_bytes);

/// Least-squares intercept c of gain ~ 0.5 * log_{1/p}(L) + c with the
/// slope pinned at 0.5. Requires at least two points with distinct L and
/// p strictly inside (0, 1).
double fit_scaling_constant(const std::vector<std::pair<uint64_t, double>>& points,
                            double p);

/// Exponential smoothing with alpha = 2 / (window + 1); s0 = v0.
std::vector<double> ewma_smooth(const std::vector<double>& values, int window);

}  // namespace codedcache
