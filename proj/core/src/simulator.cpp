#include "codedcache/simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace codedcache {

void SimConfig::validate() const {
  if (num_caches < 2) {
    throw std::invalid_argument("SimConfig: num_caches must be >= 2");
  }
  if (!(cache_prob >= 0.0 && cache_prob <= 1.0)) {
    throw std::invalid_argument("SimConfig: cache_prob must be in [0,1]");
  }
  if (tau > static_cast<unsigned>(num_caches - 2)) {
    throw std::invalid_argument("SimConfig: tau must be <= K-2");
  }
  if (queue_len < 1) throw std::invalid_argument("SimConfig: L must be >= 1");
  if (measured < 1) {
    throw std::invalid_argument("SimConfig: measured must be >= 1");
  }
}

SimConfig SimConfig::defaults(int K, double p, unsigned tau, uint64_t L,
                              uint64_t seed) {
  SimConfig cfg;
  cfg.num_caches = K;
  cfg.cache_prob = p;
  cfg.tau = tau;
  cfg.queue_len = L;
  cfg.warmup = 10 * L;
  cfg.measured = std::max<uint64_t>(200000, 20 * L);
  cfg.rng_seed = seed;
  return cfg;
}

RawRequest sample_request(SplitMix64& rng, int num_caches, double p,
                          Millis deadline, uint32_t seq) {
  RawRequest r;
  r.origin = 1 + static_cast<int>(rng.next() % static_cast<uint64_t>(num_caches));
  r.availability = CacheSet(num_caches);
  for (int j = 1; j <= num_caches; ++j) {
    if (j == r.origin) continue;
    if (placement_decision(rng.next(), p)) r.availability.insert(j);
  }
  r.deadline = deadline;
  r.symbol = SymbolId{"sim", seq};
  return r;
}

GainResult run_steady_state(const SimConfig& cfg) {
  cfg.validate();
  const EngineConfig engine{cfg.num_caches, cfg.tau};
  MergeQueue queue;
  SplitMix64 rng{cfg.rng_seed};

  GainResult res;
  const uint64_t total = cfg.warmup + cfg.measured;
  const uint64_t batch_len = std::max<uint64_t>(1, cfg.measured / 10);
  std::vector<double> batch_gains;
  uint64_t batch_served = 0, batch_trans = 0, batch_ticks = 0;
  double entry_size_accum = 0.0;
  uint64_t entry_size_samples = 0;

  auto over_cap = [&]() {
    return cfg.metric == QueueMetric::Raw ? queue.raw_count() > cfg.queue_len
                                          : queue.entry_count() > cfg.queue_len;
  };

  for (uint64_t i = 0; i < total; ++i) {
    RawRequest r = sample_request(rng, cfg.num_caches, cfg.cache_prob,
                                  static_cast<Millis>(i + cfg.queue_len),
                                  static_cast<uint32_t>(i));
    queue.insert(r, engine);
    const bool measuring = i >= cfg.warmup;
    while (over_cap()) {
      MergedRequest departed = queue.pop_head();
      const uint64_t parts = departed.parts().size();
      res.served_total += parts;
      if (measuring) {
        res.transmissions += 1;
        res.served += parts;
        batch_trans += 1;
        batch_served += parts;
      }
    }
    if (measuring) {
      if (queue.entry_count() > 0) {
        entry_size_accum += static_cast<double>(queue.raw_count()) /
                            static_cast<double>(queue.entry_count());
        ++entry_size_samples;
      }
      if (++batch_ticks == batch_len) {
        if (batch_trans > 0) {
          batch_gains.push_back(static_cast<double>(batch_served) /
                                static_cast<double>(batch_trans));
        }
        batch_served = batch_trans = batch_ticks = 0;
      }
    }
  }

  res.generated = total;
  res.pending_raw = queue.raw_count();
  res.gain = res.transmissions > 0
                 ? static_cast<double>(res.served) /
                       static_cast<double>(res.transmissions)
                 : std::numeric_limits<double>::quiet_NaN();
  res.mean_entry_size =
      entry_size_samples > 0 ? entry_size_accum / entry_size_samples : 0.0;
  if (batch_gains.size() >= 2) {
    double mean = 0.0;
    for (double g : batch_gains) mean += g;
    mean /= batch_gains.size();
    double var = 0.0;
    for (double g : batch_gains) var += (g - mean) * (g - mean);
    var /= (batch_gains.size() - 1);
    res.gain_stderr = std::sqrt(var / batch_gains.size());
  }
  return res;
}

double asymptotic_gain(int num_caches, double p) {
  if (num_caches < 1) {
    throw std::invalid_argument("asymptotic_gain: K must be >= 1");
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument(
        "asymptotic_gain: p must be in (0,1]; the p=0 limit is 1 but the "
        "expression is 0/0");
  }
  return num_caches * p / (1.0 - std::pow(1.0 - p, num_caches));
}

uint64_t expected_queue_length(uint64_t users, double video_rate_bps,
                               double delay_s, double symbol_bytes) {
  if (users == 0 || video_rate_bps <= 0 || delay_s <= 0 || symbol_bytes <= 0) {
    throw std::invalid_argument("expected_queue_length: inputs must be positive");
  }
  const double value =
      static_cast<double>(users) * video_rate_bps * delay_s / (8.0 * symbol_bytes);
  return static_cast<uint64_t>(std::llround(value));
}

double fit_scaling_constant(
    const std::vector<std::pair<uint64_t, double>>& points, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("fit_scaling_constant: p must be in (0,1)");
  }
  if (points.size() < 2) {
    throw std::invalid_argument("fit_scaling_constant: need >= 2 points");
  }
  bool distinct = false;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first != points[0].first) distinct = true;
  }
  if (!distinct) {
    throw std::invalid_argument("fit_scaling_constant: need distinct L values");
  }
  // With the slope fixed, the least-squares intercept is the mean residual.
  const double log_base = std::log(1.0 / p);
  double sum = 0.0;
  for (const auto& [len, gain] : points) {
    sum += gain - 0.5 * std::log(static_cast<double>(len)) / log_base;
  }
  return sum / static_cast<double>(points.size());
}

std::vector<double> ewma_smooth(const std::vector<double>& values, int window) {
  if (window < 1) throw std::invalid_argument("ewma_smooth: window must be >= 1");
  std::vector<double> out;
  out.reserve(values.size());
  const double alpha = 2.0 / (window + 1);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s = i == 0 ? values[0] : alpha * values[i] + (1.0 - alpha) * s;
    out.push_back(s);
  }
  return out;
}

}  // namespace codedcache
