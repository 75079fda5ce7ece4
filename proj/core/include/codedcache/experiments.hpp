#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "codedcache/simulator.hpp"
#include "codedcache/types.hpp"

namespace codedcache {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Writes header + rows; deterministic bytes for identical input.
/// Throws std::invalid_argument when rows is empty.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

/// Fixed-precision float formatting shared by every preset, so repeated
/// runs produce identical files.
std::string csv_num(double v);

/// Gain vs queue length for the tau-fit family at fixed K and p.
struct Fig2Params {
  int num_caches = 10;
  double cache_prob = 0.5;
  std::vector<unsigned> taus;       // empty: {0, 2, 4, K-2}
  std::vector<uint64_t> lengths;    // empty: log-spaced 100 .. 50000
  int seeds = 10;
  uint64_t base_seed = 1;
  uint64_t measured = 0;  // 0: max(2e5, 20 L)
  int threads = 0;        // 0: hardware concurrency
};
CsvTable run_fig2(const Fig2Params& params);

/// Gain under first-fit with the queue length tied to the number of
/// caches (L = K), for several cache probabilities; the fitted intercept
/// of the 0.5 log_{1/p}(L) law is reported alongside.
struct Fig3Params {
  std::vector<double> probs{0.25, 0.5, 0.75};
  std::vector<uint64_t> lengths{100, 200, 400, 700, 1000};  // L = K grid
  int seeds = 10;
  uint64_t base_seed = 1;
  uint64_t measured = 200000;
  int threads = 0;
};
CsvTable run_fig3(const Fig3Params& params);

/// Large-L simulated gain next to the closed-form limit Kp/(1-(1-p)^K).
struct AsymptoteParams {
  int num_caches = 10;
  std::vector<double> probs{0.25, 0.5, 0.75};
  uint64_t queue_len = 50000;
  int seeds = 3;
  uint64_t base_seed = 1;
  uint64_t measured = 200000;
};
CsvTable run_asymptote(const AsymptoteParams& params);

/// End-to-end prototype run: an in-process origin server plus N edge
/// clients streaming distinct videos over loopback TCP.
struct TraceParams {
  int clients = 4;
  Millis start_interval_ms = 0;  // client i starts at i * interval
  std::filesystem::path db_dir;  // empty: synthesize one video per client
  uint64_t synth_video_bytes = 10 * 1024 * 1024;
  double cache_prob = 0.5;
  int tau = -1;  // -1: first-fit (K-2)
  int pipeline_depth = 50;
  Millis ttl_ms = 4;
  std::size_t symbol_size = 10240;
  Millis guard_ms = 20;
  uint64_t base_seed = 1;
  int smoothing_window = 40;
};

struct TraceResult {
  CsvTable table;  // one row per transmission
  double cumulative_gain = 0.0;
  double peak_smoothed_gain = 0.0;  // max of the EWMA series
  bool outputs_match = false;       // every client equals its source file
  uint64_t transmissions = 0;
  uint64_t raw_served = 0;
};
TraceResult run_trace(const TraceParams& params);

/// Deterministic pseudo-random file content for prototype experiments.
void write_synthetic_video(const std::filesystem::path& path, uint64_t bytes,
                           uint64_t seed);

}  // namespace codedcache
