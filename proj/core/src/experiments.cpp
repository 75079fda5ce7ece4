#include "codedcache/experiments.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "codedcache/client.hpp"
#include "codedcache/server.hpp"

namespace codedcache {

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  if (table.rows.empty()) {
    throw std::invalid_argument("emit_csv: no rows");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path.string());
  auto write_line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  write_line(table.header);
  for (const auto& row : table.rows) write_line(row);
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path.string());
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

/// Runs `tasks` on a small worker pool; each task owns its index.
void run_parallel(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& task) {
  unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, count == 0 ? 1 : static_cast<unsigned>(count));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        task(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    var /= static_cast<double>(xs.size() - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace

CsvTable run_fig2(const Fig2Params& params) {
  std::vector<unsigned> taus = params.taus;
  if (taus.empty()) {
    taus = {0, 2, 4, static_cast<unsigned>(params.num_caches - 2)};
  }
  std::vector<uint64_t> lengths = params.lengths;
  if (lengths.empty()) {
    lengths = {100, 300, 1000, 3000, 10000, 30000, 50000};
  }

  struct Point {
    unsigned tau;
    uint64_t len;
    int seed_idx;
    double gain = 0.0;
  };
  std::vector<Point> points;
  for (unsigned tau : taus) {
    for (uint64_t len : lengths) {
      for (int s = 0; s < params.seeds; ++s) {
        points.push_back(Point{tau, len, s});
      }
    }
  }

  run_parallel(points.size(), params.threads, [&](std::size_t i) {
    Point& pt = points[i];
    SimConfig cfg = SimConfig::defaults(
        params.num_caches, params.cache_prob, pt.tau, pt.len,
        params.base_seed + 7919 * static_cast<uint64_t>(pt.seed_idx) + pt.len);
    if (params.measured > 0) cfg.measured = params.measured;
    pt.gain = run_steady_state(cfg).gain;
  });

  CsvTable table;
  table.header = {"tau", "L", "mean_gain", "stderr"};
  for (unsigned tau : taus) {
    for (uint64_t len : lengths) {
      std::vector<double> gains;
      for (const Point& pt : points) {
        if (pt.tau == tau && pt.len == len) gains.push_back(pt.gain);
      }
      const MeanStderr ms = mean_stderr(gains);
      table.rows.push_back({std::to_string(tau), std::to_string(len),
                            csv_num(ms.mean), csv_num(ms.stderr_)});
    }
  }
  return table;
}

CsvTable run_fig3(const Fig3Params& params) {
  struct Point {
    double p;
    uint64_t len;  // L = K
    int seed_idx;
    double gain = 0.0;
  };
  std::vector<Point> points;
  for (double p : params.probs) {
    for (uint64_t len : params.lengths) {
      for (int s = 0; s < params.seeds; ++s) points.push_back(Point{p, len, s});
    }
  }

  run_parallel(points.size(), params.threads, [&](std::size_t i) {
    Point& pt = points[i];
    const int K = static_cast<int>(pt.len);
    SimConfig cfg = SimConfig::defaults(
        K, pt.p, static_cast<unsigned>(K - 2), pt.len,
        params.base_seed + 104729 * static_cast<uint64_t>(pt.seed_idx) + pt.len);
    cfg.measured = params.measured;
    pt.gain = run_steady_state(cfg).gain;
  });

  CsvTable table;
  table.header = {"p", "L", "mean_gain", "stderr", "fitted_c"};
  for (double p : params.probs) {
    std::vector<std::pair<uint64_t, double>> fit_points;
    std::vector<std::vector<std::string>> rows_for_p;
    for (uint64_t len : params.lengths) {
      std::vector<double> gains;
      for (const Point& pt : points) {
        if (pt.p == p && pt.len == len) gains.push_back(pt.gain);
      }
      const MeanStderr ms = mean_stderr(gains);
      fit_points.emplace_back(len, ms.mean);
      rows_for_p.push_back({csv_num(p), std::to_string(len), csv_num(ms.mean),
                            csv_num(ms.stderr_), ""});
    }
    const double c = fit_scaling_constant(fit_points, p);
    for (auto& row : rows_for_p) {
      row.back() = csv_num(c);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

CsvTable run_asymptote(const AsymptoteParams& params) {
  CsvTable table;
  table.header = {"K", "p", "asymptotic_gain", "simulated_gain", "stderr"};
  for (double p : params.probs) {
    std::vector<double> gains(static_cast<std::size_t>(params.seeds));
    run_parallel(gains.size(), 0, [&](std::size_t i) {
      SimConfig cfg = SimConfig::defaults(params.num_caches, p, 0,
                                          params.queue_len,
                                          params.base_seed + 13 * i);
      cfg.measured = params.measured;
      gains[i] = run_steady_state(cfg).gain;
    });
    const MeanStderr ms = mean_stderr(gains);
    table.rows.push_back({std::to_string(params.num_caches), csv_num(p),
                          csv_num(asymptotic_gain(params.num_caches, p)),
                          csv_num(ms.mean), csv_num(ms.stderr_)});
  }
  return table;
}

void write_synthetic_video(const std::filesystem::path& path, uint64_t bytes,
                           uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_synthetic_video: cannot open " +
                             path.string());
  }
  SplitMix64 rng{seed};
  uint64_t written = 0;
  while (written < bytes) {
    const uint64_t word = rng.next();
    const std::size_t take =
        static_cast<std::size_t>(std::min<uint64_t>(8, bytes - written));
    out.write(reinterpret_cast<const char*>(&word), static_cast<std::streamsize>(take));
    written += take;
  }
}

TraceResult run_trace(const TraceParams& params) {
  namespace fs = std::filesystem;
  if (params.clients < 1) {
    throw std::invalid_argument("run_trace: need at least one client");
  }
  const int num_caches = params.clients;

  fs::path db = params.db_dir;
  fs::path scratch;
  if (db.empty()) {
    scratch = fs::temp_directory_path() /
              ("codedcache-trace-" + std::to_string(::getpid()) + "-" +
               std::to_string(params.base_seed));
    fs::create_directories(scratch);
    for (int i = 1; i <= params.clients; ++i) {
      write_synthetic_video(scratch / ("video" + std::to_string(i) + ".dat"),
                            params.synth_video_bytes,
                            params.base_seed + static_cast<uint64_t>(i));
    }
    db = scratch;
  }

  ServerConfig server_cfg;
  server_cfg.port = 0;
  server_cfg.db_dir = db;
  server_cfg.system.num_caches = num_caches;
  server_cfg.system.cache_prob = params.cache_prob;
  server_cfg.system.symbol_size = params.symbol_size;
  server_cfg.tau = params.tau < 0 ? static_cast<unsigned>(num_caches - 2)
                                  : static_cast<unsigned>(params.tau);
  server_cfg.guard_ms = params.guard_ms;

  TraceResult result;
  try {
    OriginServer server(server_cfg);
    server.start();

    const std::vector<CatalogEntry> entries = server.catalog().entries();
    if (entries.size() < static_cast<std::size_t>(params.clients)) {
      throw std::invalid_argument("run_trace: fewer videos than clients");
    }

    std::vector<std::string> errors(params.clients);
    std::vector<char> ok(params.clients, 0);  // one byte per thread, not vector<bool>
    std::vector<std::thread> client_threads;
    for (int i = 0; i < params.clients; ++i) {
      client_threads.emplace_back([&, i] {
        try {
          if (params.start_interval_ms > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(params.start_interval_ms * i));
          }
          ClientConfig cfg;
          cfg.server_host = "127.0.0.1";
          cfg.server_port = server.port();
          cfg.cache_id = static_cast<uint32_t>(i + 1);
          cfg.seed = params.base_seed + 1000003ull * static_cast<uint64_t>(i);
          cfg.cache_prob = params.cache_prob;
          cfg.video_id = entries[static_cast<std::size_t>(i)].video_id;
          cfg.pipeline_depth = params.pipeline_depth;
          cfg.ttl_ms = params.ttl_ms;
          cfg.db_dir = db;
          cfg.symbol_size = params.symbol_size;
          std::ostringstream sink;
          EdgeClient(cfg).run(sink);
          // byte-for-byte comparison against the source file
          std::ifstream src(db / cfg.video_id, std::ios::binary);
          std::ostringstream want;
          want << src.rdbuf();
          ok[static_cast<std::size_t>(i)] = sink.str() == want.str();
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(i)] = e.what();
        }
      });
    }
    for (std::thread& t : client_threads) t.join();
    server.stop();

    result.outputs_match = true;
    for (int i = 0; i < params.clients; ++i) {
      if (!errors[static_cast<std::size_t>(i)].empty()) {
        throw std::runtime_error("run_trace: client " + std::to_string(i + 1) +
                                 " failed: " + errors[static_cast<std::size_t>(i)]);
      }
      if (!ok[static_cast<std::size_t>(i)]) result.outputs_match = false;
    }

    const std::vector<TransmissionRecord> trace = server.transmissions();
    const std::vector<double> smoothed =
        server.smoothed_gain(params.smoothing_window);
    result.transmissions = trace.size();
    result.table.header = {"index", "t_ms", "parts", "cumulative_gain",
                           "smoothed_gain"};
    uint64_t served = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      served += trace[i].num_parts;
      result.table.rows.push_back(
          {std::to_string(i), std::to_string(trace[i].timestamp),
           std::to_string(trace[i].num_parts),
           csv_num(static_cast<double>(served) / static_cast<double>(i + 1)),
           csv_num(smoothed[i])});
      result.peak_smoothed_gain = std::max(result.peak_smoothed_gain, smoothed[i]);
    }
    result.raw_served = served;
    result.cumulative_gain = server.cumulative_gain();
  } catch (...) {
    if (!scratch.empty()) fs::remove_all(scratch);
    throw;
  }

  if (!scratch.empty()) fs::remove_all(scratch);
  return result;
}

}  // namespace codedcache
