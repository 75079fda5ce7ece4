// Origin server: serves a content directory to edge clients, merging
// requests with the tau-fit rule and multicasting coded symbols.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "codedcache/server.hpp"

namespace {
std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded caching origin server"};

  codedcache::ServerConfig cfg;
  std::string db_dir;
  std::string tau = "max";
  std::string gain_csv;
  app.add_option("--port", cfg.port, "TCP port (0 = ephemeral)")->required();
  app.add_option("--db", db_dir, "content directory")->required();
  app.add_option("--caches", cfg.system.num_caches, "number of edge caches K")
      ->required();
  app.add_option("--prob", cfg.system.cache_prob, "cache probability p")
      ->required();
  app.add_option("--tau", tau, "merge threshold (0..K-2 or 'max')");
  app.add_option("--symbol-size", cfg.system.symbol_size, "bytes per symbol");
  app.add_option("--guard-ms", cfg.guard_ms, "transmit-ahead margin");
  app.add_option("--gain-csv", gain_csv, "write per-transmission gain CSV on exit");
  app.add_flag("--eager", cfg.eager, "flush the queue whenever no request is in flight");
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress per-transmission log lines");

  CLI11_PARSE(app, argc, argv);

  cfg.db_dir = db_dir;
  cfg.log_transmissions = !quiet;
  cfg.tau = tau == "max" ? static_cast<unsigned>(cfg.system.num_caches - 2)
                         : static_cast<unsigned>(std::stoul(tau));

  try {
    codedcache::OriginServer server(cfg);
    server.start();
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cout << "[server] listening on 127.0.0.1:" << server.port() << " K="
              << cfg.system.num_caches << " p=" << cfg.system.cache_prob
              << " tau=" << cfg.tau << "\n";
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    const double gain = server.cumulative_gain();
    std::cout << "[server] transmissions=" << server.transmissions().size()
              << " cumulative gain=" << gain << "\n";
    if (!gain_csv.empty()) server.write_gain_csv(gain_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
