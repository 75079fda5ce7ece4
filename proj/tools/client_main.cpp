// Edge client: populates its cache from the shared placement seed,
// streams one video through the coded-caching protocol, and writes the
// reconstructed bytes to a file or stdout.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "codedcache/client.hpp"

int main(int argc, char** argv) {
  CLI::App app{"coded caching edge client"};

  codedcache::ClientConfig cfg;
  std::string server = "127.0.0.1:9000";
  std::string db_dir;
  std::string out = "-";
  app.add_option("--server", server, "host:port of the origin server")
      ->required();
  app.add_option("--id", cfg.cache_id, "cache id (1..K)")->required();
  app.add_option("--seed", cfg.seed, "placement seed")->required();
  app.add_option("--prob", cfg.cache_prob, "cache probability p")->required();
  app.add_option("--video", cfg.video_id, "video to stream")->required();
  app.add_option("--depth", cfg.pipeline_depth, "outstanding symbols");
  app.add_option("--out", out, "output path, or - for stdout");
  app.add_option("--db", db_dir,
                 "content directory for the placement phase (required when p > 0)");
  app.add_option("--ttl-ms", cfg.ttl_ms, "per-symbol deadline spacing");
  app.add_option("--rate-bps", cfg.video_rate_bps,
                 "video bitrate used to derive ttl when --ttl-ms is unset");
  app.add_option("--symbol-size", cfg.symbol_size, "bytes per symbol");
  app.add_option("--slack-ms", cfg.slack_ms, "tolerated lateness past a deadline");

  CLI11_PARSE(app, argc, argv);

  const auto colon = server.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --server must be host:port\n";
    return 1;
  }
  cfg.server_host = server.substr(0, colon);
  cfg.server_port = static_cast<uint16_t>(std::stoul(server.substr(colon + 1)));
  cfg.db_dir = db_dir;

  try {
    codedcache::EdgeClient client(cfg);
    codedcache::EdgeClient::Result res;
    if (out == "-") {
      res = client.run(std::cout);
    } else {
      std::ofstream file(out, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot open " << out << "\n";
        return 1;
      }
      res = client.run(file);
    }
    std::cerr << "[client] emitted " << res.bytes_emitted << " bytes, "
              << res.requests_sent << " requests, " << res.coded_received
              << " coded symbols, " << res.served_from_cache
              << " served from cache\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
