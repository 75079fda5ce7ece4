#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "codedcache/placement.hpp"
#include "codedcache/types.hpp"
#include "codedcache/wire.hpp"

namespace codedcache {

struct ClientConfig {
  std::string server_host = "127.0.0.1";
  uint16_t server_port = 0;
  uint32_t cache_id = 0;
  uint64_t seed = 0;
  double cache_prob = 0.0;
  std::string video_id;
  int pipeline_depth = 50;
  Millis ttl_ms = 0;           // per-symbol deadline spacing; 0 derives it
  double video_rate_bps = 0;   // used to derive ttl_ms when ttl_ms == 0
  std::filesystem::path db_dir;  // placement-phase content source
  std::size_t symbol_size = 10240;
  Millis slack_ms = 10000;  // tolerated lateness past a symbol's deadline

  /// ttl_ms, or the symbol playback duration 8 * symbol_size / rate when
  /// unset, or 10 ms when no rate is known either.
  Millis effective_ttl() const;
};

struct PlannedRequest {
  SymbolId symbol;
  uint32_t ttl_ms = 0;
};

/// The request schedule for one video: every symbol the cache does not
/// hold, in sequence order. The j-th planned request (1-based) carries
/// ttl = min(j, pipeline_depth) * ttl_per_symbol, i.e. deadlines ramp up
/// across the initial window and stay at depth * ttl once the pipeline
/// is full.
std::vector<PlannedRequest> plan_requests(const CatalogEntry& entry,
                                          const CacheContents& cache,
                                          Millis ttl_per_symbol,
                                          int pipeline_depth);

/// In-order reassembly of one video from decoded and locally cached
/// symbols. Payloads enter in any order; bytes leave strictly in
/// sequence, with the final symbol trimmed to the file length.
class ReorderBuffer {
 public:
  ReorderBuffer(uint32_t num_symbols, uint64_t file_length,
                std::size_t symbol_size);

  void deliver(uint32_t seq, Bytes payload);
  bool has(uint32_t seq) const;

  /// Drains every contiguous payload starting at next_seq.
  Bytes take_ready();

  uint32_t next_seq() const { return next_seq_; }
  bool complete() const { return next_seq_ == num_symbols_; }
  uint64_t emitted_bytes() const { return emitted_; }

 private:
  uint32_t num_symbols_;
  uint64_t file_length_;
  std::size_t symbol_size_;
  uint32_t next_seq_ = 0;
  uint64_t emitted_ = 0;
  std::map<uint32_t, Bytes> pending_;
};

using OutstandingMap = std::unordered_map<SymbolId, Millis, SymbolIdHash>;

/// Handles one coded symbol: whatever this cache can decode and was
/// waiting for enters the reorder buffer, and every byte that became
/// contiguous is returned. Coded symbols with no missing requested
/// constituent are overheard traffic and yield nothing. Throws WireError
/// when a coded symbol addressed to us misses two or more constituents.
Bytes on_coded(const CodedMsg& coded, const CacheContents& cache,
               OutstandingMap& outstanding, ReorderBuffer& buf);

/// The edge cache process: populates its cache from the placement seed,
/// requests the missing symbols of one video under a bounded pipeline,
/// decodes coded replies, and emits the reconstructed byte stream.
class EdgeClient {
 public:
  explicit EdgeClient(ClientConfig cfg);

  struct Result {
    uint64_t bytes_emitted = 0;
    uint64_t requests_sent = 0;
    uint64_t coded_received = 0;
    uint64_t served_from_cache = 0;
  };

  /// Streams cfg.video_id into `out`; throws on any protocol or deadline
  /// failure. The emitted bytes equal the original file exactly.
  Result run(std::ostream& out);

 private:
  ClientConfig cfg_;
};

}  // namespace codedcache
