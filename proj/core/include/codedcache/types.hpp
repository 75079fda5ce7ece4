#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace codedcache {

using Millis = int64_t;
using Bytes = std::vector<uint8_t>;

/// One constant-size chunk of one video.
struct SymbolId {
  std::string video_id;
  uint32_t seq = 0;

  bool operator==(const SymbolId&) const = default;
  auto operator<=>(const SymbolId&) const = default;

  std::string to_string() const {
    return video_id + "#" + std::to_string(seq);
  }
};

struct SymbolIdHash {
  std::size_t operator()(const SymbolId& s) const {
    std::size_t h = std::hash<std::string>{}(s.video_id);
    return h ^ (std::hash<uint32_t>{}(s.seq) + 0x9e3779b9 + (h << 6) + (h >> 2));
  }
};

/// System-wide parameters shared by server and clients.
///
/// K is capped at 64 for the networked prototype so that every
/// availability set fits a machine word; the simulator accepts larger K
/// through its own config.
struct SystemConfig {
  int num_caches = 0;            // K
  double cache_prob = 0.0;       // p
  std::size_t symbol_size = 10240;

  void validate() const {
    if (num_caches < 1 || num_caches > 64) {
      throw std::invalid_argument("SystemConfig: num_caches must be in 1..64");
    }
    if (!(cache_prob >= 0.0 && cache_prob <= 1.0)) {
      throw std::invalid_argument("SystemConfig: cache_prob must be in [0,1]");
    }
    if (symbol_size < 1) {
      throw std::invalid_argument("SystemConfig: symbol_size must be >= 1");
    }
  }
};

}  // namespace codedcache
