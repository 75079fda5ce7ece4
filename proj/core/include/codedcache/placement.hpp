#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "codedcache/types.hpp"

namespace codedcache {

/// SplitMix64 generator. The algorithm is normative for the wire
/// protocol: client and server replay the same draw sequence from a
/// shared seed to agree on cache contents without transferring them.
struct SplitMix64 {
  uint64_t state = 0;

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

/// floor(p * 2^53) computed exactly from p's binary64 bit pattern, so the
/// placement threshold is identical on every conforming machine.
uint64_t placement_threshold(double p);

/// Keep-this-symbol decision for one 64-bit draw: true iff the top 53
/// bits of u fall below floor(p * 2^53).
inline bool placement_decision(uint64_t u, double p) {
  return (u >> 11) < placement_threshold(p);
}

struct CatalogEntry {
  std::string video_id;
  uint32_t num_symbols = 0;
  uint64_t file_length = 0;
};

/// Ordered video list. Canonical order is byte-wise lexicographic by
/// video_id; both sides of the protocol iterate it identically.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<CatalogEntry> entries);

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  const CatalogEntry* find(const std::string& video_id) const;
  uint64_t total_symbols() const;

 private:
  std::vector<CatalogEntry> entries_;
};

/// The symbols one edge cache prefetched, and (on the client side) their
/// payload bytes. The held set is a pure function of (seed, catalog, p).
class CacheContents {
 public:
  bool holds(const SymbolId& id) const;
  uint64_t held_count() const { return held_count_; }

  void store_payload(const SymbolId& id, Bytes payload);
  const Bytes* payload(const SymbolId& id) const;

 private:
  friend CacheContents build_cache(uint64_t seed, const Catalog& catalog,
                                   double p);
  std::unordered_map<std::string, std::vector<bool>> held_;
  std::unordered_map<SymbolId, Bytes, SymbolIdHash> payloads_;
  uint64_t held_count_ = 0;
};

/// Replays the placement phase: one SplitMix64 draw per symbol in
/// canonical catalog order, keeping the symbol iff placement_decision.
CacheContents build_cache(uint64_t seed, const Catalog& catalog, double p);

}  // namespace codedcache
