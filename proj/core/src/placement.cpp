#include "codedcache/placement.hpp"

#include <algorithm>
#include <bit>

namespace codedcache {

uint64_t placement_threshold(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("placement_threshold: p must be in [0,1]");
  }
  const uint64_t bits = std::bit_cast<uint64_t>(p);
  const uint64_t exponent = (bits >> 52) & 0x7FF;
  const uint64_t mantissa = bits & ((uint64_t{1} << 52) - 1);
  if (exponent == 0) {
    // Zero or subnormal: p < 2^-1022, so p * 2^53 < 1.
    return 0;
  }
  // p = (2^52 + mantissa) * 2^(exponent - 1075), so
  // p * 2^53 = (2^52 + mantissa) * 2^(exponent - 1022).
  const uint64_t significand = (uint64_t{1} << 52) | mantissa;
  if (exponent >= 1022) {
    return significand << (exponent - 1022);  // shift is 0 or 1 for p <= 1
  }
  return significand >> (1022 - exponent);
}

Catalog::Catalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) {
              return a.video_id < b.video_id;
            });
  for (std::size_t i = 0; i + 1 < entries_.size(); ++i) {
    if (entries_[i].video_id == entries_[i + 1].video_id) {
      throw std::invalid_argument("Catalog: duplicate video_id " +
                                  entries_[i].video_id);
    }
  }
  for (const CatalogEntry& e : entries_) {
    if (e.video_id.empty()) {
      throw std::invalid_argument("Catalog: empty video_id");
    }
  }
}

const CatalogEntry* Catalog::find(const std::string& video_id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), video_id,
                             [](const CatalogEntry& e, const std::string& id) {
                               return e.video_id < id;
                             });
  if (it == entries_.end() || it->video_id != video_id) return nullptr;
  return &*it;
}

uint64_t Catalog::total_symbols() const {
  uint64_t n = 0;
  for (const CatalogEntry& e : entries_) n += e.num_symbols;
  return n;
}

bool CacheContents::holds(const SymbolId& id) const {
  auto it = held_.find(id.video_id);
  if (it == held_.end() || id.seq >= it->second.size()) return false;
  return it->second[id.seq];
}

void CacheContents::store_payload(const SymbolId& id, Bytes payload) {
  payloads_[id] = std::move(payload);
}

const Bytes* CacheContents::payload(const SymbolId& id) const {
  auto it = payloads_.find(id);
  return it == payloads_.end() ? nullptr : &it->second;
}

CacheContents build_cache(uint64_t seed, const Catalog& catalog, double p) {
  CacheContents contents;
  SplitMix64 rng{seed};
  for (const CatalogEntry& e : catalog.entries()) {
    std::vector<bool> held(e.num_symbols, false);
    for (uint32_t seq = 0; seq < e.num_symbols; ++seq) {
      if (placement_decision(rng.next(), p)) {
        held[seq] = true;
        ++contents.held_count_;
      }
    }
    contents.held_.emplace(e.video_id, std::move(held));
  }
  return contents;
}

}  // namespace codedcache
