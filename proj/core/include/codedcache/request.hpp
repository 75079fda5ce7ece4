#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedcache/cache_set.hpp"
#include "codedcache/types.hpp"

namespace codedcache {

/// A single user demand as seen by the server: the edge cache k it came
/// through, the set S of other caches holding the requested symbol, and a
/// deadline in milliseconds. k is never a member of S (a locally held
/// symbol is served from the cache without contacting the server).
struct RawRequest {
  int origin = 0;        // k
  CacheSet availability;  // S
  Millis deadline = 0;   // t
  SymbolId symbol;
};

/// One constituent of a merged request. The original availability set is
/// carried along so the decodability invariant stays checkable after any
/// number of merges.
struct RequestPart {
  int target = 0;
  SymbolId symbol;
  CacheSet original_availability;
};

/// A coalesced demand (K; S; t): one coded transmission will serve every
/// target in K, each decoding against its own cache.
///
/// Invariants: K and S are disjoint, |parts| == |K| with one symbol per
/// target, t is the minimum constituent deadline, S is the intersection
/// of the constituents' original availability sets, and any part's target
/// belongs to every other part's original availability (decodability).
class MergedRequest {
 public:
  /// Empty placeholder (no targets); real values come from lift_raw and
  /// merge only.
  MergedRequest() = default;

  const CacheSet& targets() const { return targets_; }
  const CacheSet& availability() const { return availability_; }
  Millis deadline() const { return deadline_; }
  const std::vector<RequestPart>& parts() const { return parts_; }
  int universe() const { return targets_.universe(); }

  /// Full invariant sweep; used by tests and debug assertions.
  bool check_invariants(std::string* why = nullptr) const;

  std::string to_string() const;

 private:
  friend MergedRequest lift_raw(const RawRequest& r);
  friend MergedRequest merge(const MergedRequest& a, const MergedRequest& b);
  friend class MergeQueue;

  CacheSet targets_;       // K
  CacheSet availability_;  // S
  Millis deadline_ = 0;
  std::vector<RequestPart> parts_;
};

/// Misfit value: a natural number, or infinite when the pair cannot merge.
/// Finite values lie in {0, ..., K-2}.
class Misfit {
 public:
  static Misfit finite(unsigned v) { return Misfit(v); }
  static Misfit infinite() { return Misfit(kInf); }

  bool is_finite() const { return v_ != kInf; }
  bool is_infinite() const { return v_ == kInf; }

  unsigned value() const {
    if (!is_finite()) throw std::logic_error("Misfit: value() of infinite");
    return v_;
  }

  /// True iff finite and <= tau; the threshold-rule predicate.
  bool within(unsigned tau) const { return is_finite() && v_ <= tau; }

  bool operator==(const Misfit&) const = default;

  std::string to_string() const {
    return is_finite() ? std::to_string(v_) : "inf";
  }

 private:
  static constexpr uint32_t kInf = std::numeric_limits<uint32_t>::max();
  explicit Misfit(uint32_t v) : v_(v) {}
  uint32_t v_;
};

/// Embeds a raw request as the singleton merged request ({k}; S; t).
/// Throws std::invalid_argument when k is a member of S.
MergedRequest lift_raw(const RawRequest& r);

/// Two merged requests can be combined into one coded transmission iff
/// each side's targets are covered by the other side's availability.
inline bool is_mergeable(const MergedRequest& a, const MergedRequest& b) {
  return a.targets().subset_of(b.availability()) &&
         b.targets().subset_of(a.availability());
}

/// (K1 u K2; S1 n S2; min{t1, t2}) with the parts concatenated.
/// Throws std::invalid_argument when the pair is not mergeable.
MergedRequest merge(const MergedRequest& a, const MergedRequest& b);

/// Number of availability elements wasted by merging a with b:
/// |S1 \ (S2 u K2)| + |S2 \ (S1 u K1)|, or infinite if not mergeable.
inline Misfit misfit(const MergedRequest& a, const MergedRequest& b) {
  if (!is_mergeable(a, b)) return Misfit::infinite();
  const unsigned wasted_a = static_cast<unsigned>(
      ((a.availability() - b.availability()) - b.targets()).count());
  const unsigned wasted_b = static_cast<unsigned>(
      ((b.availability() - a.availability()) - a.targets()).count());
  return Misfit::finite(wasted_a + wasted_b);
}

}  // namespace codedcache
