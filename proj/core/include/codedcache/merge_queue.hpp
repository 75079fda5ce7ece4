#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "codedcache/request.hpp"

namespace codedcache {

/// Threshold configuration for the tau-fit merging rule. tau = K-2 is the
/// first-fit rule (merge at any finite misfit), tau = 0 the perfect-fit
/// rule (merge only at zero misfit).
struct EngineConfig {
  int num_caches = 0;  // K
  unsigned tau = 0;

  static EngineConfig with_tau(int num_caches, unsigned tau) {
    if (num_caches < 2) {
      throw std::invalid_argument("EngineConfig: need at least 2 caches");
    }
    if (tau > static_cast<unsigned>(num_caches - 2)) {
      throw std::invalid_argument("EngineConfig: tau must be <= K-2");
    }
    return EngineConfig{num_caches, tau};
  }
  static EngineConfig first_fit(int num_caches) {
    return with_tau(num_caches, static_cast<unsigned>(num_caches - 2));
  }
  static EngineConfig perfect_fit(int num_caches) {
    return with_tau(num_caches, 0);
  }
};

struct InsertOutcome {
  bool merged = false;            // false: inserted as a fresh entry
  std::size_t merged_index = 0;   // ordinal of the entry merged into
  std::size_t queue_entries = 0;  // entry count after the insert
};

/// Deadline-ordered sequence of merged requests; the server's coded
/// symbol queue. Entries are kept sorted by (deadline, insertion seq).
///
/// The insert scan is the hot path of the whole system (queues reach
/// 10^4..10^5 entries in the Monte Carlo runs), so entries live in a
/// slab: an index-linked list whose per-entry scan state (first target
/// and availability words plus the deadline) is packed into a parallel
/// array that the traversal reads sequentially. For K <= 64 the scan is
/// pure word arithmetic; larger universes use the packed words as a
/// necessary-condition filter before the full set comparison.
///
/// Single-writer: callers serialize mutation externally (the server
/// wraps one queue in a mutex shared by its encoder and transmitter).
class MergeQueue {
 public:
  /// Sequential tau-fit threshold insertion: lifts r and walks the queue
  /// front to back, merging into the first entry with misfit <= tau. A
  /// merge can tighten the entry's deadline, in which case the entry is
  /// repositioned toward the front to keep the queue sorted. When no
  /// entry qualifies the lifted request joins the queue at its deadline
  /// position. Each entry is examined at most once.
  InsertOutcome insert(const RawRequest& r, const EngineConfig& cfg);

  /// Removes and returns, earliest deadline first, every entry with
  /// deadline <= now + guard.
  std::vector<MergedRequest> pop_due(Millis now, Millis guard);

  /// Removes and returns the earliest-deadline entry.
  /// Throws std::out_of_range when the queue is empty.
  MergedRequest pop_head();

  std::size_t entry_count() const { return entry_count_; }
  std::size_t raw_count() const { return raw_count_; }
  bool empty() const { return entry_count_ == 0; }

  std::optional<Millis> earliest_deadline() const {
    if (head_ < 0) return std::nullopt;
    return hot_[static_cast<std::size_t>(head_)].deadline;
  }

  /// Read-only view in queue order, for tests and replay checks. The
  /// pointers are invalidated by the next mutating call.
  std::vector<const MergedRequest*> snapshot() const;

 private:
  // 32 bytes so two scan states share a cache line.
  struct Hot {
    uint64_t targets_w0 = 0;  // first 64 cache bits of the target set
    uint64_t avail_w0 = 0;    // first 64 cache bits of the availability set
    Millis deadline = 0;
    int32_t prev = -1;
    int32_t next = -1;
  };
  static_assert(sizeof(Hot) == 32);

  int32_t allocate(MergedRequest req);
  void release(int32_t idx);
  void unlink(int32_t idx);
  void link_before(int32_t idx, int32_t before);  // before = -1: at tail
  /// Walks toward the front from `from` and returns the first node that
  /// must precede (deadline, seq), or -1 when idx belongs at the head.
  int32_t find_position_backward(int32_t from, Millis deadline, uint64_t seq) const;

  std::vector<Hot> hot_;
  std::vector<uint64_t> seq_;        // tie-break: earlier insertion first
  std::vector<MergedRequest> cold_;  // parallel to hot_
  int32_t head_ = -1;
  int32_t tail_ = -1;
  int32_t free_ = -1;  // chained through Hot::next
  std::size_t entry_count_ = 0;
  std::size_t raw_count_ = 0;
  uint64_t next_seq_ = 0;
};

}  // namespace codedcache
