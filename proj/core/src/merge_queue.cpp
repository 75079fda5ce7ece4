#include "codedcache/merge_queue.hpp"

#include <bit>
#include <limits>

namespace codedcache {

int32_t MergeQueue::allocate(MergedRequest req) {
  int32_t idx;
  if (free_ >= 0) {
    idx = free_;
    free_ = hot_[static_cast<std::size_t>(idx)].next;
  } else {
    if (hot_.size() >= static_cast<std::size_t>(std::numeric_limits<int32_t>::max())) {
      throw std::length_error("MergeQueue: too many entries");
    }
    idx = static_cast<int32_t>(hot_.size());
    hot_.emplace_back();
    seq_.emplace_back(0);
    cold_.emplace_back();
  }
  Hot& h = hot_[static_cast<std::size_t>(idx)];
  h.targets_w0 = req.targets().low_word();
  h.avail_w0 = req.availability().low_word();
  h.deadline = req.deadline();
  h.prev = h.next = -1;
  cold_[static_cast<std::size_t>(idx)] = std::move(req);
  return idx;
}

void MergeQueue::release(int32_t idx) {
  Hot& h = hot_[static_cast<std::size_t>(idx)];
  h.next = free_;
  h.prev = -1;
  free_ = idx;
  cold_[static_cast<std::size_t>(idx)] = MergedRequest();
}

void MergeQueue::unlink(int32_t idx) {
  Hot& h = hot_[static_cast<std::size_t>(idx)];
  if (h.prev >= 0) {
    hot_[static_cast<std::size_t>(h.prev)].next = h.next;
  } else {
    head_ = h.next;
  }
  if (h.next >= 0) {
    hot_[static_cast<std::size_t>(h.next)].prev = h.prev;
  } else {
    tail_ = h.prev;
  }
  h.prev = h.next = -1;
}

void MergeQueue::link_before(int32_t idx, int32_t before) {
  Hot& h = hot_[static_cast<std::size_t>(idx)];
  if (before < 0) {  // append at tail
    h.prev = tail_;
    h.next = -1;
    if (tail_ >= 0) {
      hot_[static_cast<std::size_t>(tail_)].next = idx;
    } else {
      head_ = idx;
    }
    tail_ = idx;
    return;
  }
  Hot& b = hot_[static_cast<std::size_t>(before)];
  h.prev = b.prev;
  h.next = before;
  if (b.prev >= 0) {
    hot_[static_cast<std::size_t>(b.prev)].next = idx;
  } else {
    head_ = idx;
  }
  b.prev = idx;
}

int32_t MergeQueue::find_position_backward(int32_t from, Millis deadline,
                                           uint64_t seq) const {
  int32_t pos = from;
  while (pos >= 0) {
    const Hot& h = hot_[static_cast<std::size_t>(pos)];
    if (h.deadline < deadline ||
        (h.deadline == deadline && seq_[static_cast<std::size_t>(pos)] < seq)) {
      break;
    }
    pos = h.prev;
  }
  return pos;
}

InsertOutcome MergeQueue::insert(const RawRequest& r, const EngineConfig& cfg) {
  if (r.availability.universe() != cfg.num_caches) {
    throw std::invalid_argument("MergeQueue::insert: request universe != K");
  }
  MergedRequest lifted = lift_raw(r);
  const bool single_word = cfg.num_caches <= 64;
  const uint64_t lt = lifted.targets().low_word();
  const uint64_t la = lifted.availability().low_word();

  std::size_t ordinal = 0;
  for (int32_t i = head_; i >= 0; i = hot_[static_cast<std::size_t>(i)].next, ++ordinal) {
    Hot& h = hot_[static_cast<std::size_t>(i)];
    // Mergeability on the first word: exact for K <= 64, a necessary
    // condition otherwise.
    if (((lt & ~h.avail_w0) | (h.targets_w0 & ~la)) != 0) continue;
    unsigned rho;
    if (single_word) {
      rho = static_cast<unsigned>(std::popcount(la & ~h.avail_w0 & ~h.targets_w0) +
                                  std::popcount(h.avail_w0 & ~la & ~lt));
    } else {
      const Misfit m = misfit(lifted, cold_[static_cast<std::size_t>(i)]);
      if (!m.is_finite()) continue;
      rho = m.value();
    }
    if (rho > cfg.tau) continue;

    MergedRequest& entry = cold_[static_cast<std::size_t>(i)];
    entry = merge(entry, lifted);
    ++raw_count_;
    h.targets_w0 = entry.targets().low_word();
    h.avail_w0 = entry.availability().low_word();
    const Millis old_deadline = h.deadline;
    h.deadline = entry.deadline();
    if (h.deadline < old_deadline) {
      // Restore (deadline, seq) order; the entry only moves frontward.
      const int32_t prev = h.prev;
      if (prev >= 0) {
        const Hot& p = hot_[static_cast<std::size_t>(prev)];
        const uint64_t my_seq = seq_[static_cast<std::size_t>(i)];
        if (p.deadline > h.deadline ||
            (p.deadline == h.deadline &&
             seq_[static_cast<std::size_t>(prev)] > my_seq)) {
          const int32_t anchor = find_position_backward(prev, h.deadline, my_seq);
          unlink(i);
          if (anchor < 0) {
            link_before(i, head_);
          } else {
            link_before(i, hot_[static_cast<std::size_t>(anchor)].next);
          }
        }
      }
    }
    return InsertOutcome{true, ordinal, entry_count_};
  }

  // No entry qualified: the lifted request becomes its own entry at its
  // deadline position (after any existing entry with the same deadline).
  const Millis deadline = lifted.deadline();
  const uint64_t seq = next_seq_++;
  const int32_t idx = allocate(std::move(lifted));
  seq_[static_cast<std::size_t>(idx)] = seq;
  const int32_t anchor = find_position_backward(tail_, deadline, seq);
  if (anchor < 0) {
    link_before(idx, head_);
  } else {
    const int32_t after = hot_[static_cast<std::size_t>(anchor)].next;
    link_before(idx, after);
  }
  ++entry_count_;
  ++raw_count_;
  return InsertOutcome{false, 0, entry_count_};
}

std::vector<MergedRequest> MergeQueue::pop_due(Millis now, Millis guard) {
  std::vector<MergedRequest> out;
  while (head_ >= 0 &&
         hot_[static_cast<std::size_t>(head_)].deadline <= now + guard) {
    out.push_back(pop_head());
  }
  return out;
}

MergedRequest MergeQueue::pop_head() {
  if (head_ < 0) {
    throw std::out_of_range("MergeQueue::pop_head: empty queue");
  }
  const int32_t idx = head_;
  MergedRequest req = std::move(cold_[static_cast<std::size_t>(idx)]);
  unlink(idx);
  release(idx);
  --entry_count_;
  raw_count_ -= req.parts().size();
  return req;
}

std::vector<const MergedRequest*> MergeQueue::snapshot() const {
  std::vector<const MergedRequest*> out;
  out.reserve(entry_count_);
  for (int32_t i = head_; i >= 0; i = hot_[static_cast<std::size_t>(i)].next) {
    out.push_back(&cold_[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace codedcache
