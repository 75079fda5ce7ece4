// Independent reference implementations of the request algebra, written
// against plain std::set arithmetic. The real implementations are checked
// against these exhaustively; nothing here may call into the library's
// merge/misfit path.
#pragma once

#include <optional>
#include <set>

#include "codedcache/cache_set.hpp"
#include "codedcache/request.hpp"

namespace brute {

struct Req {
  std::set<int> targets;
  std::set<int> avail;
};

inline Req from_merged(const codedcache::MergedRequest& m) {
  Req r;
  for (int id : m.targets().members()) r.targets.insert(id);
  for (int id : m.availability().members()) r.avail.insert(id);
  return r;
}

inline bool is_subset(const std::set<int>& a, const std::set<int>& b) {
  for (int x : a) {
    if (b.count(x) == 0) return false;
  }
  return true;
}

inline std::set<int> set_union(const std::set<int>& a, const std::set<int>& b) {
  std::set<int> out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline std::set<int> set_intersect(const std::set<int>& a,
                                   const std::set<int>& b) {
  std::set<int> out;
  for (int x : a) {
    if (b.count(x) != 0) out.insert(x);
  }
  return out;
}

inline std::set<int> set_minus(const std::set<int>& a, const std::set<int>& b) {
  std::set<int> out;
  for (int x : a) {
    if (b.count(x) == 0) out.insert(x);
  }
  return out;
}

inline bool mergeable(const Req& a, const Req& b) {
  return is_subset(a.targets, b.avail) && is_subset(b.targets, a.avail);
}

// Misfit per the set-arithmetic definition; nullopt plays infinity.
inline std::optional<int> misfit(const Req& a, const Req& b) {
  if (!mergeable(a, b)) return std::nullopt;
  const auto wasted_a = set_minus(a.avail, set_union(b.avail, b.targets));
  const auto wasted_b = set_minus(b.avail, set_union(a.avail, a.targets));
  return static_cast<int>(wasted_a.size() + wasted_b.size());
}

inline Req merge(const Req& a, const Req& b) {
  return Req{set_union(a.targets, b.targets), set_intersect(a.avail, b.avail)};
}

}  // namespace brute
