#include "codedcache/request.hpp"

namespace codedcache {

MergedRequest lift_raw(const RawRequest& r) {
  if (r.origin < 1 || r.origin > r.availability.universe()) {
    throw std::invalid_argument("lift_raw: origin " + std::to_string(r.origin) +
                                " outside universe");
  }
  if (r.availability.contains(r.origin)) {
    throw std::invalid_argument(
        "lift_raw: origin " + std::to_string(r.origin) +
        " is in the availability set (request would be served locally)");
  }
  if (r.deadline < 0) {
    throw std::invalid_argument("lift_raw: negative deadline");
  }
  MergedRequest m;
  m.targets_ = CacheSet::of(r.availability.universe(), {r.origin});
  m.availability_ = r.availability;
  m.deadline_ = r.deadline;
  m.parts_.push_back(RequestPart{r.origin, r.symbol, r.availability});
  return m;
}

MergedRequest merge(const MergedRequest& a, const MergedRequest& b) {
  if (!is_mergeable(a, b)) {
    throw std::invalid_argument("merge: requests " + a.to_string() + " and " +
                                b.to_string() + " are not mergeable");
  }
  MergedRequest m;
  m.targets_ = a.targets_ | b.targets_;
  m.availability_ = a.availability_ & b.availability_;
  m.deadline_ = std::min(a.deadline_, b.deadline_);
  m.parts_.reserve(a.parts_.size() + b.parts_.size());
  m.parts_.insert(m.parts_.end(), a.parts_.begin(), a.parts_.end());
  m.parts_.insert(m.parts_.end(), b.parts_.begin(), b.parts_.end());
  return m;
}

bool MergedRequest::check_invariants(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (targets_.universe() != availability_.universe()) {
    return fail("universe mismatch between targets and availability");
  }
  if (targets_.empty()) return fail("empty target set");
  if (targets_.intersects(availability_)) {
    return fail("targets and availability overlap");
  }
  if (parts_.size() != static_cast<std::size_t>(targets_.count())) {
    return fail("|parts| != |targets|");
  }
  CacheSet avail_intersection = CacheSet::full(targets_.universe());
  CacheSet seen_targets(targets_.universe());
  for (const RequestPart& p : parts_) {
    if (!targets_.contains(p.target)) return fail("part target not in targets");
    if (seen_targets.contains(p.target)) return fail("duplicate part target");
    seen_targets.insert(p.target);
    avail_intersection &= p.original_availability;
  }
  if (availability_ != avail_intersection) {
    return fail("availability != intersection of original availabilities");
  }
  // Decodability: each part's target is in every other part's original set.
  // (The deadline-is-minimum invariant is not re-derivable here because
  // parts do not retain per-constituent deadlines; merge() maintains it.)
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    for (std::size_t j = 0; j < parts_.size(); ++j) {
      if (i == j) continue;
      if (!parts_[j].original_availability.contains(parts_[i].target)) {
        return fail("decodability violated: target of part " +
                    std::to_string(i) + " missing from availability of part " +
                    std::to_string(j));
      }
    }
  }
  return true;
}

std::string MergedRequest::to_string() const {
  return "(" + targets_.to_string() + "; " + availability_.to_string() +
         "; t=" + std::to_string(deadline_) + ")";
}

}  // namespace codedcache
