#include "codedcache/cache_set.hpp"

namespace codedcache {

std::string CacheSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for (int id : members()) {
    if (!first) out += ",";
    out += std::to_string(id);
    first = false;
  }
  out += "}";
  return out;
}

}  // namespace codedcache
