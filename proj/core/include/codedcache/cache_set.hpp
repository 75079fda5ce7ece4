#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace codedcache {

/// Subset of the cache identifiers {1, ..., K}, stored as a bitmask.
///
/// For K <= 64 the whole set lives in a single machine word and every
/// operation is a handful of instructions; larger universes (needed when
/// simulating L = K scaling up to K = 1000) spill the remaining words to a
/// heap vector. Two sets can only be combined when they share the same
/// universe size K.
class CacheSet {
 public:
  CacheSet() = default;

  explicit CacheSet(int num_caches) : k_(num_caches) {
    if (num_caches < 0) throw std::invalid_argument("CacheSet: negative K");
    if (extra_words() > 0) ext_.assign(extra_words(), 0);
  }

  static CacheSet of(int num_caches, std::initializer_list<int> members) {
    CacheSet s(num_caches);
    for (int id : members) s.insert(id);
    return s;
  }

  static CacheSet full(int num_caches) {
    CacheSet s(num_caches);
    for (int id = 1; id <= num_caches; ++id) s.insert(id);
    return s;
  }

  int universe() const { return k_; }

  bool contains(int id) const {
    check_id(id);
    return (word(word_index(id)) >> bit_index(id)) & 1u;
  }

  void insert(int id) {
    check_id(id);
    mutable_word(word_index(id)) |= uint64_t{1} << bit_index(id);
  }

  void erase(int id) {
    check_id(id);
    mutable_word(word_index(id)) &= ~(uint64_t{1} << bit_index(id));
  }

  int count() const {
    int n = std::popcount(w0_);
    for (uint64_t w : ext_) n += std::popcount(w);
    return n;
  }

  bool empty() const {
    if (w0_ != 0) return false;
    for (uint64_t w : ext_) {
      if (w != 0) return false;
    }
    return true;
  }

  bool subset_of(const CacheSet& other) const {
    check_same_universe(other);
    if ((w0_ & ~other.w0_) != 0) return false;
    for (std::size_t i = 0; i < ext_.size(); ++i) {
      if ((ext_[i] & ~other.ext_[i]) != 0) return false;
    }
    return true;
  }

  bool intersects(const CacheSet& other) const {
    check_same_universe(other);
    if ((w0_ & other.w0_) != 0) return true;
    for (std::size_t i = 0; i < ext_.size(); ++i) {
      if ((ext_[i] & other.ext_[i]) != 0) return true;
    }
    return false;
  }

  CacheSet operator|(const CacheSet& other) const {
    check_same_universe(other);
    CacheSet r(*this);
    r.w0_ |= other.w0_;
    for (std::size_t i = 0; i < r.ext_.size(); ++i) r.ext_[i] |= other.ext_[i];
    return r;
  }

  CacheSet operator&(const CacheSet& other) const {
    check_same_universe(other);
    CacheSet r(*this);
    r.w0_ &= other.w0_;
    for (std::size_t i = 0; i < r.ext_.size(); ++i) r.ext_[i] &= other.ext_[i];
    return r;
  }

  /// Set difference: elements of this set not in `other`.
  CacheSet operator-(const CacheSet& other) const {
    check_same_universe(other);
    CacheSet r(*this);
    r.w0_ &= ~other.w0_;
    for (std::size_t i = 0; i < r.ext_.size(); ++i) r.ext_[i] &= ~other.ext_[i];
    return r;
  }

  CacheSet& operator|=(const CacheSet& other) {
    check_same_universe(other);
    w0_ |= other.w0_;
    for (std::size_t i = 0; i < ext_.size(); ++i) ext_[i] |= other.ext_[i];
    return *this;
  }

  CacheSet& operator&=(const CacheSet& other) {
    check_same_universe(other);
    w0_ &= other.w0_;
    for (std::size_t i = 0; i < ext_.size(); ++i) ext_[i] &= other.ext_[i];
    return *this;
  }

  bool operator==(const CacheSet& other) const {
    return k_ == other.k_ && w0_ == other.w0_ && ext_ == other.ext_;
  }
  bool operator!=(const CacheSet& other) const { return !(*this == other); }

  /// Bits for caches 1..64; the whole set when K <= 64.
  uint64_t low_word() const { return w0_; }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (int id = 1; id <= k_; ++id) {
      if (contains(id)) out.push_back(id);
    }
    return out;
  }

  /// "{1,3,4}" rendering, mostly for test failure messages and logs.
  std::string to_string() const;

 private:
  static constexpr int kInlineBits = 64;

  int extra_words() const {
    return k_ <= kInlineBits ? 0 : (k_ - 1) / 64;  // words beyond w0_
  }
  static std::size_t word_index(int id) {
    return static_cast<std::size_t>(id - 1) / 64;
  }
  static unsigned bit_index(int id) {
    return static_cast<unsigned>(id - 1) % 64;
  }
  uint64_t word(std::size_t i) const { return i == 0 ? w0_ : ext_[i - 1]; }
  uint64_t& mutable_word(std::size_t i) { return i == 0 ? w0_ : ext_[i - 1]; }

  void check_id(int id) const {
    if (id < 1 || id > k_) {
      throw std::out_of_range("CacheSet: cache id " + std::to_string(id) +
                              " outside universe 1.." + std::to_string(k_));
    }
  }
  void check_same_universe(const CacheSet& other) const {
    if (k_ != other.k_) {
      throw std::invalid_argument("CacheSet: universe mismatch (" +
                                  std::to_string(k_) + " vs " +
                                  std::to_string(other.k_) + ")");
    }
  }

  int k_ = 0;
  uint64_t w0_ = 0;
  std::vector<uint64_t> ext_;  // words 1.. when K > 64
};

}  // namespace codedcache
