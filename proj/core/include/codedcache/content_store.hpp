#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <unordered_map>

#include "codedcache/placement.hpp"
#include "codedcache/types.hpp"

namespace codedcache {

/// A directory of video files split on demand into constant-size symbols.
/// The catalog lists the regular files in byte-wise lexicographic order;
/// each file contributes ceil(file_length / symbol_size) symbols, the last
/// one zero-padded to symbol_size.
class ContentStore {
 public:
  ContentStore(std::filesystem::path dir, std::size_t symbol_size);

  const Catalog& catalog() const { return catalog_; }
  std::size_t symbol_size() const { return symbol_size_; }

  /// Payload of one symbol, always exactly symbol_size bytes. Files are
  /// read once and kept in memory. Throws on unknown symbols.
  Bytes symbol_payload(const SymbolId& id);

 private:
  const Bytes& file_bytes(const std::string& video_id);

  std::filesystem::path dir_;
  std::size_t symbol_size_;
  Catalog catalog_;
  std::mutex mu_;
  std::unordered_map<std::string, Bytes> loaded_;
};

}  // namespace codedcache
