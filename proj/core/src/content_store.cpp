#include "codedcache/content_store.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace codedcache {

ContentStore::ContentStore(std::filesystem::path dir, std::size_t symbol_size)
    : dir_(std::move(dir)), symbol_size_(symbol_size) {
  if (symbol_size_ < 1) {
    throw std::invalid_argument("ContentStore: symbol_size must be >= 1");
  }
  if (!std::filesystem::is_directory(dir_)) {
    throw std::invalid_argument("ContentStore: " + dir_.string() +
                                " is not a directory");
  }
  std::vector<CatalogEntry> entries;
  for (const auto& de : std::filesystem::directory_iterator(dir_)) {
    if (!de.is_regular_file()) continue;
    CatalogEntry e;
    e.video_id = de.path().filename().string();
    e.file_length = de.file_size();
    e.num_symbols =
        static_cast<uint32_t>((e.file_length + symbol_size_ - 1) / symbol_size_);
    entries.push_back(std::move(e));
  }
  catalog_ = Catalog(std::move(entries));
}

const Bytes& ContentStore::file_bytes(const std::string& video_id) {
  auto it = loaded_.find(video_id);
  if (it != loaded_.end()) return it->second;

  const CatalogEntry* entry = catalog_.find(video_id);
  if (entry == nullptr) {
    throw std::invalid_argument("ContentStore: unknown video " + video_id);
  }
  std::ifstream in(dir_ / video_id, std::ios::binary);
  if (!in) {
    throw std::runtime_error("ContentStore: cannot open " + video_id);
  }
  Bytes data(entry->file_length);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (static_cast<uint64_t>(in.gcount()) != entry->file_length) {
    throw std::runtime_error("ContentStore: short read from " + video_id);
  }
  return loaded_.emplace(video_id, std::move(data)).first->second;
}

Bytes ContentStore::symbol_payload(const SymbolId& id) {
  std::lock_guard<std::mutex> lock(mu_);
  const CatalogEntry* entry = catalog_.find(id.video_id);
  if (entry == nullptr || id.seq >= entry->num_symbols) {
    throw std::invalid_argument("ContentStore: unknown symbol " + id.to_string());
  }
  const Bytes& data = file_bytes(id.video_id);
  const uint64_t begin = static_cast<uint64_t>(id.seq) * symbol_size_;
  const uint64_t end = std::min<uint64_t>(begin + symbol_size_, data.size());
  Bytes out(symbol_size_, 0);
  std::copy(data.begin() + static_cast<std::ptrdiff_t>(begin),
            data.begin() + static_cast<std::ptrdiff_t>(end), out.begin());
  return out;
}

}  // namespace codedcache
