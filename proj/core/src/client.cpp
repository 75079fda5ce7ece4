#include "codedcache/client.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <thread>

#include "codedcache/content_store.hpp"
#include "codedcache/net.hpp"

namespace codedcache {

Millis ClientConfig::effective_ttl() const {
  if (ttl_ms > 0) return ttl_ms;
  if (video_rate_bps > 0) {
    const double seconds = 8.0 * static_cast<double>(symbol_size) / video_rate_bps;
    return std::max<Millis>(1, static_cast<Millis>(seconds * 1000.0));
  }
  return 10;
}

std::vector<PlannedRequest> plan_requests(const CatalogEntry& entry,
                                          const CacheContents& cache,
                                          Millis ttl_per_symbol,
                                          int pipeline_depth) {
  if (ttl_per_symbol < 1) {
    throw std::invalid_argument("plan_requests: ttl_per_symbol must be >= 1");
  }
  if (pipeline_depth < 1) {
    throw std::invalid_argument("plan_requests: pipeline_depth must be >= 1");
  }
  std::vector<PlannedRequest> plan;
  uint64_t position = 0;
  for (uint32_t seq = 0; seq < entry.num_symbols; ++seq) {
    const SymbolId id{entry.video_id, seq};
    if (cache.holds(id)) continue;
    ++position;
    const uint64_t ramp = std::min<uint64_t>(position, pipeline_depth);
    const uint64_t ttl = ramp * static_cast<uint64_t>(ttl_per_symbol);
    plan.push_back(PlannedRequest{
        id, static_cast<uint32_t>(std::min<uint64_t>(ttl, 0xFFFFFFFFull))});
  }
  return plan;
}

ReorderBuffer::ReorderBuffer(uint32_t num_symbols, uint64_t file_length,
                             std::size_t symbol_size)
    : num_symbols_(num_symbols),
      file_length_(file_length),
      symbol_size_(symbol_size) {
  if (symbol_size_ < 1) {
    throw std::invalid_argument("ReorderBuffer: symbol_size must be >= 1");
  }
  const uint64_t expected =
      (file_length_ + symbol_size_ - 1) / symbol_size_;
  if (expected != num_symbols_) {
    throw std::invalid_argument("ReorderBuffer: num_symbols inconsistent with file_length");
  }
}

void ReorderBuffer::deliver(uint32_t seq, Bytes payload) {
  if (seq >= num_symbols_) {
    throw std::invalid_argument("ReorderBuffer: seq out of range");
  }
  if (seq < next_seq_ || pending_.count(seq) != 0) {
    throw std::invalid_argument("ReorderBuffer: duplicate delivery of seq " +
                                std::to_string(seq));
  }
  if (payload.size() != symbol_size_) {
    throw std::invalid_argument("ReorderBuffer: payload size mismatch");
  }
  pending_.emplace(seq, std::move(payload));
}

bool ReorderBuffer::has(uint32_t seq) const {
  return seq < next_seq_ || pending_.count(seq) != 0;
}

Bytes ReorderBuffer::take_ready() {
  Bytes out;
  while (true) {
    auto it = pending_.find(next_seq_);
    if (it == pending_.end()) break;
    std::size_t take = symbol_size_;
    if (next_seq_ + 1 == num_symbols_) {
      // final symbol: strip the zero padding
      take = static_cast<std::size_t>(
          file_length_ - static_cast<uint64_t>(num_symbols_ - 1) * symbol_size_);
    }
    out.insert(out.end(), it->second.begin(), it->second.begin() + take);
    emitted_ += take;
    pending_.erase(it);
    ++next_seq_;
  }
  return out;
}

Bytes on_coded(const CodedMsg& coded, const CacheContents& cache,
               OutstandingMap& outstanding, ReorderBuffer& buf) {
  int missing = 0;
  const SymbolHeader* missing_header = nullptr;
  bool missing_requested = false;
  for (const SymbolHeader& h : coded.headers) {
    if (cache.holds(h)) continue;
    ++missing;
    missing_header = &h;
    if (outstanding.count(h) != 0) missing_requested = true;
  }
  if (missing == 0) return {};  // overheard: everything already cached
  if (missing >= 2) {
    if (missing_requested) {
      throw WireError("on_coded: coded symbol addressed to this cache misses " +
                      std::to_string(missing) + " constituents");
    }
    return {};  // overheard traffic for other caches
  }
  if (!missing_requested) return {};  // single gap, but not one we asked for

  auto [id, payload] = decode_coded(coded, cache);
  (void)missing_header;
  outstanding.erase(id);
  buf.deliver(id.seq, std::move(payload));
  return buf.take_ready();
}

namespace {

Millis elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

EdgeClient::EdgeClient(ClientConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.cache_id < 1) {
    throw std::invalid_argument("ClientConfig: cache_id must be >= 1");
  }
  if (!(cfg_.cache_prob >= 0.0 && cfg_.cache_prob <= 1.0)) {
    throw std::invalid_argument("ClientConfig: cache_prob must be in [0,1]");
  }
  if (cfg_.pipeline_depth < 1) {
    throw std::invalid_argument("ClientConfig: pipeline_depth must be >= 1");
  }
}

EdgeClient::Result EdgeClient::run(std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Result result;

  TcpStream stream = TcpStream::connect(cfg_.server_host, cfg_.server_port);
  stream.write_frame(HelloMsg{cfg_.cache_id, cfg_.seed,
                              std::bit_cast<uint64_t>(cfg_.cache_prob)});
  stream.write_frame(CatalogReqMsg{});
  auto reply = stream.read_frame();
  if (!reply) throw std::runtime_error("client: server closed during handshake");
  if (const ErrorMsg* err = std::get_if<ErrorMsg>(&*reply)) {
    throw std::runtime_error("client: server rejected session: " + err->text);
  }
  const CatalogRespMsg* resp = std::get_if<CatalogRespMsg>(&*reply);
  if (resp == nullptr) {
    throw std::runtime_error("client: expected CATALOG_RESP");
  }
  const Catalog catalog(resp->entries);
  const CatalogEntry* entry = catalog.find(cfg_.video_id);
  if (entry == nullptr) {
    throw std::runtime_error("client: video " + cfg_.video_id +
                             " not in catalog");
  }

  CacheContents cache = build_cache(cfg_.seed, catalog, cfg_.cache_prob);
  if (cache.held_count() > 0) {
    if (cfg_.db_dir.empty()) {
      throw std::runtime_error(
          "client: cache holds symbols but no --db directory to read their "
          "payloads from");
    }
    ContentStore store(cfg_.db_dir, cfg_.symbol_size);
    // The local content must be the same database the server serves.
    if (store.catalog().entries().size() != catalog.entries().size()) {
      throw std::runtime_error("client: local db does not match server catalog");
    }
    for (std::size_t i = 0; i < catalog.entries().size(); ++i) {
      const CatalogEntry& a = catalog.entries()[i];
      const CatalogEntry& b = store.catalog().entries()[i];
      if (a.video_id != b.video_id || a.num_symbols != b.num_symbols ||
          a.file_length != b.file_length) {
        throw std::runtime_error("client: local db mismatch for " + a.video_id);
      }
    }
    for (const CatalogEntry& e : catalog.entries()) {
      for (uint32_t seq = 0; seq < e.num_symbols; ++seq) {
        const SymbolId id{e.video_id, seq};
        if (cache.holds(id)) cache.store_payload(id, store.symbol_payload(id));
      }
    }
  }

  ReorderBuffer buf(entry->num_symbols, entry->file_length, cfg_.symbol_size);
  for (uint32_t seq = 0; seq < entry->num_symbols; ++seq) {
    const SymbolId id{entry->video_id, seq};
    if (cache.holds(id)) {
      buf.deliver(seq, *cache.payload(id));
      ++result.served_from_cache;
    }
  }
  {
    const Bytes ready = buf.take_ready();
    if (!ready.empty()) {
      out.write(reinterpret_cast<const char*>(ready.data()),
                static_cast<std::streamsize>(ready.size()));
    }
  }

  const std::vector<PlannedRequest> plan = plan_requests(
      *entry, cache, cfg_.effective_ttl(), cfg_.pipeline_depth);

  std::mutex mu;
  std::condition_variable cv;
  OutstandingMap outstanding;
  bool failed = false;
  std::string sender_error;

  std::thread sender([&] {
    try {
      for (const PlannedRequest& pr : plan) {
        {
          std::unique_lock<std::mutex> lk(mu);
          cv.wait(lk, [&] {
            return failed || outstanding.size() <
                                 static_cast<std::size_t>(cfg_.pipeline_depth);
          });
          if (failed) return;
          outstanding.emplace(pr.symbol, elapsed_since(t0) + pr.ttl_ms);
        }
        stream.write_frame(RequestMsg{pr.symbol, pr.ttl_ms});
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lk(mu);
      if (sender_error.empty()) sender_error = e.what();
    }
  });

  try {
    while (!buf.complete()) {
      Millis earliest = std::numeric_limits<Millis>::max();
      {
        std::lock_guard<std::mutex> lk(mu);
        for (const auto& [id, deadline] : outstanding) {
          earliest = std::min(earliest, deadline);
        }
        if (!sender_error.empty()) {
          throw std::runtime_error("client: send failed: " + sender_error);
        }
      }
      int timeout_ms = 200;
      if (earliest != std::numeric_limits<Millis>::max()) {
        const Millis budget = earliest + cfg_.slack_ms - elapsed_since(t0);
        if (budget <= 0) {
          throw std::runtime_error(
              "client: symbol deadline exceeded by more than slack");
        }
        timeout_ms = static_cast<int>(std::min<Millis>(budget, 60000));
      }
      std::optional<Message> msg;
      try {
        msg = stream.read_frame(timeout_ms);
      } catch (const ReadTimeout&) {
        continue;  // deadline bookkeeping re-evaluated above
      }
      if (!msg) throw std::runtime_error("client: server closed connection");
      if (const ErrorMsg* err = std::get_if<ErrorMsg>(&*msg)) {
        throw std::runtime_error("client: server error: " + err->text);
      }
      const CodedMsg* coded = std::get_if<CodedMsg>(&*msg);
      if (coded == nullptr) {
        throw std::runtime_error("client: unexpected message type");
      }
      ++result.coded_received;
      Bytes ready;
      {
        std::lock_guard<std::mutex> lk(mu);
        ready = on_coded(*coded, cache, outstanding, buf);
      }
      cv.notify_all();
      if (!ready.empty()) {
        out.write(reinterpret_cast<const char*>(ready.data()),
                  static_cast<std::streamsize>(ready.size()));
      }
    }
  } catch (...) {
    {
      std::lock_guard<std::mutex> lk(mu);
      failed = true;
    }
    cv.notify_all();
    stream.shutdown();
    sender.join();
    throw;
  }

  sender.join();
  {
    std::lock_guard<std::mutex> lk(mu);
    if (!sender_error.empty()) {
      throw std::runtime_error("client: send failed: " + sender_error);
    }
  }
  out.flush();
  result.bytes_emitted = buf.emitted_bytes();
  result.requests_sent = plan.size();
  if (result.bytes_emitted != entry->file_length) {
    throw std::runtime_error("client: emitted byte count mismatch");
  }
  return result;
}

}  // namespace codedcache
