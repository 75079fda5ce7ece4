#include "codedcache/server.hpp"

#include <bit>
#include <fstream>
#include <iostream>
#include <limits>

#include "codedcache/simulator.hpp"

namespace codedcache {

CacheSet availability_from_sessions(
    int num_caches, int origin, const SymbolId& symbol,
    const std::vector<std::pair<uint32_t, const CacheContents*>>& held) {
  CacheSet s(num_caches);
  for (const auto& [cache_id, contents] : held) {
    if (static_cast<int>(cache_id) == origin) continue;
    if (contents->holds(symbol)) s.insert(static_cast<int>(cache_id));
  }
  return s;
}

OriginServer::OriginServer(ServerConfig cfg)
    : cfg_(std::move(cfg)),
      store_(cfg_.db_dir, cfg_.system.symbol_size),
      engine_(EngineConfig::with_tau(cfg_.system.num_caches, cfg_.tau)),
      intake_(cfg_.intake_capacity) {
  cfg_.system.validate();
  if (cfg_.guard_ms < 0) {
    throw std::invalid_argument("ServerConfig: guard_ms must be >= 0");
  }
  p_bits_ = std::bit_cast<uint64_t>(cfg_.system.cache_prob);
}

OriginServer::~OriginServer() { stop(); }

Millis OriginServer::now() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - epoch_)
      .count();
}

void OriginServer::start() {
  if (running_.exchange(true)) return;
  epoch_ = std::chrono::steady_clock::now();
  listener_.emplace(cfg_.port);
  port_ = listener_->port();
  accept_thread_ = std::thread([this] { accept_loop(); });
  encoder_thread_ = std::thread([this] { encoder_loop(); });
  transmitter_thread_ = std::thread([this] { transmitter_loop(); });
}

void OriginServer::stop() {
  if (!running_.exchange(false)) return;
  if (listener_) listener_->close();
  intake_.close();
  {
    std::lock_guard<std::mutex> lk(coded_mu_);
    coded_cv_.notify_all();
  }
  {
    std::lock_guard<std::mutex> lk(sessions_mu_);
    for (auto& weak : all_conns_) {
      if (auto session = weak.lock()) session->stream.shutdown();
    }
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  if (encoder_thread_.joinable()) encoder_thread_.join();
  if (transmitter_thread_.joinable()) transmitter_thread_.join();
  std::vector<std::thread> session_threads;
  {
    std::lock_guard<std::mutex> lk(session_threads_mu_);
    session_threads.swap(session_threads_);
  }
  for (std::thread& t : session_threads) {
    if (t.joinable()) t.join();
  }
}

void OriginServer::accept_loop() {
  while (running_) {
    auto stream = listener_->accept();
    if (!stream) break;
    std::lock_guard<std::mutex> lk(session_threads_mu_);
    session_threads_.emplace_back(
        [this, s = std::move(*stream)]() mutable { session_loop(std::move(s)); });
  }
}

void OriginServer::send_error(TcpStream& stream, std::mutex* write_mu,
                              const std::string& text) {
  try {
    if (write_mu != nullptr) {
      std::lock_guard<std::mutex> lk(*write_mu);
      stream.write_frame(ErrorMsg{text});
    } else {
      stream.write_frame(ErrorMsg{text});
    }
  } catch (const std::exception&) {
    // peer already gone; nothing to report to
  }
}

void OriginServer::session_loop(TcpStream stream) {
  auto session = std::make_shared<Session>();
  session->stream = std::move(stream);
  {
    std::lock_guard<std::mutex> lk(sessions_mu_);
    all_conns_.emplace_back(session);
  }
  if (!running_) return;  // stop() may have swept before we registered

  bool registered = false;
  try {
    auto first = session->stream.read_frame();
    if (!first) return;
    const HelloMsg* hello = std::get_if<HelloMsg>(&*first);
    if (hello == nullptr) {
      send_error(session->stream, nullptr, "expected HELLO as the first message");
      return;
    }
    if (hello->cache_id < 1 ||
        hello->cache_id > static_cast<uint32_t>(cfg_.system.num_caches)) {
      send_error(session->stream, nullptr,
                 "cache_id " + std::to_string(hello->cache_id) +
                     " outside 1.." + std::to_string(cfg_.system.num_caches));
      return;
    }
    if (hello->p_bits != p_bits_) {
      send_error(session->stream, nullptr,
                 "cache_prob mismatch between client and server");
      return;
    }

    session->cache_id = hello->cache_id;
    session->held =
        build_cache(hello->seed, store_.catalog(), cfg_.system.cache_prob);
    {
      std::lock_guard<std::mutex> lk(sessions_mu_);
      if (sessions_.count(hello->cache_id) != 0) {
        send_error(session->stream, nullptr,
                   "duplicate cache_id " + std::to_string(hello->cache_id));
        return;
      }
      sessions_[hello->cache_id] = session;
      registered = true;
    }

    while (running_) {
      auto msg = session->stream.read_frame();
      if (!msg) break;
      if (std::holds_alternative<CatalogReqMsg>(*msg)) {
        CatalogRespMsg resp{store_.catalog().entries()};
        std::lock_guard<std::mutex> lk(session->write_mu);
        session->stream.write_frame(resp);
      } else if (const RequestMsg* req = std::get_if<RequestMsg>(&*msg)) {
        const CatalogEntry* entry = store_.catalog().find(req->header.video_id);
        if (entry == nullptr || req->header.seq >= entry->num_symbols) {
          send_error(session->stream, &session->write_mu,
                     "unknown symbol " + req->header.to_string());
          continue;
        }
        RawRequest raw;
        raw.origin = static_cast<int>(session->cache_id);
        {
          std::lock_guard<std::mutex> lk(sessions_mu_);
          std::vector<std::pair<uint32_t, const CacheContents*>> held;
          held.reserve(sessions_.size());
          for (const auto& [id, other] : sessions_) {
            held.emplace_back(id, &other->held);
          }
          raw.availability = availability_from_sessions(
              cfg_.system.num_caches, raw.origin, req->header, held);
        }
        raw.deadline = now() + req->ttl_ms;
        raw.symbol = req->header;
        if (!intake_.push(std::move(raw))) break;
      } else {
        send_error(session->stream, &session->write_mu,
                   "unexpected message type");
        break;
      }
    }
  } catch (const std::exception& e) {
    if (running_) {
      std::cerr << "[server] session error: " << e.what() << "\n";
    }
  }
  session->alive = false;
  if (registered) {
    std::lock_guard<std::mutex> lk(sessions_mu_);
    auto it = sessions_.find(session->cache_id);
    if (it != sessions_.end() && it->second == session) sessions_.erase(it);
  }
}

void OriginServer::encoder_loop() {
  while (true) {
    auto raw = intake_.pop();
    if (!raw) break;
    encoder_busy_ = true;
    {
      std::lock_guard<std::mutex> lk(coded_mu_);
      coded_.insert(*raw, engine_);
    }
    encoder_busy_ = false;
    coded_cv_.notify_all();
  }
  encoder_busy_ = false;
  coded_cv_.notify_all();
}

void OriginServer::transmitter_loop() {
  std::unique_lock<std::mutex> lk(coded_mu_);
  while (running_) {
    if (coded_.empty()) {
      coded_cv_.wait(lk, [this] { return !running_ || !coded_.empty(); });
      continue;
    }
    const Millis next_deadline = *coded_.earliest_deadline();
    const Millis now_ms = now();
    const bool eager_fire =
        cfg_.eager && intake_.empty() && !encoder_busy_.load();
    if (now_ms + cfg_.guard_ms < next_deadline && !eager_fire) {
      coded_cv_.wait_until(
          lk, epoch_ + std::chrono::milliseconds(next_deadline - cfg_.guard_ms));
      continue;
    }
    std::vector<MergedRequest> due =
        eager_fire ? coded_.pop_due(std::numeric_limits<Millis>::max() / 2, 0)
                   : coded_.pop_due(now_ms, cfg_.guard_ms);
    lk.unlock();
    for (const MergedRequest& entry : due) transmit(entry, now());
    lk.lock();
  }
}

void OriginServer::transmit(const MergedRequest& entry, Millis now_ms) {
  std::vector<Bytes> payloads;
  payloads.reserve(entry.parts().size());
  for (const RequestPart& part : entry.parts()) {
    payloads.push_back(store_.symbol_payload(part.symbol));
  }
  CodedMsg coded;
  for (const RequestPart& part : entry.parts()) {
    coded.headers.push_back(part.symbol);
  }
  coded.payload = xor_combine(payloads);
  const Bytes frame = encode_frame(coded);

  uint32_t reached = 0;
  for (const RequestPart& part : entry.parts()) {
    std::shared_ptr<Session> target;
    {
      std::lock_guard<std::mutex> lk(sessions_mu_);
      auto it = sessions_.find(static_cast<uint32_t>(part.target));
      if (it != sessions_.end()) target = it->second;
    }
    if (!target || !target->alive) {
      std::cerr << "[server] dropping part for disconnected cache "
                << part.target << "\n";
      continue;
    }
    // Decodability check: the target must miss exactly its own symbol.
    int missing = 0;
    bool own_missing = false;
    for (const SymbolHeader& h : coded.headers) {
      if (!target->held.holds(h)) {
        ++missing;
        if (h == part.symbol) own_missing = true;
      }
    }
    if (missing != 1 || !own_missing) {
      ++decode_violations_;
      std::cerr << "[server] decodability violation for cache " << part.target
                << " on " << part.symbol.to_string() << "\n";
      continue;
    }
    try {
      std::lock_guard<std::mutex> lk(target->write_mu);
      target->stream.write_all(frame.data(), frame.size());
      ++reached;
    } catch (const std::exception&) {
      target->alive = false;
    }
  }
  if (reached == 0) return;

  const uint32_t parts = static_cast<uint32_t>(entry.parts().size());
  served_total_ += parts;
  transmissions_total_ += 1;
  coded_payload_bytes_ += coded.payload.size();
  uncoded_payload_bytes_ += static_cast<uint64_t>(parts) * coded.payload.size();
  {
    std::lock_guard<std::mutex> lk(trace_mu_);
    trace_.push_back(
        TransmissionRecord{now_ms, entry.deadline(), parts, reached});
  }
  if (cfg_.log_transmissions) {
    std::string line = "[server] tx t=" + std::to_string(now_ms) +
                       "ms m=" + std::to_string(parts) + " headers=";
    for (std::size_t i = 0; i < coded.headers.size(); ++i) {
      if (i > 0) line += ",";
      line += coded.headers[i].to_string();
    }
    std::cout << line << "\n";
  }
}

std::vector<TransmissionRecord> OriginServer::transmissions() const {
  std::lock_guard<std::mutex> lk(trace_mu_);
  return trace_;
}

double OriginServer::cumulative_gain() const {
  const uint64_t tx = transmissions_total_.load();
  if (tx == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(served_total_.load()) / static_cast<double>(tx);
}

std::vector<double> OriginServer::smoothed_gain(int window) const {
  std::vector<double> parts;
  {
    std::lock_guard<std::mutex> lk(trace_mu_);
    parts.reserve(trace_.size());
    for (const TransmissionRecord& r : trace_) {
      parts.push_back(static_cast<double>(r.num_parts));
    }
  }
  return ewma_smooth(parts, window);
}

void OriginServer::write_gain_csv(const std::filesystem::path& path,
                                  int window) const {
  const std::vector<TransmissionRecord> trace = transmissions();
  if (trace.empty()) {
    std::cerr << "[server] no transmissions, skipping gain csv\n";
    return;
  }
  std::vector<double> parts_series;
  parts_series.reserve(trace.size());
  for (const TransmissionRecord& r : trace) {
    parts_series.push_back(static_cast<double>(r.num_parts));
  }
  const std::vector<double> smoothed = ewma_smooth(parts_series, window);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "index,t_ms,parts,cumulative_gain,smoothed_gain\n";
  uint64_t served = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    served += trace[i].num_parts;
    out << i << "," << trace[i].timestamp << "," << trace[i].num_parts << ","
        << static_cast<double>(served) / static_cast<double>(i + 1) << ","
        << smoothed[i] << "\n";
  }
}

}  // namespace codedcache
