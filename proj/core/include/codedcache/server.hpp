#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "codedcache/content_store.hpp"
#include "codedcache/merge_queue.hpp"
#include "codedcache/net.hpp"
#include "codedcache/placement.hpp"
#include "codedcache/types.hpp"
#include "codedcache/wire.hpp"

namespace codedcache {

/// Bounded FIFO handoff between the request-handler threads and the
/// encoder: producers block when full, the consumer blocks when empty.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(T item) {
    std::unique_lock<std::mutex> lk(mu_);
    cv_push_.wait(lk, [this] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    cv_pop_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_pop_.wait(lk, [this] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    cv_push_.notify_one();
    return item;
  }

  bool empty() const {
    std::lock_guard<std::mutex> lk(mu_);
    return items_.empty();
  }

  void close() {
    std::lock_guard<std::mutex> lk(mu_);
    closed_ = true;
    cv_push_.notify_all();
    cv_pop_.notify_all();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_push_, cv_pop_;
  std::deque<T> items_;
  std::size_t capacity_;
  bool closed_ = false;
};

struct ServerConfig {
  uint16_t port = 0;  // 0 picks an ephemeral port
  std::filesystem::path db_dir;
  SystemConfig system;
  unsigned tau = 0;
  Millis guard_ms = 20;
  bool eager = false;  // flush the queue when no request is in flight
  bool log_transmissions = false;
  std::size_t intake_capacity = 1024;
};

struct TransmissionRecord {
  Millis timestamp = 0;
  Millis deadline = 0;
  uint32_t num_parts = 0;
  uint32_t targets_reached = 0;
};

/// Origin availability: the set of caches other than the origin whose
/// replayed placement holds the symbol.
CacheSet availability_from_sessions(
    int num_caches, int origin, const SymbolId& symbol,
    const std::vector<std::pair<uint32_t, const CacheContents*>>& held);

/// The origin-server process: per-client request intake, one encoder
/// thread applying the tau-fit rule to the coded symbol queue, and one
/// transmitter thread multicasting due entries to their targets over
/// parallel unicast connections.
class OriginServer {
 public:
  explicit OriginServer(ServerConfig cfg);
  ~OriginServer();

  OriginServer(const OriginServer&) = delete;
  OriginServer& operator=(const OriginServer&) = delete;

  void start();
  void stop();

  uint16_t port() const { return port_; }
  const Catalog& catalog() const { return store_.catalog(); }

  /// Parts-per-transmission trace, in transmission order.
  std::vector<TransmissionRecord> transmissions() const;
  /// Raw requests served / coded transmissions sent, NaN before the
  /// first transmission.
  double cumulative_gain() const;
  /// EWMA-smoothed parts-per-transmission series.
  std::vector<double> smoothed_gain(int window) const;
  uint64_t decodability_violations() const { return decode_violations_; }
  uint64_t coded_payload_bytes() const { return coded_payload_bytes_; }
  uint64_t uncoded_payload_bytes() const { return uncoded_payload_bytes_; }

  /// Writes one CSV row per transmission (see README for columns).
  void write_gain_csv(const std::filesystem::path& path, int window = 40) const;

 private:
  struct Session {
    uint32_t cache_id = 0;
    TcpStream stream;
    std::mutex write_mu;
    CacheContents held;
    std::atomic<bool> alive{true};
  };

  void accept_loop();
  void session_loop(TcpStream stream);
  void encoder_loop();
  void transmitter_loop();
  void transmit(const MergedRequest& entry, Millis now_ms);
  void send_error(TcpStream& stream, std::mutex* write_mu, const std::string& text);

  Millis now() const;

  ServerConfig cfg_;
  ContentStore store_;
  EngineConfig engine_;
  uint64_t p_bits_ = 0;

  std::optional<TcpListener> listener_;
  uint16_t port_ = 0;
  std::chrono::steady_clock::time_point epoch_;

  std::atomic<bool> running_{false};
  std::thread accept_thread_, encoder_thread_, transmitter_thread_;
  std::mutex session_threads_mu_;
  std::vector<std::thread> session_threads_;

  mutable std::mutex sessions_mu_;
  std::map<uint32_t, std::shared_ptr<Session>> sessions_;
  std::vector<std::weak_ptr<Session>> all_conns_;  // includes pre-HELLO ones

  BoundedQueue<RawRequest> intake_;
  std::atomic<bool> encoder_busy_{false};

  mutable std::mutex coded_mu_;
  std::condition_variable coded_cv_;
  MergeQueue coded_;

  mutable std::mutex trace_mu_;
  std::vector<TransmissionRecord> trace_;
  std::atomic<uint64_t> served_total_{0};
  std::atomic<uint64_t> transmissions_total_{0};
  std::atomic<uint64_t> decode_violations_{0};
  std::atomic<uint64_t> coded_payload_bytes_{0};
  std::atomic<uint64_t> uncoded_payload_bytes_{0};
};

}  // namespace codedcache
