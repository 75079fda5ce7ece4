#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "codedcache/types.hpp"
#include "codedcache/wire.hpp"

namespace codedcache {

/// Raised by TcpStream::read_frame when the timeout elapses before a
/// full frame arrives.
class ReadTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thin RAII wrapper over a connected TCP socket. Reads and writes whole
/// wire-protocol frames; both directions may be used from different
/// threads (one reader, one writer).
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream() { close(); }

  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  static TcpStream connect(const std::string& host, uint16_t port);

  bool valid() const { return fd_ >= 0; }

  void write_all(const uint8_t* data, std::size_t len);
  void write_frame(const Message& m);

  /// Blocks until a full frame arrives. Returns nullopt on clean EOF at a
  /// frame boundary; throws on mid-frame EOF, I/O errors, or timeout
  /// (timeout_ms >= 0).
  std::optional<Message> read_frame(int timeout_ms = -1);

  /// Shuts down both directions, unblocking any reader.
  void shutdown();
  void close();

 private:
  bool read_exact(uint8_t* data, std::size_t len, int timeout_ms, bool* eof_at_start);
  int fd_ = -1;
};

class TcpListener {
 public:
  /// Binds and listens on 127.0.0.1:port; port 0 picks an ephemeral port.
  explicit TcpListener(uint16_t port);
  ~TcpListener() { close(); }

  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }

  /// Returns nullopt once the listener has been closed.
  std::optional<TcpStream> accept();

  void close();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

}  // namespace codedcache
