#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "codedcache/placement.hpp"
#include "codedcache/types.hpp"

namespace codedcache {

/// Raised on any malformed frame: truncation, trailing bytes, invalid
/// UTF-8, unknown tag, or an undecodable coded symbol.
class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The symbol header that travels on the wire is exactly the symbol
// identity: a video-id string (1..255 UTF-8 bytes) plus a 32-bit
// sequence number.
using SymbolHeader = SymbolId;

// Message bodies. All multi-byte integers are big-endian; text is a
// 16-bit length followed by UTF-8 bytes. Each message is framed as
//
//   payload_length : u32 (big-endian, bytes after the type tag)
//   type_tag       : u8
//   payload        : payload_length bytes
//
// The exact byte layouts are pinned by the golden files under
// tests/golden/.

struct HelloMsg {
  uint32_t cache_id = 0;
  uint64_t seed = 0;
  uint64_t p_bits = 0;  // binary64 bit pattern of the cache probability
  bool operator==(const HelloMsg&) const = default;
};

struct CatalogReqMsg {
  bool operator==(const CatalogReqMsg&) const = default;
};

struct CatalogRespMsg {
  std::vector<CatalogEntry> entries;
  bool operator==(const CatalogRespMsg& o) const {
    if (entries.size() != o.entries.size()) return false;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].video_id != o.entries[i].video_id ||
          entries[i].num_symbols != o.entries[i].num_symbols ||
          entries[i].file_length != o.entries[i].file_length) {
        return false;
      }
    }
    return true;
  }
};

struct RequestMsg {
  SymbolHeader header;
  uint32_t ttl_ms = 0;
  bool operator==(const RequestMsg&) const = default;
};

struct CodedMsg {
  std::vector<SymbolHeader> headers;
  Bytes payload;
  bool operator==(const CodedMsg&) const = default;
};

struct ErrorMsg {
  std::string text;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<HelloMsg, CatalogReqMsg, CatalogRespMsg,
                             RequestMsg, CodedMsg, ErrorMsg>;

/// Serializes tag + payload (everything after the length prefix).
Bytes encode_message(const Message& m);

/// Serializes the full frame including the length prefix.
Bytes encode_frame(const Message& m);

/// Parses tag + payload. Throws WireError on any malformation.
Message decode_message(std::span<const uint8_t> body);

/// Byte-wise XOR of equal-sized blocks. Throws on empty input or size
/// mismatch.
Bytes xor_combine(std::span<const Bytes> blocks);

/// Recovers the one symbol of a coded transmission this cache is missing.
/// Exactly one header must be absent from the cache; every other
/// constituent payload must be stored. Throws WireError when nothing is
/// missing or more than one constituent is (a decodability violation).
std::pair<SymbolId, Bytes> decode_coded(const CodedMsg& coded,
                                        const CacheContents& cache);

bool is_valid_utf8(std::span<const uint8_t> bytes);

}  // namespace codedcache
