#include "codedcache/wire.hpp"

namespace codedcache {
namespace {

constexpr uint8_t kTagHello = 0x01;
constexpr uint8_t kTagCatalogReq = 0x02;
constexpr uint8_t kTagCatalogResp = 0x03;
constexpr uint8_t kTagRequest = 0x04;
constexpr uint8_t kTagCoded = 0x05;
constexpr uint8_t kTagError = 0x06;

void put_u16(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_u32(Bytes& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void put_u64(Bytes& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void put_text(Bytes& out, const std::string& s, std::size_t max_len) {
  if (s.size() > max_len) {
    throw WireError("encode: text longer than " + std::to_string(max_len) +
                    " bytes");
  }
  put_u16(out, static_cast<uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void put_video_id(Bytes& out, const std::string& s) {
  if (s.empty()) throw WireError("encode: empty video_id");
  put_text(out, s, 255);
}

void put_header(Bytes& out, const SymbolHeader& h) {
  put_video_id(out, h.video_id);
  put_u32(out, h.seq);
}

class Cursor {
 public:
  explicit Cursor(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    auto b = take(2);
    return static_cast<uint16_t>(b[0] << 8 | b[1]);
  }
  uint32_t u32() {
    auto b = take(4);
    return static_cast<uint32_t>(b[0]) << 24 | static_cast<uint32_t>(b[1]) << 16 |
           static_cast<uint32_t>(b[2]) << 8 | static_cast<uint32_t>(b[3]);
  }
  uint64_t u64() {
    uint64_t hi = u32();
    return hi << 32 | u32();
  }
  std::string text(std::size_t max_len) {
    const uint16_t len = u16();
    if (len > max_len) {
      throw WireError("decode: text longer than " + std::to_string(max_len) +
                      " bytes");
    }
    auto b = take(len);
    if (!is_valid_utf8(b)) throw WireError("decode: invalid UTF-8 in text");
    return std::string(b.begin(), b.end());
  }
  std::string video_id() {
    std::string s = text(255);
    if (s.empty()) throw WireError("decode: empty video_id");
    return s;
  }
  SymbolHeader header() {
    SymbolHeader h;
    h.video_id = video_id();
    h.seq = u32();
    return h;
  }
  Bytes rest() {
    Bytes out(data_.begin() + pos_, data_.end());
    pos_ = data_.size();
    return out;
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_done() const {
    if (pos_ != data_.size()) {
      throw WireError("decode: length mismatch, " +
                      std::to_string(data_.size() - pos_) +
                      " trailing bytes");
    }
  }

 private:
  std::span<const uint8_t> take(std::size_t n) {
    if (pos_ + n > data_.size()) throw WireError("decode: truncated frame");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::span<const uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_valid_utf8(std::span<const uint8_t> bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const uint8_t b = bytes[i];
    std::size_t len;
    uint32_t cp;
    if (b < 0x80) {
      i += 1;
      continue;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
      cp = b & 0x07;
    } else {
      return false;
    }
    if (i + len > bytes.size()) return false;
    for (std::size_t j = 1; j < len; ++j) {
      if ((bytes[i + j] & 0xC0) != 0x80) return false;
      cp = cp << 6 | (bytes[i + j] & 0x3F);
    }
    // Overlong encodings, surrogates, and out-of-range code points.
    if (len == 2 && cp < 0x80) return false;
    if (len == 3 && cp < 0x800) return false;
    if (len == 4 && cp < 0x10000) return false;
    if (cp >= 0xD800 && cp <= 0xDFFF) return false;
    if (cp > 0x10FFFF) return false;
    i += len;
  }
  return true;
}

Bytes encode_message(const Message& m) {
  Bytes out;
  std::visit(
      [&out](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, HelloMsg>) {
          out.push_back(kTagHello);
          put_u32(out, msg.cache_id);
          put_u64(out, msg.seed);
          put_u64(out, msg.p_bits);
        } else if constexpr (std::is_same_v<T, CatalogReqMsg>) {
          out.push_back(kTagCatalogReq);
        } else if constexpr (std::is_same_v<T, CatalogRespMsg>) {
          out.push_back(kTagCatalogResp);
          if (msg.entries.size() > 0xFFFF) {
            throw WireError("encode: too many catalog entries");
          }
          put_u16(out, static_cast<uint16_t>(msg.entries.size()));
          for (const CatalogEntry& e : msg.entries) {
            put_video_id(out, e.video_id);
            put_u32(out, e.num_symbols);
            put_u64(out, e.file_length);
          }
        } else if constexpr (std::is_same_v<T, RequestMsg>) {
          out.push_back(kTagRequest);
          put_header(out, msg.header);
          put_u32(out, msg.ttl_ms);
        } else if constexpr (std::is_same_v<T, CodedMsg>) {
          out.push_back(kTagCoded);
          if (msg.headers.empty() || msg.headers.size() > 0xFFFF) {
            throw WireError("encode: coded symbol needs 1..65535 headers");
          }
          if (msg.payload.empty()) {
            throw WireError("encode: coded symbol needs a payload");
          }
          put_u16(out, static_cast<uint16_t>(msg.headers.size()));
          for (const SymbolHeader& h : msg.headers) put_header(out, h);
          out.insert(out.end(), msg.payload.begin(), msg.payload.end());
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          out.push_back(kTagError);
          put_text(out, msg.text, 0xFFFF);
        }
      },
      m);
  return out;
}

Bytes encode_frame(const Message& m) {
  Bytes body = encode_message(m);
  Bytes out;
  out.reserve(body.size() + 4);
  put_u32(out, static_cast<uint32_t>(body.size() - 1));  // payload excludes tag
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Message decode_message(std::span<const uint8_t> body) {
  if (body.empty()) throw WireError("decode: empty frame");
  Cursor cur(body);
  const uint8_t tag = cur.u8();
  switch (tag) {
    case kTagHello: {
      HelloMsg m;
      m.cache_id = cur.u32();
      m.seed = cur.u64();
      m.p_bits = cur.u64();
      cur.expect_done();
      return m;
    }
    case kTagCatalogReq: {
      cur.expect_done();
      return CatalogReqMsg{};
    }
    case kTagCatalogResp: {
      CatalogRespMsg m;
      const uint16_t count = cur.u16();
      m.entries.reserve(count);
      for (uint16_t i = 0; i < count; ++i) {
        CatalogEntry e;
        e.video_id = cur.video_id();
        e.num_symbols = cur.u32();
        e.file_length = cur.u64();
        m.entries.push_back(std::move(e));
      }
      cur.expect_done();
      return m;
    }
    case kTagRequest: {
      RequestMsg m;
      m.header = cur.header();
      m.ttl_ms = cur.u32();
      cur.expect_done();
      return m;
    }
    case kTagCoded: {
      CodedMsg m;
      const uint16_t count = cur.u16();
      if (count == 0) throw WireError("decode: coded symbol with zero headers");
      m.headers.reserve(count);
      for (uint16_t i = 0; i < count; ++i) m.headers.push_back(cur.header());
      if (cur.remaining() == 0) {
        throw WireError("decode: coded symbol without payload");
      }
      m.payload = cur.rest();
      return m;
    }
    case kTagError: {
      ErrorMsg m;
      m.text = cur.text(0xFFFF);
      cur.expect_done();
      return m;
    }
    default:
      throw WireError("decode: unknown type tag " + std::to_string(tag));
  }
}

Bytes xor_combine(std::span<const Bytes> blocks) {
  if (blocks.empty()) throw WireError("xor_combine: no blocks");
  Bytes out = blocks[0];
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (blocks[i].size() != out.size()) {
      throw WireError("xor_combine: block size mismatch");
    }
    for (std::size_t j = 0; j < out.size(); ++j) out[j] ^= blocks[i][j];
  }
  return out;
}

std::pair<SymbolId, Bytes> decode_coded(const CodedMsg& coded,
                                        const CacheContents& cache) {
  const SymbolHeader* missing = nullptr;
  int missing_count = 0;
  for (const SymbolHeader& h : coded.headers) {
    if (!cache.holds(h)) {
      missing = &h;
      ++missing_count;
    }
  }
  if (missing_count == 0) {
    throw WireError("decode_coded: every constituent is cached, nothing to decode");
  }
  if (missing_count > 1) {
    throw WireError("decode_coded: " + std::to_string(missing_count) +
                    " constituents missing, undecodable");
  }
  Bytes out = coded.payload;
  for (const SymbolHeader& h : coded.headers) {
    if (&h == missing) continue;
    const Bytes* stored = cache.payload(h);
    if (stored == nullptr) {
      throw WireError("decode_coded: cached payload for " + h.to_string() +
                      " not stored");
    }
    if (stored->size() != out.size()) {
      throw WireError("decode_coded: payload size mismatch for " + h.to_string());
    }
    for (std::size_t j = 0; j < out.size(); ++j) out[j] ^= (*stored)[j];
  }
  return {*missing, std::move(out)};
}

}  // namespace codedcache
