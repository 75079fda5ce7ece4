#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "codedcache/client.hpp"

using namespace codedcache;

namespace {

const Catalog kCatalog({{"vid", 10, 10 * 16}});

CacheContents cache_holding(std::initializer_list<uint32_t> seqs) {
  // search for a seed whose placement holds exactly the wanted set
  for (uint64_t seed = 0; seed < 2000000; ++seed) {
    const CacheContents cc = build_cache(seed, kCatalog, 0.5);
    bool match = true;
    for (uint32_t s = 0; s < 10 && match; ++s) {
      const bool want =
          std::find(seqs.begin(), seqs.end(), s) != seqs.end();
      if (cc.holds({"vid", s}) != want) match = false;
    }
    if (match) return cc;
  }
  REQUIRE(false);
  return build_cache(0, kCatalog, 0.0);
}

}  // namespace

TEST_CASE("plan_requests covers exactly the missing symbols in order") {
  const CatalogEntry entry = *kCatalog.find("vid");

  SUBCASE("p=0: everything is requested") {
    const CacheContents none = build_cache(1, kCatalog, 0.0);
    const auto plan = plan_requests(entry, none, 10, 3);
    REQUIRE(plan.size() == 10);
    for (uint32_t i = 0; i < 10; ++i) {
      CHECK(plan[i].symbol == SymbolId{"vid", i});
    }
    // deadlines ramp over the window then hold at depth * ttl
    CHECK(plan[0].ttl_ms == 10);
    CHECK(plan[1].ttl_ms == 20);
    CHECK(plan[2].ttl_ms == 30);
    CHECK(plan[3].ttl_ms == 30);
    CHECK(plan[9].ttl_ms == 30);
  }

  SUBCASE("p=1: nothing is requested") {
    const CacheContents all = build_cache(1, kCatalog, 1.0);
    CHECK(plan_requests(entry, all, 10, 3).empty());
  }

  SUBCASE("held symbols are skipped") {
    const CacheContents cc = cache_holding({0, 3, 7});
    const auto plan = plan_requests(entry, cc, 5, 50);
    REQUIRE(plan.size() == 7);
    CHECK(plan[0].symbol.seq == 1);
    CHECK(plan[1].symbol.seq == 2);
    CHECK(plan[2].symbol.seq == 4);
    // first two missing symbols carry 1x and 2x the ttl unit
    CHECK(plan[0].ttl_ms == 5);
    CHECK(plan[1].ttl_ms == 10);
  }

  CHECK_THROWS_AS(plan_requests(*kCatalog.find("vid"),
                                build_cache(1, kCatalog, 0.0), 0, 3),
                  std::invalid_argument);
}

TEST_CASE("effective ttl derivation") {
  ClientConfig cfg;
  cfg.symbol_size = 10240;
  cfg.ttl_ms = 25;
  CHECK(cfg.effective_ttl() == 25);
  cfg.ttl_ms = 0;
  cfg.video_rate_bps = 700e3;  // 8*10240/700e3 s ~= 117 ms
  CHECK(cfg.effective_ttl() == 117);
  cfg.video_rate_bps = 0;
  CHECK(cfg.effective_ttl() == 10);
}

TEST_CASE("reorder buffer emits in order and trims the tail") {
  // 3 symbols of 16 bytes covering a 41-byte file: last symbol holds 9.
  ReorderBuffer buf(3, 41, 16);
  CHECK_FALSE(buf.complete());
  CHECK(buf.take_ready().empty());

  Bytes s0(16, 0xA0), s1(16, 0xB1), s2(16, 0xC2);
  buf.deliver(2, s2);
  CHECK(buf.take_ready().empty());  // gap at 0
  buf.deliver(0, s0);
  Bytes out = buf.take_ready();
  CHECK(out.size() == 16);  // 0 emitted, 1 still missing
  CHECK(out == s0);
  buf.deliver(1, s1);
  out = buf.take_ready();
  CHECK(out.size() == 16 + 9);  // 1 full, 2 trimmed to 41-32=9
  CHECK(buf.complete());
  CHECK(buf.emitted_bytes() == 41);

  CHECK_THROWS_AS(buf.deliver(0, s0), std::invalid_argument);   // replay
  CHECK_THROWS_AS(buf.deliver(5, s0), std::invalid_argument);   // range
  ReorderBuffer other(3, 41, 16);
  CHECK_THROWS_AS(other.deliver(0, Bytes(5, 1)), std::invalid_argument);
  CHECK_THROWS_AS(ReorderBuffer(2, 41, 16), std::invalid_argument);
}

TEST_CASE("on_coded decodes requested symbols and drains the buffer") {
  const CatalogEntry entry = *kCatalog.find("vid");
  const CacheContents cc = cache_holding({1, 2});
  const Bytes p0(16, 0x10), p1(16, 0x21), p3(16, 0x43);

  CacheContents cache = cc;
  cache.store_payload({"vid", 1}, p1);

  ReorderBuffer buf(entry.num_symbols, entry.file_length, 16);
  buf.deliver(1, p1);
  buf.deliver(2, Bytes(16, 0x32));

  OutstandingMap outstanding;
  outstanding.emplace(SymbolId{"vid", 0}, 100);
  outstanding.emplace(SymbolId{"vid", 3}, 200);

  SUBCASE("coded symbol for us: decode, buffer, drain contiguous run") {
    CodedMsg coded;
    coded.headers = {{"vid", 0}, {"vid", 1}};  // we hold 1, want 0
    const std::vector<Bytes> blocks = {p0, p1};
    coded.payload = xor_combine(blocks);
    const Bytes out = on_coded(coded, cache, outstanding, buf);
    CHECK(out.size() == 3 * 16);  // seqs 0,1,2 all drain
    CHECK(Bytes(out.begin(), out.begin() + 16) == p0);
    CHECK(outstanding.count({"vid", 0}) == 0);
    CHECK(outstanding.count({"vid", 3}) == 1);
  }

  SUBCASE("overheard: every constituent cached") {
    CodedMsg coded;
    coded.headers = {{"vid", 1}, {"vid", 2}};
    coded.payload = Bytes(16, 0x55);
    CHECK(on_coded(coded, cache, outstanding, buf).empty());
    CHECK(outstanding.size() == 2);
  }

  SUBCASE("overheard: single gap we never requested") {
    CodedMsg coded;
    coded.headers = {{"vid", 9}, {"vid", 1}};
    coded.payload = Bytes(16, 0x66);
    CHECK(on_coded(coded, cache, outstanding, buf).empty());
  }

  SUBCASE("overheard: multiple gaps, none requested") {
    CodedMsg coded;
    coded.headers = {{"vid", 8}, {"vid", 9}};
    coded.payload = Bytes(16, 0x77);
    CHECK(on_coded(coded, cache, outstanding, buf).empty());
  }

  SUBCASE("protocol violation: addressed to us but undecodable") {
    CodedMsg coded;
    coded.headers = {{"vid", 0}, {"vid", 9}};  // both missing, 0 requested
    coded.payload = Bytes(16, 0x88);
    CHECK_THROWS_AS(on_coded(coded, cache, outstanding, buf), WireError);
  }

  SUBCASE("out-of-order decode fills later, drains once contiguous") {
    CodedMsg coded;
    coded.headers = {{"vid", 3}, {"vid", 2}};
    Bytes p2(16, 0x32);
    const std::vector<Bytes> blocks = {p3, p2};
    coded.payload = xor_combine(blocks);
    CacheContents c2 = cc;
    c2.store_payload({"vid", 2}, p2);
    const Bytes out = on_coded(coded, c2, outstanding, buf);
    CHECK(out.empty());  // 0 still missing
    CHECK(buf.has(3));
  }
}
