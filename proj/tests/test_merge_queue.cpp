#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "codedcache/merge_queue.hpp"
#include "codedcache/placement.hpp"

using namespace codedcache;

namespace {

RawRequest raw(int K, int origin, std::initializer_list<int> avail,
               Millis deadline, uint32_t seq = 0) {
  return RawRequest{origin, CacheSet::of(K, avail), deadline,
                    SymbolId{"v", seq}};
}

}  // namespace

TEST_CASE("engine config resolves the rule family") {
  CHECK(EngineConfig::first_fit(10).tau == 8);
  CHECK(EngineConfig::perfect_fit(10).tau == 0);
  CHECK(EngineConfig::with_tau(4, 2).tau == 2);
  CHECK_THROWS_AS(EngineConfig::with_tau(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(EngineConfig::with_tau(1, 0), std::invalid_argument);
  CHECK(EngineConfig::with_tau(2, 0).tau == 0);  // K=2: only tau=0 exists
}

TEST_CASE("first-fit trace of the five-request coding example") {
  // (1;2,3), (2;1,3), (3;1,2), (2;1), (1;2) under first-fit collapses to
  // two entries serving five requests.
  const EngineConfig cfg = EngineConfig::first_fit(3);
  MergeQueue q;
  q.insert(raw(3, 1, {2, 3}, 1, 0), cfg);
  q.insert(raw(3, 2, {1, 3}, 2, 1), cfg);
  q.insert(raw(3, 3, {1, 2}, 3, 2), cfg);
  q.insert(raw(3, 2, {1}, 4, 3), cfg);
  q.insert(raw(3, 1, {2}, 5, 4), cfg);

  CHECK(q.entry_count() == 2);
  CHECK(q.raw_count() == 5);

  const auto view = q.snapshot();
  REQUIRE(view.size() == 2);
  CHECK(view[0]->targets() == CacheSet::of(3, {1, 2, 3}));
  CHECK(view[0]->availability().empty());
  CHECK(view[0]->parts().size() == 3);
  CHECK(view[1]->targets() == CacheSet::of(3, {1, 2}));
  CHECK(view[1]->availability().empty());
  CHECK(view[1]->parts().size() == 2);
}

TEST_CASE("perfect fit skips a worse earlier entry") {
  // queue [(2;1), (2;1,3)], new (1;2,3): misfits are 1 then 0; tau=0
  // merges with the second entry.
  const EngineConfig cfg = EngineConfig::perfect_fit(3);
  MergeQueue q;
  q.insert(raw(3, 2, {1}, 1, 0), cfg);
  q.insert(raw(3, 2, {1, 3}, 2, 1), cfg);
  REQUIRE(q.entry_count() == 2);

  const InsertOutcome out = q.insert(raw(3, 1, {2, 3}, 3, 2), cfg);
  CHECK(out.merged);
  CHECK(out.merged_index == 1);
  CHECK(out.queue_entries == 2);
  const auto view = q.snapshot();
  CHECK(view[0]->parts().size() == 1);
  CHECK(view[1]->parts().size() == 2);
  CHECK(view[1]->targets() == CacheSet::of(3, {1, 2}));
}

TEST_CASE("first fit takes the first finite misfit") {
  // queue [(2;1)], new (1;2,3): misfit 1 <= tau merges into ({1,2};{})
  const EngineConfig cfg = EngineConfig::first_fit(3);
  MergeQueue q;
  q.insert(raw(3, 2, {1}, 5, 0), cfg);
  const InsertOutcome out = q.insert(raw(3, 1, {2, 3}, 9, 1), cfg);
  CHECK(out.merged);
  CHECK(out.merged_index == 0);
  const auto view = q.snapshot();
  CHECK(view[0]->targets() == CacheSet::of(3, {1, 2}));
  CHECK(view[0]->availability().empty());
  CHECK(view[0]->deadline() == 5);
}

TEST_CASE("append keeps deadline order with insertion-order ties") {
  const EngineConfig cfg = EngineConfig::perfect_fit(4);
  MergeQueue q;
  q.insert(raw(4, 1, {}, 50, 0), cfg);
  q.insert(raw(4, 2, {}, 10, 1), cfg);
  q.insert(raw(4, 3, {}, 50, 2), cfg);
  q.insert(raw(4, 4, {}, 30, 3), cfg);
  const auto view = q.snapshot();
  REQUIRE(view.size() == 4);
  CHECK(view[0]->deadline() == 10);
  CHECK(view[1]->deadline() == 30);
  CHECK(view[2]->deadline() == 50);
  CHECK(view[3]->deadline() == 50);
  CHECK(view[2]->targets() == CacheSet::of(4, {1}));  // earlier insertion first
  CHECK(view[3]->targets() == CacheSet::of(4, {3}));
}

TEST_CASE("merge repositions an entry whose deadline tightened") {
  const EngineConfig cfg = EngineConfig::first_fit(3);
  MergeQueue q;
  q.insert(raw(3, 2, {}, 10, 0), cfg);       // not mergeable with anything
  q.insert(raw(3, 3, {1, 2}, 20, 1), cfg);   // second in line
  // (1;2,3;t=5) merges with the t=20 entry and drags it to the front.
  const InsertOutcome out = q.insert(raw(3, 1, {2, 3}, 5, 2), cfg);
  CHECK(out.merged);
  CHECK(out.merged_index == 1);
  const auto view = q.snapshot();
  REQUIRE(view.size() == 2);
  CHECK(view[0]->deadline() == 5);
  CHECK(view[0]->targets() == CacheSet::of(3, {1, 3}));
  CHECK(view[1]->deadline() == 10);
}

TEST_CASE("pop_due returns entries within the guard window") {
  const EngineConfig cfg = EngineConfig::perfect_fit(4);
  MergeQueue q;
  q.insert(raw(4, 1, {}, 10, 0), cfg);
  q.insert(raw(4, 2, {}, 50, 1), cfg);
  q.insert(raw(4, 3, {}, 90, 2), cfg);

  auto due = q.pop_due(35, 20);
  REQUIRE(due.size() == 2);
  CHECK(due[0].deadline() == 10);
  CHECK(due[1].deadline() == 50);
  CHECK(q.entry_count() == 1);
  CHECK(q.raw_count() == 1);

  MergeQueue empty_q;
  CHECK(empty_q.pop_due(1000, 1000).empty());

  MergeQueue far_q;
  far_q.insert(raw(4, 1, {}, 100, 0), cfg);
  CHECK(far_q.pop_due(0, 20).empty());
}

TEST_CASE("pop_head removes the earliest deadline") {
  const EngineConfig cfg = EngineConfig::first_fit(3);
  MergeQueue q;
  q.insert(raw(3, 1, {2}, 7, 0), cfg);
  q.insert(raw(3, 1, {2}, 3, 1), cfg);
  const MergedRequest head = q.pop_head();
  CHECK(head.deadline() == 3);
  CHECK(q.entry_count() == 1);
  q.pop_head();
  CHECK(q.empty());
  CHECK_THROWS_AS(q.pop_head(), std::out_of_range);
}

TEST_CASE("stats reflect entries and raw constituents") {
  const EngineConfig cfg = EngineConfig::first_fit(3);
  MergeQueue q;
  CHECK(q.entry_count() == 0);
  CHECK(q.raw_count() == 0);
  q.insert(raw(3, 1, {2, 3}, 1, 0), cfg);
  CHECK(q.entry_count() == 1);
  CHECK(q.raw_count() == 1);
  q.insert(raw(3, 2, {1, 3}, 2, 1), cfg);
  q.insert(raw(3, 3, {1, 2}, 3, 2), cfg);
  q.insert(raw(3, 2, {1}, 4, 3), cfg);
  q.insert(raw(3, 1, {2}, 5, 4), cfg);
  CHECK(q.entry_count() == 2);
  CHECK(q.raw_count() == 5);
}

TEST_CASE("randomized invariants: order, conservation, first-match replay") {
  SplitMix64 rng{2024};
  for (int round = 0; round < 60; ++round) {
    const int K = 3 + static_cast<int>(rng.next() % 8);
    const unsigned tau = static_cast<unsigned>(rng.next() % (K - 1));
    const EngineConfig cfg{K, tau};
    MergeQueue q;
    uint64_t inserted = 0, popped = 0;

    for (int step = 0; step < 400; ++step) {
      const bool do_pop = !q.empty() && rng.next() % 4 == 0;
      if (do_pop) {
        const std::size_t before = q.raw_count();
        const MergedRequest head = q.pop_head();
        popped += head.parts().size();
        CHECK(q.raw_count() == before - head.parts().size());
        CHECK(head.parts().size() <= static_cast<std::size_t>(K));  // gain bound
        CHECK(head.check_invariants());
        continue;
      }
      const int k = 1 + static_cast<int>(rng.next() % K);
      CacheSet avail(K);
      for (int j = 1; j <= K; ++j) {
        if (j != k && rng.next() % 2 == 0) avail.insert(j);
      }
      const RawRequest r{k, avail, static_cast<Millis>(rng.next() % 500),
                         SymbolId{"v", static_cast<uint32_t>(step)}};

      // Replay oracle: compute the expected first match before inserting.
      const MergedRequest lifted = lift_raw(r);
      std::size_t expect_index = 0;
      bool expect_merge = false;
      for (const MergedRequest* e : q.snapshot()) {
        if (misfit(lifted, *e).within(tau)) {
          expect_merge = true;
          break;
        }
        ++expect_index;
      }

      const InsertOutcome out = q.insert(r, cfg);
      ++inserted;
      CHECK(out.merged == expect_merge);
      if (expect_merge) CHECK(out.merged_index == expect_index);

      // Deadline order, raw-count bookkeeping, invariants.
      const auto view = q.snapshot();
      std::size_t raw_total = 0;
      for (std::size_t i = 0; i < view.size(); ++i) {
        raw_total += view[i]->parts().size();
        CHECK(view[i]->check_invariants());
        if (i > 0) CHECK(view[i - 1]->deadline() <= view[i]->deadline());
      }
      CHECK(raw_total == q.raw_count());
      CHECK(inserted == popped + q.raw_count());
    }
  }
}

TEST_CASE("tau extremes match the named rules") {
  // With tau=K-2 the rule merges at the first finite misfit; with tau=0
  // only at zero misfit. Replay both against a shared random stream.
  SplitMix64 rng{77};
  const int K = 6;
  MergeQueue first_fit_q, perfect_fit_q;
  const EngineConfig ff = EngineConfig::first_fit(K);
  const EngineConfig pf = EngineConfig::perfect_fit(K);
  for (int step = 0; step < 500; ++step) {
    const int k = 1 + static_cast<int>(rng.next() % K);
    CacheSet avail(K);
    for (int j = 1; j <= K; ++j) {
      if (j != k && rng.next() % 2 == 0) avail.insert(j);
    }
    const RawRequest r{k, avail, static_cast<Millis>(step),
                       SymbolId{"v", static_cast<uint32_t>(step)}};
    const MergedRequest lifted = lift_raw(r);

    bool ff_expect = false, pf_expect = false;
    for (const MergedRequest* e : first_fit_q.snapshot()) {
      if (misfit(lifted, *e).is_finite()) {
        ff_expect = true;
        break;
      }
    }
    for (const MergedRequest* e : perfect_fit_q.snapshot()) {
      const Misfit m = misfit(lifted, *e);
      if (m.is_finite() && m.value() == 0) {
        pf_expect = true;
        break;
      }
    }
    CHECK(first_fit_q.insert(r, ff).merged == ff_expect);
    CHECK(perfect_fit_q.insert(r, pf).merged == pf_expect);
  }
}
