#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "codedcache/experiments.hpp"
#include "support/tmpdir.hpp"

using namespace codedcache;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("emit_csv writes header plus rows, deterministically") {
  testsupport::TmpDir dir("csv");
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{"1", "2.5"}};
  emit_csv(t, dir.path() / "one.csv");
  CHECK(slurp(dir.path() / "one.csv") == "a,b\n1,2.5\n");

  emit_csv(t, dir.path() / "two.csv");
  CHECK(slurp(dir.path() / "one.csv") == slurp(dir.path() / "two.csv"));

  CsvTable empty;
  empty.header = {"a"};
  CHECK_THROWS_AS(emit_csv(empty, dir.path() / "bad.csv"),
                  std::invalid_argument);
}

TEST_CASE("csv_num formatting is stable") {
  CHECK(csv_num(5120.0 / 1023.0) == csv_num(5120.0 / 1023.0));
  CHECK(csv_num(1.0) == "1");
  CHECK(csv_num(0.5) == "0.5");
}

TEST_CASE("fig2 preset shape at toy scale") {
  Fig2Params p;
  p.seeds = 2;
  p.lengths = {20, 50};
  p.taus = {0, 8};
  p.measured = 5000;
  p.threads = 2;
  const CsvTable t = run_fig2(p);
  CHECK(t.header == std::vector<std::string>{"tau", "L", "mean_gain", "stderr"});
  REQUIRE(t.rows.size() == 4);  // 2 taus x 2 lengths
  CHECK(t.rows[0][0] == "0");
  CHECK(t.rows[0][1] == "20");
  for (const auto& row : t.rows) {
    const double gain = std::stod(row[2]);
    CHECK(gain >= 1.0);
    CHECK(gain <= 10.0);
  }
  // reproducible byte-for-byte
  const CsvTable t2 = run_fig2(p);
  CHECK(t.rows == t2.rows);
}

TEST_CASE("fig3 preset emits the fitted intercept per probability") {
  Fig3Params p;
  p.seeds = 2;
  p.lengths = {20, 40};
  p.probs = {0.5};
  p.measured = 5000;
  p.threads = 2;
  const CsvTable t = run_fig3(p);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][4] == t.rows[1][4]);  // same fitted c on both rows
}

TEST_CASE("asymptote preset pairs the closed form with simulation") {
  AsymptoteParams p;
  p.num_caches = 6;
  p.probs = {0.5};
  p.queue_len = 2000;
  p.seeds = 2;
  p.measured = 20000;
  const CsvTable t = run_asymptote(p);
  REQUIRE(t.rows.size() == 1);
  const double closed_form = std::stod(t.rows[0][2]);
  const double simulated = std::stod(t.rows[0][3]);
  CHECK(closed_form ==
        doctest::Approx(asymptotic_gain(6, 0.5)).epsilon(1e-9));
  CHECK(simulated > 1.0);
  CHECK(simulated < closed_form + 0.5);

  // the K=10, p=0.5 closed-form column is 5.0049
  AsymptoteParams ten;
  ten.num_caches = 10;
  ten.probs = {0.5};
  ten.queue_len = 500;
  ten.seeds = 1;
  ten.measured = 5000;
  const CsvTable t10 = run_asymptote(ten);
  CHECK(std::stod(t10.rows[0][2]) == doctest::Approx(5.0049).epsilon(1e-4));
}

TEST_CASE("synthetic videos are deterministic in content and length") {
  testsupport::TmpDir dir("synth");
  write_synthetic_video(dir.path() / "a.dat", 1000, 5);
  write_synthetic_video(dir.path() / "b.dat", 1000, 5);
  write_synthetic_video(dir.path() / "c.dat", 1000, 6);
  const std::string a = slurp(dir.path() / "a.dat");
  CHECK(a.size() == 1000);
  CHECK(a == slurp(dir.path() / "b.dat"));
  CHECK(a != slurp(dir.path() / "c.dat"));
}

TEST_CASE("trace preset: tiny end-to-end run over loopback") {
  TraceParams p;
  p.clients = 2;
  p.synth_video_bytes = 64 * 1024;
  p.symbol_size = 1024;
  p.ttl_ms = 2;
  p.pipeline_depth = 20;
  p.base_seed = 77;
  const TraceResult res = run_trace(p);
  CHECK(res.outputs_match);
  CHECK(res.transmissions > 0);
  CHECK(res.cumulative_gain >= 1.0);
  CHECK(res.table.rows.size() == res.transmissions);
  CHECK(res.table.header.size() == 5);
}
