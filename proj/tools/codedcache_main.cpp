// Experiments CLI: steady-state simulation runs and the CSV presets
// (fig2, fig3, asymptote, trace) described in the README.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "codedcache/experiments.hpp"
#include "codedcache/simulator.hpp"

namespace {

unsigned parse_tau(const std::string& text, int num_caches) {
  if (text == "max") return static_cast<unsigned>(num_caches - 2);
  const long v = std::stol(text);
  if (v < 0) throw CLI::ValidationError("--tau", "tau must be >= 0 or 'max'");
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded caching experiments"};
  app.require_subcommand(1);

  // ---- sim ----------------------------------------------------------
  auto* sim = app.add_subcommand("sim", "single steady-state simulation run");
  int sim_caches = 10;
  double sim_prob = 0.5;
  std::string sim_tau = "max";
  uint64_t sim_len = 1000;
  uint64_t sim_warmup = 0, sim_measured = 0, sim_seed = 1;
  std::string sim_metric = "raw";
  sim->add_option("-K,--caches", sim_caches, "number of edge caches");
  sim->add_option("-p,--prob", sim_prob, "cache probability");
  sim->add_option("--tau", sim_tau, "merge threshold (0..K-2 or 'max')");
  sim->add_option("-L,--queue-len", sim_len, "pending-request cap");
  sim->add_option("--warmup", sim_warmup, "warmup raw requests (default 10L)");
  sim->add_option("--measured", sim_measured,
                  "measured raw requests (default max(2e5, 20L))");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--queue-metric", sim_metric,
                  "what L caps: 'raw' requests or merged 'entries'");

  // ---- fig2 ---------------------------------------------------------
  auto* fig2 = app.add_subcommand("fig2", "gain vs L for the tau-fit family");
  codedcache::Fig2Params f2;
  std::string fig2_out = "fig2.csv";
  fig2->add_option("-o,--out", fig2_out, "output CSV path");
  fig2->add_option("--seeds", f2.seeds, "seeds per grid point");
  fig2->add_option("--caches", f2.num_caches);
  fig2->add_option("--prob", f2.cache_prob);
  fig2->add_option("--lengths", f2.lengths, "queue lengths");
  fig2->add_option("--measured", f2.measured, "override measured window");
  fig2->add_option("--threads", f2.threads);

  // ---- fig3 ---------------------------------------------------------
  auto* fig3 = app.add_subcommand(
      "fig3", "first-fit gain with L = K for several cache probabilities");
  codedcache::Fig3Params f3;
  std::string fig3_out = "fig3.csv";
  fig3->add_option("-o,--out", fig3_out, "output CSV path");
  fig3->add_option("--seeds", f3.seeds);
  fig3->add_option("--probs", f3.probs);
  fig3->add_option("--lengths", f3.lengths, "L = K grid");
  fig3->add_option("--measured", f3.measured);
  fig3->add_option("--threads", f3.threads);

  // ---- asymptote ----------------------------------------------------
  auto* asym = app.add_subcommand(
      "asymptote", "closed-form limit next to simulated large-L gain");
  codedcache::AsymptoteParams fa;
  std::string asym_out = "asymptote.csv";
  asym->add_option("-o,--out", asym_out, "output CSV path");
  asym->add_option("--caches", fa.num_caches);
  asym->add_option("--probs", fa.probs);
  asym->add_option("-L,--queue-len", fa.queue_len);
  asym->add_option("--seeds", fa.seeds);
  asym->add_option("--measured", fa.measured);

  // ---- trace --------------------------------------------------------
  auto* trace = app.add_subcommand(
      "trace", "in-process server + clients streaming over loopback");
  codedcache::TraceParams ft;
  std::string trace_out = "trace.csv";
  std::string trace_db;
  int trace_tau = -1;
  trace->add_option("-o,--out", trace_out, "output CSV path");
  trace->add_option("--clients", ft.clients);
  trace->add_option("--interval-ms", ft.start_interval_ms,
                    "stagger between client starts");
  trace->add_option("--db", trace_db, "content directory (default: synthetic)");
  trace->add_option("--video-bytes", ft.synth_video_bytes,
                    "size of each synthetic video");
  trace->add_option("--prob", ft.cache_prob);
  trace->add_option("--tau", trace_tau, "merge threshold (-1 = first-fit)");
  trace->add_option("--depth", ft.pipeline_depth, "outstanding symbols per client");
  trace->add_option("--ttl-ms", ft.ttl_ms, "per-symbol deadline spacing");
  trace->add_option("--symbol-size", ft.symbol_size);
  trace->add_option("--guard-ms", ft.guard_ms);
  trace->add_option("--seed", ft.base_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      codedcache::SimConfig cfg = codedcache::SimConfig::defaults(
          sim_caches, sim_prob, parse_tau(sim_tau, sim_caches), sim_len,
          sim_seed);
      if (sim_warmup > 0) cfg.warmup = sim_warmup;
      if (sim_measured > 0) cfg.measured = sim_measured;
      if (sim_metric == "entries") {
        cfg.metric = codedcache::QueueMetric::Entries;
      } else if (sim_metric != "raw") {
        throw CLI::ValidationError("--queue-metric", "must be raw or entries");
      }
      const codedcache::GainResult res = codedcache::run_steady_state(cfg);
      std::printf("gain %.6f (stderr %.6f)\n", res.gain, res.gain_stderr);
      std::printf("transmissions %llu served %llu pending %llu\n",
                  static_cast<unsigned long long>(res.transmissions),
                  static_cast<unsigned long long>(res.served),
                  static_cast<unsigned long long>(res.pending_raw));
      std::printf("mean entry size %.4f\n", res.mean_entry_size);
      std::printf("asymptotic limit %.6f\n",
                  sim_prob > 0
                      ? codedcache::asymptotic_gain(sim_caches, sim_prob)
                      : 1.0);
    } else if (fig2->parsed()) {
      codedcache::emit_csv(codedcache::run_fig2(f2), fig2_out);
      std::printf("wrote %s\n", fig2_out.c_str());
    } else if (fig3->parsed()) {
      codedcache::emit_csv(codedcache::run_fig3(f3), fig3_out);
      std::printf("wrote %s\n", fig3_out.c_str());
    } else if (asym->parsed()) {
      codedcache::emit_csv(codedcache::run_asymptote(fa), asym_out);
      std::printf("wrote %s\n", asym_out.c_str());
    } else if (trace->parsed()) {
      ft.db_dir = trace_db;
      ft.tau = trace_tau;
      const codedcache::TraceResult res = codedcache::run_trace(ft);
      codedcache::emit_csv(res.table, trace_out);
      std::printf("wrote %s\n", trace_out.c_str());
      std::printf("transmissions %llu served %llu\n",
                  static_cast<unsigned long long>(res.transmissions),
                  static_cast<unsigned long long>(res.raw_served));
      std::printf("cumulative gain %.4f peak smoothed gain %.4f\n",
                  res.cumulative_gain, res.peak_smoothed_gain);
      std::printf("outputs byte-identical: %s\n",
                  res.outputs_match ? "yes" : "NO");
      if (!res.outputs_match) return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
