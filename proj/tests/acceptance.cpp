// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles/clock_reference.hpp"
#include "oracles/mapping_table.hpp"
#include "oracles/zero_load.hpp"
#include "support.hpp"

using namespace dcsim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d  %-34s %s\n", pass ? "PASS" : "FAIL", id,
              name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig workload(Design d, WorkloadClass c, std::uint64_t records) {
  ExperimentConfig cfg = support::config_for(d);
  cfg.workload.cls = c;
  cfg.workload.records = records;
  return cfg;
}

double hit_b2_share(const RunStats& s) {
  const auto hits = s.cases[0] + s.cases[1] + s.cases[2];
  return hits ? double(s.cases[2]) / double(hits) : 0.0;
}

// ---------------------------------------------------------------------------

void clock_oracle() {
  const auto t0 = Clock::now();
  std::uint64_t checked = 0, mismatches = 0;
  auto one = [&](std::vector<TagEntry> ways, std::uint32_t hand) {
    std::vector<oracle::Way> ow;
    for (const auto& e : ways) ow.push_back({e.valid, e.priority, e.ref});
    const auto want = oracle::clock_reference(ow, hand, true);
    std::uint32_t h = hand;
    const std::uint32_t got = rv_clock_victim(SetView{ways, &h});
    bool ok = got == want.victim && h == want.hand_after;
    for (std::size_t w = 0; w < ways.size(); ++w) {
      ok = ok && (!ways[w].valid || ways[w].ref == want.after[w].ref);
    }
    ++checked;
    mismatches += !ok;
  };
  auto make = [](int v, BlockId id) {
    TagEntry e;
    if (v == 0) return e;
    e.valid = true;
    e.block_id = id;
    e.priority = v <= 2;
    e.ref = v % 2 == 0;
    return e;
  };
  for (int code = 0; code < 625; ++code) {
    for (std::uint32_t hand = 0; hand < 4; ++hand) {
      std::vector<TagEntry> ways(4);
      for (int w = 0, c = code; w < 4; ++w, c /= 5) ways[w] = make(c % 5, w + 1);
      one(ways, hand);
    }
  }
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10'000; ++i) {
    std::vector<TagEntry> ways(16);
    for (int w = 0; w < 16; ++w) {
      ways[w] = make(rng() % 10 == 0 ? 0 : 1 + int(rng() % 4), w + 1);
    }
    one(ways, std::uint32_t(rng() % 16));
  }
  const double t = seconds_since(t0);
  report(1, "victim choice vs CLOCK reference", mismatches == 0 && t < 10.0,
         fmt("%llu states, %llu mismatches, %.2f s", (unsigned long long)checked,
             (unsigned long long)mismatches, t));
}

void mapping_table() {
  int rows = 0, bad = 0;
  std::string first;
  for (const auto& row : oracle::kMappingRows) {
    ++rows;
    const std::string err = oracle::check_mapping_row(row);
    if (!err.empty()) {
      ++bad;
      if (first.empty()) first = std::string(row.name) + ": " + err;
    }
  }
  report(2, "mapping policy table", rows >= 8 && bad == 0,
         fmt("%d cases, %d wrong %s", rows, bad, first.c_str()));
}

void byte_accounting() {
  ExperimentConfig cfg = workload(Design::Gemini, WorkloadClass::BF, 300'000);
  cfg.workload.write_ratio = 0.2;

  // Demand bytes as seen by the devices, for reconciliation.
  std::uint64_t wrong = 0, reads = 0;
  std::uint64_t outcome_cache = 0, outcome_mem = 0;
  const RunStats s = run_experiment(cfg, [&](const AccessOutcome& o) {
    outcome_cache += o.bytes_cache;
    outcome_mem += o.bytes_mem;
    if (o.op == Op::Write) return;
    ++reads;
    std::uint32_t want_cache = 0, want_mem = 0;
    switch (o.case_label) {
      case PathCase::B1: want_cache = 128; break;                  // leading hit
      case PathCase::D: want_cache = 128; want_mem = 64; break;    // leading miss
      case PathCase::A: want_cache = 64; break;                    // following hit
      case PathCase::C: want_mem = 64; break;                      // following miss
      case PathCase::B2: want_cache = 192; break;                  // stale placement
    }
    wrong += o.bytes_cache != want_cache || o.bytes_mem != want_mem;
  });
  auto demand = [](const DeviceLog& d) {
    return d.bytes[std::size_t(Purpose::DemandData)] +
           d.bytes[std::size_t(Purpose::TagBatch)] +
           d.bytes[std::size_t(Purpose::WriteData)];
  };
  const auto dev_cache = demand(s.cache_log);
  const auto dev_mem = demand(s.memory_log);
  const long long err = std::llabs((long long)dev_cache - (long long)outcome_cache) +
                        std::llabs((long long)dev_mem - (long long)outcome_mem);
  report(3, "per-request byte accounting", wrong == 0 && err == 0,
         fmt("%llu reads, %llu off-table, reconciliation error %lld B",
             (unsigned long long)reads, (unsigned long long)wrong, err));
}

RunStats ld[3];  // direct, gemini, lh

void hit_latency_ratio() {
  constexpr std::uint64_t kRecords = 10'000'000;
  double slowest = 0;
  const Design designs[] = {Design::Direct, Design::Gemini, Design::LH};
  for (int i = 0; i < 3; ++i) {
    const auto t0 = Clock::now();
    ld[i] = run_experiment(workload(designs[i], WorkloadClass::LD, kRecords));
    slowest = std::max(slowest, seconds_since(t0));
  }
  const double lh = ld[2].mean_hit_latency / ld[0].mean_hit_latency;
  const double gem = ld[1].mean_hit_latency / ld[0].mean_hit_latency;
  const double tc = ld[1].tag_cache_hit_rate;
  const bool pass = tc < 0.5 && lh >= 1.5 && lh <= 2.3 && gem <= 1.35 &&
                    slowest < 60.0;
  report(4, "hit latency ratios (LD)", pass,
         fmt("lh/direct %.3f, gemini/direct %.3f, tag-cache hit %.3f, "
             "slowest 1e7-record run %.1f s",
             lh, gem, tc, slowest));
}

RunStats cd[3];

void hit_rate_parity() {
  constexpr std::uint64_t kRecords = 2'000'000;
  const Design designs[] = {Design::Direct, Design::Gemini, Design::LH};
  for (int i = 0; i < 3; ++i) {
    cd[i] = run_experiment(workload(designs[i], WorkloadClass::CD, kRecords));
  }
  const double g = cd[1].dram_hit_rate, l = cd[2].dram_hit_rate,
               d = cd[0].dram_hit_rate;
  const ExperimentConfig c = workload(Design::Gemini, WorkloadClass::CD, 1);
  const double ws = double(c.profile().working_set) /
                    double(c.controller.geometry.cache_capacity);
  report(5, "hit rate parity (CD)",
         std::abs(g - l) <= 0.05 && g - d >= 0.10 && ws >= 2 && ws <= 4,
         fmt("gemini %.4f, lh %.4f, direct %.4f, |g-lh| %.4f, g-direct %.4f, "
             "working set %.1fx",
             g, l, d, std::abs(g - l), g - d, ws));
}

void b2_elimination() {
  const double g = hit_b2_share(ld[1]);
  const double l = hit_b2_share(ld[2]);
  report(6, "serialized hits removed (LD)", l > 0 && g <= 0.1 * l,
         fmt("B2 share of hits: gemini %.5f, lh %.5f", g, l));
}

// Replays per-block type sequences through the hybrid controller: a block is
// read once with its batch off chip (leading), then `run` more times with the
// batch on chip (following), then the batch is pushed out again.
FilterStats filter_on_sequences() {
  ExperimentConfig cfg = support::config_for(Design::Gemini);
  std::mt19937_64 rng(17);
  std::vector<TraceRecord> recs;
  Cycle at = 0;
  const std::uint64_t set_bytes = 16 * 64;
  const std::uint64_t tc_sets = cfg.controller.tag_cache.entries /
                                cfg.controller.tag_cache.assoc;
  const std::uint64_t num_sets = cfg.controller.geometry.num_sets();
  auto push = [&](Addr a) {
    at += 400;
    recs.push_back({at, Op::Read, a, 0});
  };
  for (int block = 0; block < 400; ++block) {
    const std::uint64_t set = rng() % num_sets;
    const Addr addr = set * set_bytes + (rng() % 16) * 64;
    const std::uint32_t run = 1 + std::uint32_t(rng() % 6);
    for (int episode = 0; episode < 20; ++episode) {
      push(addr);
      for (std::uint32_t k = 0; k < run; ++k) push(addr);
      // Fill the same tag-cache set with other batches.
      for (std::uint64_t j = 1; j <= cfg.controller.tag_cache.assoc; ++j) {
        const std::uint64_t other = (set + j * tc_sets * 7) % num_sets;
        push(other * set_bytes + 4096 * 1024 * 64);
      }
    }
  }
  return support::replay(cfg, std::move(recs)).stats.filter;
}

void filter_behavior() {
  // By construction: a block that alternates between leading and `n`
  // following accesses, once warmed up.
  bool exact = true;
  for (std::uint32_t n = 1; n <= 8; ++n) {
    std::uint8_t c = filter_update(0, FilterEvent::FollowingToLeading);
    for (int rep = 0; rep < 10; ++rep) {
      c = filter_update(c, FilterEvent::FromLeading);  // leading -> following
      for (std::uint32_t k = 1; k < n; ++k) {
        c = filter_update(c, FilterEvent::FollowingToFollowing);
      }
      const bool flagged = filter_flags(c, FilterEvent::FollowingToLeading);
      c = filter_update(c, FilterEvent::FollowingToLeading);
      if (n <= 2) exact = exact && flagged;
      if (n > 3) exact = exact && !flagged;
    }
  }
  const FilterStats f = filter_on_sequences();
  const double r1 = f.rate(1), r2 = f.rate(2);
  const bool pass = exact && f.returns[1] > 0 && f.returns[2] > 0 &&
                    f.returns[4] > 0 && r1 >= 0.9 && r2 >= 0.9 &&
                    f.flagged[4] == 0;
  report(7, "type-variation filter", pass,
         fmt("automaton %s; simulated flag rate L1 %.3f (%llu), L2 %.3f (%llu), "
             "L>3 flagged %llu of %llu",
             exact ? "exact" : "WRONG", r1, (unsigned long long)f.returns[1],
             r2, (unsigned long long)f.returns[2],
             (unsigned long long)f.flagged[4], (unsigned long long)f.returns[4]));
}

void timing_and_determinism() {
  TimingEngine e(DeviceTiming::cache_defaults(), DeviceTiming::memory_defaults());
  std::vector<Cycle> done;
  auto txn = [](DeviceKind d, std::uint32_t bank, std::uint64_t row) {
    Transaction t;
    t.device = d;
    t.bank = bank;
    t.row = row;
    return t;
  };
  e.service(txn(DeviceKind::Cache, 0, 0), [&](Cycle c) { done.push_back(c); });
  e.events().run();
  const Cycle t0 = e.now();
  e.service(txn(DeviceKind::Cache, 0, 0), [&](Cycle c) { done.push_back(c - t0); });
  e.service(txn(DeviceKind::Memory, 0, 0), [&](Cycle c) { done.push_back(c - t0); });
  e.events().run();
  const bool closed_forms =
      done.size() == 3 && done[0] == oracle::closed_bank(oracle::kCache, 64) &&
      done[1] == oracle::row_hit(oracle::kCache, 64) &&
      done[2] == oracle::closed_bank(oracle::kMemory, 64) && done[0] == 76 &&
      done[1] == 40 && done[2] == 88;

  const auto cfg = workload(Design::Gemini, WorkloadClass::BF, 200'000);
  const std::string a = result_document(run_experiment(cfg), config_json(cfg)).dump();
  const std::string b = result_document(run_experiment(cfg), config_json(cfg)).dump();
  report(8, "zero-load latency and determinism", closed_forms && a == b,
         fmt("cache closed %llu, row hit %llu, memory %llu; repeated run %s",
             (unsigned long long)done.at(0), (unsigned long long)done.at(1),
             (unsigned long long)done.at(2), a == b ? "identical" : "DIFFERS"));
}

void case_partition() {
  double worst_sum = 0;
  int identity_breaks = 0, runs = 0;
  for (Design d : {Design::Direct, Design::Gemini, Design::LH}) {
    for (WorkloadClass w : {WorkloadClass::CD, WorkloadClass::LD,
                            WorkloadClass::BF, WorkloadClass::NB}) {
      ExperimentConfig cfg = workload(d, w, 200'000);
      cfg.workload.write_ratio = 0.1;
      std::uint64_t hits = 0, tag_hits = 0;
      const RunStats s = run_experiment(cfg, [&](const AccessOutcome& o) {
        if (o.op == Op::Write) return;
        hits += o.dram_cache_hit;
        tag_hits += o.tag_cache_hit;
      });
      ++runs;
      double sum = 0;
      for (double f : s.case_fractions) sum += f;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      const auto& c = s.cases;
      const bool identity =
          hits == c[0] + c[1] + c[2] && s.reads - hits == c[3] + c[4] &&
          tag_hits == c[0] + c[3] &&
          s.dram_hit_rate == double(c[0] + c[1] + c[2]) / double(s.reads);
      identity_breaks += !identity;
    }
  }
  report(9, "case partition", worst_sum <= 1e-9 && identity_breaks == 0,
         fmt("%d runs, max |sum-1| %.2e, hit identity broken in %d",
             runs, worst_sum, identity_breaks));
}

void queuing_delay() {
  const double g = cd[1].mean_memory_queue_delay;
  const double d = cd[0].mean_memory_queue_delay;
  report(10, "memory queuing delay (CD)", d > 0 && g <= 0.7 * d,
         fmt("gemini %.1f, direct %.1f cycles, ratio %.3f", g, d,
             d > 0 ? g / d : 0.0));
}

}  // namespace

int main() {
  clock_oracle();
  mapping_table();
  byte_accounting();
  hit_latency_ratio();
  hit_rate_parity();
  b2_elimination();
  filter_behavior();
  timing_and_determinism();
  case_partition();
  queuing_delay();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
