#include <doctest.h>

#include <random>

#include "oracles/direct_reference.hpp"
#include "oracles/zero_load.hpp"
#include "support.hpp"

using namespace dcsim;
using support::Bench;

namespace {

constexpr Cycle kTc = oracle::kTagCacheLatency;
const Cycle kClosed = oracle::closed_bank(oracle::kCache, 64);
const Cycle kRowHit = oracle::row_hit(oracle::kCache, 64);
const Cycle kMem = oracle::closed_bank(oracle::kMemory, 64);

// Places `block` at `way` of its set, as a stored block of `type`.
void seed(Controller& c, BlockId block, std::uint32_t way, BlockType type) {
  const BlockLocator loc = locate(block * 64, c.geometry());
  install_block(c.store().set(loc.set_index), way, block, type);
}

}  // namespace

// ---------------------------------------------------------------------------
// Hybrid-mapped design

TEST_CASE("gemini leading hit: parallel tag and data, 128 cache bytes") {
  Bench b(Design::Gemini);
  seed(*b.ctrl, 3, 3, BlockType::Leading);
  const auto o = b.read(3 * 64);
  CHECK(o.case_label == PathCase::B1);
  CHECK(o.block_type_current == BlockType::Leading);
  CHECK(o.bytes_cache == 128);
  CHECK(o.bytes_mem == 0);
  CHECK(o.latency == kTc + kClosed);
  CHECK(o.latency == 85);
}

TEST_CASE("gemini leading miss: 128 cache bytes then 64 memory bytes") {
  Bench b(Design::Gemini);
  const auto o = b.read(3 * 64);
  CHECK(o.case_label == PathCase::D);
  CHECK(o.bytes_cache == 128);
  CHECK(o.bytes_mem == 64);
  CHECK(o.latency == kTc + kClosed + kMem);
  CHECK(o.caused_batch_fetch);
}

TEST_CASE("gemini following hit and miss") {
  Bench b(Design::Gemini);
  seed(*b.ctrl, 3, 3, BlockType::Leading);
  seed(*b.ctrl, 4, 10, BlockType::Following);
  b.read(3 * 64);  // brings the batch on chip

  const auto hit = b.read(4 * 64);
  CHECK(hit.case_label == PathCase::A);
  CHECK(hit.block_type_current == BlockType::Following);
  CHECK(hit.bytes_cache == 64);
  CHECK(hit.bytes_mem == 0);
  CHECK(hit.latency == kTc + kRowHit);
  CHECK(hit.latency == 49);

  const auto miss = b.read(5 * 64);
  CHECK(miss.case_label == PathCase::C);
  CHECK(miss.bytes_cache == 0);
  CHECK(miss.bytes_mem == 64);
  CHECK(miss.latency == kTc + kMem);
}

TEST_CASE("gemini stale placement costs a second data read") {
  Bench b(Design::Gemini);
  seed(*b.ctrl, 3, 7, BlockType::Following);
  const auto o = b.read(3 * 64);
  CHECK(o.case_label == PathCase::B2);
  CHECK(o.bytes_cache == 192);
  CHECK(o.latency == kTc + kClosed + kRowHit);
  CHECK(o.mapping == MappingAction::Migrate);
  SetView set = b.ctrl->store().set(0);
  CHECK(set[3].block_id == 3);
  CHECK(!set[7].valid);
}

TEST_CASE("gemini request during a batch fetch is following") {
  // Two reads to one set, 1 cycle apart: the second sees the fetch in flight.
  auto cfg = support::config_for(Design::Gemini);
  const auto r = support::replay(cfg, {support::rd(0, 0), support::rd(1, 64)});
  REQUIRE(r.outcomes.size() == 2);
  const auto& second = r.outcomes[0].id == 1 ? r.outcomes[0] : r.outcomes[1];
  CHECK(second.block_type_current == BlockType::Following);
  CHECK(second.tag_cache_hit);
  CHECK(!second.caused_batch_fetch);
}

TEST_CASE("gemini writes are served but carry no latency stats") {
  Bench b(Design::Gemini);
  seed(*b.ctrl, 3, 3, BlockType::Leading);
  const auto w = b.write(3 * 64);
  CHECK(w.op == Op::Write);
  CHECK(w.dram_cache_hit);
  CHECK(b.ctrl->store().set(0)[3].dirty);
  const auto m = b.write(9 * 64);
  CHECK(!m.dram_cache_hit);
  CHECK(m.bytes_mem == 64);
}

// ---------------------------------------------------------------------------
// Set-associative design, tags in the data row

TEST_CASE("lh: first access is a compulsory miss") {
  Bench b(Design::LH);
  const auto o = b.read(0);
  CHECK(o.case_label == PathCase::D);
  CHECK(o.latency == kTc + kClosed + kMem);
}

TEST_CASE("lh: tag-cache miss and hit serializes tag then data") {
  Bench b(Design::LH);
  seed(*b.ctrl, 3, 0, BlockType::Following);
  const auto o = b.read(3 * 64);
  CHECK(o.case_label == PathCase::B2);
  // The data read finds the row opened by the tag read.
  CHECK(o.latency == kTc + kClosed + kRowHit);
  CHECK(o.latency == 125);
  CHECK(o.bytes_cache == 128);
}

TEST_CASE("lh: tag-cache hit and cache hit reads only data") {
  Bench b(Design::LH);
  seed(*b.ctrl, 3, 0, BlockType::Following);
  seed(*b.ctrl, 4, 1, BlockType::Following);
  b.read(3 * 64);
  const auto o = b.read(4 * 64);
  CHECK(o.case_label == PathCase::A);
  CHECK(o.bytes_cache == 64);
  CHECK(o.bytes_mem == 0);
}

TEST_CASE("lh: sets hold 14-block sections") {
  Bench b(Design::LH);
  CHECK(b.ctrl->geometry().ways_per_set == 14);
  CHECK(locate(13 * 64, b.ctrl->geometry()).set_index == 0);
  CHECK(locate(14 * 64, b.ctrl->geometry()).set_index == 1);
}

// ---------------------------------------------------------------------------
// Direct-mapped design

TEST_CASE("direct: tag-cache miss and hit is one tag-and-data access") {
  Bench b(Design::Direct);
  seed(*b.ctrl, 3, 0, BlockType::Leading);
  const auto o = b.read(3 * 64);
  CHECK(o.case_label == PathCase::B1);
  CHECK(b.cache_txns.size() == 1);
  CHECK(o.bytes_cache == 128);
  CHECK(o.latency == kTc + oracle::closed_bank(oracle::kCache, 128));
}

TEST_CASE("direct: tag-cache hit and absent goes straight to memory") {
  Bench b(Design::Direct);
  b.read(3 * 64);  // tag of line 3 now on chip; line holds block 3
  const auto o = b.read((65536 + 3) * 64);
  CHECK(o.case_label == PathCase::C);
  CHECK(o.bytes_cache == 0);
  CHECK(o.bytes_mem == 64);
}

TEST_CASE("direct: neighbour tag arrives with the probe") {
  Bench b(Design::Direct);
  b.read(3 * 64);
  CHECK(b.ctrl->tag_cache().resident(3));
  CHECK(b.ctrl->tag_cache().resident(4));
  CHECK(b.ctrl->counters().neighbor_prefetches == 1);
}

TEST_CASE("direct: two blocks on one line thrash") {
  Bench b(Design::Direct);
  const Addr x = 5 * 64;
  const Addr y = (65536 + 5) * 64;
  for (int i = 0; i < 10; ++i) {
    const auto o = b.read(i % 2 ? y : x);
    CHECK(!o.dram_cache_hit);
  }
}

TEST_CASE("direct: content equals a reference direct-mapped cache") {
  ExperimentConfig cfg = support::config_for(Design::Direct);
  cfg.controller.geometry.cache_capacity = 1024 * 64 * 16 / 16;  // 64 KiB
  const CacheGeometry dg = direct_mapped(cfg.controller.geometry);
  REQUIRE(dg.num_sets() == 1024);

  std::mt19937_64 rng(5);
  std::vector<TraceRecord> recs;
  oracle::DirectReference ref(dg.num_sets());
  std::vector<bool> expect_hit;
  for (int i = 0; i < 20'000; ++i) {
    const BlockId blk = rng() % 4096;
    const bool write = rng() % 5 == 0;
    recs.push_back({Cycle(i) * 1000, write ? Op::Write : Op::Read, blk * 64, 0});
    expect_hit.push_back(write ? ref.write(blk) : ref.read(blk));
  }

  TimingEngine engine(cfg.cache, cfg.memory);
  std::vector<AccessOutcome> outs;
  auto ctrl = make_controller(cfg.controller, engine,
                              [&](const AccessOutcome& o) { outs.push_back(o); });
  for (const auto& r : recs) {
    engine.events().schedule(r.cycle, [&, r] {
      ctrl->access(Request{r.cycle, r.op, r.addr, 0});
    });
  }
  engine.events().run();

  REQUIRE(outs.size() == recs.size());
  for (std::size_t i = 0; i < outs.size(); ++i) {
    REQUIRE(outs[i].dram_cache_hit == expect_hit[outs[i].id]);
  }
  for (std::uint64_t line = 0; line < dg.num_sets(); ++line) {
    const TagEntry& e = ctrl->store().set(line)[0];
    const auto& want = ref.lines()[line];
    REQUIRE(e.valid == want.has_value());
    if (want) REQUIRE(e.block_id == *want);
  }
}

// ---------------------------------------------------------------------------
// Properties over random traffic, every design

namespace {

std::vector<TraceRecord> random_trace(std::uint64_t seed, int n,
                                      std::uint64_t blocks, Cycle gap) {
  std::mt19937_64 rng(seed);
  std::vector<TraceRecord> recs;
  Cycle at = 0;
  for (int i = 0; i < n; ++i) {
    at += rng() % gap;
    // Half the traffic walks short runs so batches get reused.
    const BlockId blk = i % 2 ? rng() % blocks : (rng() % (blocks / 16)) * 16 + i % 16;
    recs.push_back({at, rng() % 6 == 0 ? Op::Write : Op::Read, blk * 64, 0});
  }
  return recs;
}

}  // namespace

TEST_CASE("case labels agree with the hit flags") {
  for (Design d : {Design::Gemini, Design::LH, Design::Direct}) {
    CAPTURE(to_string(d));
    const auto r = support::replay(support::config_for(d),
                                   random_trace(3, 30'000, 1 << 18, 40));
    for (const auto& o : r.outcomes) {
      if (o.op == Op::Write) continue;
      switch (o.case_label) {
        case PathCase::A:
          REQUIRE((o.tag_cache_hit && o.dram_cache_hit));
          break;
        case PathCase::C:
          REQUIRE((o.tag_cache_hit && !o.dram_cache_hit));
          break;
        case PathCase::B1:
        case PathCase::B2:
          REQUIRE((!o.tag_cache_hit && o.dram_cache_hit));
          break;
        case PathCase::D:
          REQUIRE((!o.tag_cache_hit && !o.dram_cache_hit));
          break;
      }
    }
    // Only the set-associative design serializes tag and data on every
    // tag-cache miss hit; the direct design never does.
    if (d == Design::Direct) CHECK(r.stats.cases[2] == 0);
    if (d == Design::LH) CHECK(r.stats.cases[1] == 0);
  }
}

TEST_CASE("gemini stale-placement hits never exceed non-static returns") {
  const auto r = support::replay(support::config_for(Design::Gemini),
                                 random_trace(9, 30'000, 1 << 18, 40));
  std::uint64_t b2 = 0, nonstatic_returns = 0;
  for (const auto& o : r.outcomes) {
    if (o.op == Op::Write) continue;
    b2 += o.case_label == PathCase::B2;
    nonstatic_returns += o.dram_cache_hit && !o.static_position &&
                         o.block_type_current == BlockType::Leading &&
                         o.block_type_stored == BlockType::Following;
  }
  CHECK(b2 <= nonstatic_returns);
}

TEST_CASE("gemini leading blocks live at their static position") {
  Bench b(Design::Gemini);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3000; ++i) b.read((rng() % (1 << 17)) * 64);
  const CacheGeometry& g = b.ctrl->geometry();
  for (std::uint64_t s = 0; s < g.num_sets(); ++s) {
    SetView set = b.ctrl->store().set(s);
    for (std::uint32_t w = 0; w < set.size(); ++w) {
      if (!set[w].valid || !set[w].priority) continue;
      // Reserved blocks keep H while following, but still sit at home.
      REQUIRE(w == set[w].block_id % g.ways_per_set);
    }
  }
}

TEST_CASE("every request completes") {
  for (Design d : {Design::Gemini, Design::LH, Design::Direct}) {
    const auto recs = random_trace(12, 5000, 1 << 16, 3);
    const auto r = support::replay(support::config_for(d), recs);
    CHECK(r.outcomes.size() == recs.size());
    CHECK(r.stats.record_count == recs.size());
  }
}
