#include "dcsim/controller.hpp"

namespace dcsim {

namespace {

// Same SRAM budget as the batched designs: one batch slot holds
// ways_per_set individual tags.
ControllerConfig equal_sram(ControllerConfig cfg) {
  cfg.tag_cache.entries *= cfg.geometry.ways_per_set;
  return cfg;
}

}  // namespace

DirectController::DirectController(const ControllerConfig& cfg,
                                   TimingEngine& engine, OutcomeSink sink)
    : Controller(equal_sram(cfg), direct_mapped(cfg.geometry),
                 TagLayout::TagAndData, engine, std::move(sink)) {}

bool DirectController::should_fill() {
  if (cfg_.p_bypass <= 0.0) return true;
  // 53 random bits -> [0, 1)
  const double u = double(rng_() >> 11) * 0x1.0p-53;
  if (u < cfg_.p_bypass) {
    ++counters_.bypassed_fills;
    return false;
  }
  return true;
}

void DirectController::read(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t line = l.loc.set_index;
  const TagLookup state = tags_.lookup(line);
  l.out.block_type_current = classify(state);
  l.out.tag_cache_hit = state != TagLookup::Miss;
  const Cycle ready = now() + tags_.latency();

  switch (state) {
    case TagLookup::Hit:
      at(ready, [this, rid] { resume_following(rid); });
      return;
    case TagLookup::InFlight:
      wait_for_batch(rid, line, ready);
      return;
    case TagLookup::Miss:
      break;
  }

  tags_.begin_fetch(line);
  ++counters_.batch_fetches;
  l.out.caused_batch_fetch = true;
  at(ready, [this, rid, line] {
    demand(rid,
           cache_txn(line, false, Purpose::TadProbe, TxnKind::Read, kTadBytes),
           [this, rid](const Transaction&) { on_probe(rid); });
  });
}

void DirectController::on_probe(std::uint32_t rid) {
  const std::uint64_t line = live(rid).loc.set_index;
  install_batch(line);
  // The probe's extra burst carries the next line's tag as well.
  const std::uint64_t neighbor = (line + 1) % geom_.num_sets();
  if (tags_.probe(neighbor) == TagLookup::Miss) {
    ++counters_.neighbor_prefetches;
    install_batch(neighbor);
  }

  Live& l = live(rid);
  SetView set = store_.set(line);
  if (set[0].valid && set[0].block_id == l.loc.block_id) {
    l.out.case_label = PathCase::B1;
    l.out.dram_cache_hit = true;
    l.out.static_position = true;
    l.out.block_type_stored = set[0].stored_type();
    touch(set[0], l.out.block_type_current);
    set[0].priority = l.out.block_type_current == BlockType::Leading;
    return;
  }

  l.out.case_label = PathCase::D;
  const bool fill = should_fill();
  if (fill) {
    const auto victim =
        install_block(set, 0, l.loc.block_id, l.out.block_type_current);
    if (victim) retire_victim(line, *victim, true);
  }
  fetch_and_fill(rid, fill, kTadBytes);
}

void DirectController::resume_following(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t line = l.loc.set_index;
  SetView set = store_.set(line);

  if (set[0].valid && set[0].block_id == l.loc.block_id) {
    l.out.case_label = PathCase::A;
    l.out.dram_cache_hit = true;
    l.out.static_position = true;
    l.out.block_type_stored = set[0].stored_type();
    demand(rid, cache_txn(line, false, Purpose::DemandData, TxnKind::Read));
    touch(set[0], BlockType::Following);
    set[0].priority = false;
    return;
  }

  l.out.case_label = PathCase::C;
  const bool fill = should_fill();
  if (fill) {
    const auto victim =
        install_block(set, 0, l.loc.block_id, BlockType::Following);
    if (victim) retire_victim(line, *victim, false);
  }
  fetch_and_fill(rid, fill, kTadBytes);
}

void DirectController::write(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t line = l.loc.set_index;
  SetView set = store_.set(line);
  l.out.block_type_current = classify(tags_.probe(line));
  l.out.tag_cache_hit = tags_.probe(line) == TagLookup::Hit;

  if (set[0].valid && set[0].block_id == l.loc.block_id) {
    l.out.dram_cache_hit = true;
    l.out.case_label = l.out.tag_cache_hit ? PathCase::A : PathCase::B1;
    l.out.block_type_stored = set[0].stored_type();
    set[0].dirty = true;
    // The tag rides along with the data, so no separate tag update.
    demand(rid, cache_txn(line, false, Purpose::WriteData, TxnKind::Write,
                          kTadBytes));
    return;
  }
  l.out.case_label = l.out.tag_cache_hit ? PathCase::C : PathCase::D;
  demand(rid, mem_txn(l.loc.block_id, Purpose::WriteData, TxnKind::Write));
}

}  // namespace dcsim
