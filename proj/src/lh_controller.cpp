#include "dcsim/controller.hpp"

namespace dcsim {

LhController::LhController(const ControllerConfig& cfg, TimingEngine& engine,
                           OutcomeSink sink)
    : Controller(cfg, with_ways(cfg.geometry, cfg.lh_ways), TagLayout::SameRow,
                 engine, std::move(sink)) {}

void LhController::read(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t set_index = l.loc.set_index;
  const TagLookup state = tags_.lookup(set_index);
  l.out.block_type_current = classify(state);
  l.out.tag_cache_hit = state != TagLookup::Miss;
  const Cycle ready = now() + tags_.latency();

  switch (state) {
    case TagLookup::Hit:
      at(ready, [this, rid] { resume_following(rid); });
      return;
    case TagLookup::InFlight:
      wait_for_batch(rid, set_index, ready);
      return;
    case TagLookup::Miss:
      break;
  }

  tags_.begin_fetch(set_index);
  ++counters_.batch_fetches;
  l.out.caused_batch_fetch = true;
  at(ready, [this, rid, set_index] {
    demand(rid, cache_txn(set_index, true, Purpose::TagBatch, TxnKind::Read),
           [this, rid](const Transaction&) { on_batch(rid); });
  });
}

void LhController::on_batch(std::uint32_t rid) {
  const std::uint64_t set_index = live(rid).loc.set_index;
  install_batch(set_index);

  Live& l = live(rid);
  SetView set = store_.set(set_index);
  if (const auto way = set.find(l.loc.block_id)) {
    // Tag check done; now the data read, in the same row.
    l.out.case_label = PathCase::B2;
    l.out.dram_cache_hit = true;
    l.out.block_type_stored = set[*way].stored_type();
    demand(rid,
           cache_txn(set_index, false, Purpose::DemandData, TxnKind::Read));
    touch(set[*way], l.out.block_type_current);
    set[*way].priority = l.out.block_type_current == BlockType::Leading;
    tags_.mark_modified(set_index);
    return;
  }

  l.out.case_label = PathCase::D;
  const auto victim = install_block(set, clock_victim(set), l.loc.block_id,
                                    l.out.block_type_current);
  tags_.mark_modified(set_index);
  if (victim) retire_victim(set_index, *victim, false);
  fetch_and_fill(rid, true, 64);
}

void LhController::resume_following(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t set_index = l.loc.set_index;
  SetView set = store_.set(set_index);

  if (const auto way = set.find(l.loc.block_id)) {
    l.out.case_label = PathCase::A;
    l.out.dram_cache_hit = true;
    l.out.block_type_stored = set[*way].stored_type();
    demand(rid,
           cache_txn(set_index, false, Purpose::DemandData, TxnKind::Read));
    touch(set[*way], BlockType::Following);
    set[*way].priority = false;
    tags_.mark_modified(set_index);
    return;
  }

  l.out.case_label = PathCase::C;
  const auto victim = install_block(set, clock_victim(set), l.loc.block_id,
                                    BlockType::Following);
  tags_.mark_modified(set_index);
  if (victim) retire_victim(set_index, *victim, false);
  fetch_and_fill(rid, true, 64);
}

void LhController::write(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t set_index = l.loc.set_index;
  SetView set = store_.set(set_index);
  l.out.block_type_current = classify(tags_.probe(set_index));
  l.out.tag_cache_hit = tags_.probe(set_index) == TagLookup::Hit;

  if (const auto way = set.find(l.loc.block_id)) {
    l.out.dram_cache_hit = true;
    l.out.case_label = l.out.tag_cache_hit ? PathCase::A : PathCase::B2;
    l.out.block_type_stored = set[*way].stored_type();
    set[*way].dirty = true;
    demand(rid,
           cache_txn(set_index, false, Purpose::WriteData, TxnKind::Write));
    if (!tags_.mark_modified(set_index)) {
      ++counters_.tag_updates;
      background(
          cache_txn(set_index, true, Purpose::TagUpdate, TxnKind::Write));
    }
    return;
  }
  l.out.case_label = l.out.tag_cache_hit ? PathCase::C : PathCase::D;
  demand(rid, mem_txn(l.loc.block_id, Purpose::WriteData, TxnKind::Write));
}

}  // namespace dcsim
