#include <cassert>

#include "dcsim/controller.hpp"

namespace dcsim {

GeminiController::GeminiController(const ControllerConfig& cfg,
                                   TimingEngine& engine, OutcomeSink sink)
    : Controller(cfg, cfg.geometry, TagLayout::SeparateBank, engine,
                 std::move(sink)) {}

void GeminiController::read(std::uint32_t rid) {
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

  // Leading: fetch the batch and the static-position data concurrently.
  tags_.begin_fetch(set_index);
  ++counters_.batch_fetches;
  l.out.caused_batch_fetch = true;
  at(ready, [this, rid, set_index] {
    demand(rid, cache_txn(set_index, true, Purpose::TagBatch, TxnKind::Read),
           [this, rid](const Transaction&) { on_batch(rid); });
    demand(rid,
           cache_txn(set_index, false, Purpose::DemandData, TxnKind::Read));
  });
}

void GeminiController::on_batch(std::uint32_t rid) {
  const std::uint64_t set_index = live(rid).loc.set_index;
  install_batch(set_index);

  Live& l = live(rid);
  SetView set = store_.set(set_index);
  const std::uint32_t static_pos = l.loc.static_pos;
  const auto way = set.find(l.loc.block_id);

  if (way) {
    l.out.dram_cache_hit = true;
    l.out.block_type_stored = set[*way].stored_type();
    if (*way == static_pos) {
      l.out.case_label = PathCase::B1;
      l.out.static_position = true;
    } else {
      // Stale placement: the static read fetched the wrong block.
      l.out.case_label = PathCase::B2;
      demand(rid, cache_txn(set_index, false, Purpose::DemandData,
                            TxnKind::Read));
    }
    update_on_hit(rid, set, *way);
    return;
  }

  l.out.case_label = PathCase::D;
  const auto victim =
      install_block(set, leading_fill_victim(static_pos), l.loc.block_id,
                    BlockType::Leading);
  tags_.mark_modified(set_index);
  // The static-position read already brought the occupant's data.
  if (victim) retire_victim(set_index, *victim, true);
  fetch_and_fill(rid, true, 64);
}

void GeminiController::resume_following(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t set_index = l.loc.set_index;
  SetView set = store_.set(set_index);
  const auto way = set.find(l.loc.block_id);

  if (way) {
    l.out.case_label = PathCase::A;
    l.out.dram_cache_hit = true;
    l.out.block_type_stored = set[*way].stored_type();
    l.out.static_position = *way == l.loc.static_pos;
    demand(rid,
           cache_txn(set_index, false, Purpose::DemandData, TxnKind::Read));
    update_on_hit(rid, set, *way);
    return;
  }

  l.out.case_label = PathCase::C;
  const std::uint32_t victim_way = rv_clock_victim(set);
  const auto victim = install_block(set, victim_way, l.loc.block_id,
                                    BlockType::Following);
  tags_.mark_modified(set_index);
  if (victim) retire_victim(set_index, *victim, false);
  fetch_and_fill(rid, true, 64);
}

void GeminiController::update_on_hit(std::uint32_t rid, SetView set,
                                     std::uint32_t way) {
  Live& l = live(rid);
  const BlockType current = l.out.block_type_current;
  TagEntry& e = set[way];

  const FilterEvent event = filter_event(e.last_seen, current);
  const std::uint8_t before = e.filter;
  if (cfg_.policy.filter_enabled) e.filter = filter_update(before, event);
  if (event == FilterEvent::FollowingToLeading) {
    l.out.returned_to_leading = true;
    l.out.following_run = e.run_length;
    l.out.filter_flagged =
        cfg_.policy.filter_enabled && filter_flags(before, event);
  }
  const bool keep = cfg_.policy.filter_enabled &&
                    cfg_.policy.reservation_enabled &&
                    priority_reservation(e.filter);

  const MappingResult r = apply_mapping_policy(
      set, way, l.loc.static_pos, e.stored_type(), current, keep);
  l.out.mapping = r.action;
  touch(set[r.way], current);
  tags_.mark_modified(l.loc.set_index);

  switch (r.action) {
    case MappingAction::KeepPriority:
      ++counters_.reservations;
      break;
    case MappingAction::ClearRefAtStatic:
      ++counters_.ref_clears;
      break;
    case MappingAction::Migrate:
      ++counters_.migrations;
      if (r.evicted) retire_victim(l.loc.set_index, *r.evicted, true);
      background(cache_txn(l.loc.set_index, false, Purpose::Migration,
                           TxnKind::Read));
      background(cache_txn(l.loc.set_index, false, Purpose::Migration,
                           TxnKind::Write));
      break;
    default:
      break;
  }
}

void GeminiController::write(std::uint32_t rid) {
  Live& l = live(rid);
  const std::uint64_t set_index = l.loc.set_index;
  SetView set = store_.set(set_index);
  l.out.block_type_current = classify(tags_.probe(set_index));
  l.out.tag_cache_hit = tags_.probe(set_index) == TagLookup::Hit;

  if (const auto way = set.find(l.loc.block_id)) {
    l.out.dram_cache_hit = true;
    l.out.case_label = l.out.tag_cache_hit ? PathCase::A : PathCase::B1;
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
