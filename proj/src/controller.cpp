#include "dcsim/controller.hpp"

#include <algorithm>
#include <cassert>

namespace dcsim {

const char* to_string(Design d) {
  switch (d) {
    case Design::Gemini: return "gemini";
    case Design::LH: return "lh";
    case Design::Direct: return "direct";
  }
  return "?";
}

std::optional<Design> parse_design(std::string_view s) {
  if (s == "gemini") return Design::Gemini;
  if (s == "lh") return Design::LH;
  if (s == "direct") return Design::Direct;
  return std::nullopt;
}

const char* to_string(PathCase c) {
  switch (c) {
    case PathCase::A: return "A";
    case PathCase::B1: return "B1";
    case PathCase::B2: return "B2";
    case PathCase::C: return "C";
    case PathCase::D: return "D";
  }
  return "?";
}

Controller::Controller(const ControllerConfig& cfg,
                       const CacheGeometry& geometry, TagLayout layout,
                       TimingEngine& engine, OutcomeSink sink)
    : cfg_(cfg),
      geom_(geometry),
      layout_{engine.cache().timing().channels, engine.cache().timing().banks,
              layout},
      engine_(engine),
      sink_(std::move(sink)),
      tags_(cfg.tag_cache.entries, cfg.tag_cache.assoc, cfg.tag_cache.latency),
      store_(geometry.num_sets(), geometry.ways_per_set),
      rng_(cfg.seed) {}

std::uint32_t Controller::alloc(const Request& req) {
  std::uint32_t rid;
  if (free_.empty()) {
    rid = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  } else {
    rid = free_.back();
    free_.pop_back();
  }
  Live& l = slots_[rid];
  l = Live{};
  l.req = req;
  l.loc = locate(req.addr, geom_);
  l.out.id = next_id_++;
  l.out.op = req.op;
  l.out.arrival = req.arrival_cycle;
  l.out.block_id = l.loc.block_id;
  ++live_;
  return rid;
}

void Controller::access(const Request& req) {
  assert(req.arrival_cycle == now());
  const std::uint32_t rid = alloc(req);
  if (req.op == Op::Write) {
    write(rid);
  } else {
    read(rid);
  }
}

void Controller::complete(std::uint32_t rid) {
  Live& l = slots_[rid];
  l.out.latency = now() - l.req.arrival_cycle;
  const AccessOutcome out = l.out;
  free_.push_back(rid);
  --live_;
  if (sink_) sink_(out);
}

Transaction Controller::cache_txn(std::uint64_t set_index, bool tag_row,
                                  Purpose p, TxnKind kind,
                                  std::uint32_t bytes) const {
  const Placement pl = placement(set_index, geom_, layout_);
  Transaction t;
  t.device = DeviceKind::Cache;
  t.kind = kind;
  t.purpose = p;
  t.channel = tag_row ? pl.tag_channel : pl.channel;
  t.bank = tag_row ? pl.tag_bank : pl.data_bank;
  t.row = tag_row ? pl.tag_row : pl.data_row;
  t.bytes = bytes;
  return t;
}

Transaction Controller::mem_txn(BlockId block, Purpose p, TxnKind kind) const {
  const DeviceTiming& mt = engine_.memory().timing();
  const std::uint64_t blocks_per_row =
      std::max<std::uint64_t>(1, mt.row_buffer_bytes / geom_.block_size);
  const std::uint64_t chunk = block / blocks_per_row;
  Transaction t;
  t.device = DeviceKind::Memory;
  t.kind = kind;
  t.purpose = p;
  t.channel = static_cast<std::uint32_t>(chunk % mt.channels);
  t.bank = static_cast<std::uint32_t>((chunk / mt.channels) % mt.banks);
  t.row = chunk / (std::uint64_t{mt.channels} * mt.banks);
  t.bytes = static_cast<std::uint32_t>(geom_.block_size);
  return t;
}

void Controller::demand(std::uint32_t rid, const Transaction& t,
                        std::function<void(const Transaction&)> then) {
  Live& l = slots_[rid];
  if (t.device == DeviceKind::Cache) {
    l.out.bytes_cache += t.bytes;
  } else {
    l.out.bytes_mem += t.bytes;
  }
  ++l.pending;
  engine_.device(t.device).submit(
      t, [this, rid, then = std::move(then)](const Transaction& done) {
        if (then) then(done);
        if (--slots_[rid].pending == 0) complete(rid);
      });
}

void Controller::background(const Transaction& t,
                            std::function<void(const Transaction&)> then) {
  engine_.device(t.device).submit(t, std::move(then));
}

void Controller::at(Cycle when, std::function<void()> fn) {
  engine_.events().schedule(when, std::move(fn));
}

void Controller::retire_victim(std::uint64_t set_index, const TagEntry& victim,
                               bool data_in_hand) {
  if (!victim.valid || !victim.dirty) return;
  ++counters_.dirty_evictions;
  const Transaction wb = mem_txn(victim.block_id, Purpose::Writeback,
                                 TxnKind::Write);
  if (data_in_hand) {
    background(wb);
    return;
  }
  background(cache_txn(set_index, false, Purpose::VictimRead, TxnKind::Read),
             [this, wb](const Transaction&) { background(wb); });
}

void Controller::install_batch(std::uint64_t key) {
  if (auto ev = tags_.install(key); ev && ev->modified) {
    ++counters_.tag_writebacks;
    background(
        cache_txn(ev->key, true, Purpose::TagWriteback, TxnKind::Write));
  }
  auto it = waiters_.find(key);
  if (it == waiters_.end()) return;
  std::vector<std::uint32_t> ready = std::move(it->second);
  waiters_.erase(it);
  for (std::uint32_t rid : ready) {
    at(std::max(now(), slots_[rid].wait_ready),
       [this, rid] { resume_following(rid); });
  }
}

void Controller::wait_for_batch(std::uint32_t rid, std::uint64_t key,
                                Cycle ready) {
  slots_[rid].wait_ready = ready;
  waiters_[key].push_back(rid);
}

void Controller::fetch_and_fill(std::uint32_t rid, bool fill,
                                std::uint32_t fill_bytes) {
  const Live& l = slots_[rid];
  const std::uint64_t set_index = l.loc.set_index;
  demand(rid, mem_txn(l.loc.block_id, Purpose::DemandData, TxnKind::Read),
         [this, set_index, fill, fill_bytes](const Transaction&) {
           if (!fill) return;
           ++counters_.fills;
           background(cache_txn(set_index, false, Purpose::Fill,
                                TxnKind::Write, fill_bytes));
         });
}

void Controller::touch(TagEntry& e, BlockType current) {
  e.ref = true;
  if (e.last_seen == current && e.run_length > 0) {
    if (e.run_length < UINT16_MAX) ++e.run_length;
  } else {
    e.last_seen = current;
    e.run_length = 1;
  }
}

std::unique_ptr<Controller> make_controller(const ControllerConfig& cfg,
                                            TimingEngine& engine,
                                            OutcomeSink sink) {
  switch (cfg.design) {
    case Design::Gemini:
      return std::make_unique<GeminiController>(cfg, engine, std::move(sink));
    case Design::LH:
      return std::make_unique<LhController>(cfg, engine, std::move(sink));
    case Design::Direct:
      return std::make_unique<DirectController>(cfg, engine, std::move(sink));
  }
  return nullptr;
}

}  // namespace dcsim
