#include "dcsim/timing.hpp"

#include <algorithm>
#include <cassert>
#include <memory>
#include <set>

namespace dcsim {

void EventQueue::schedule(Cycle at, Action action) {
  assert(at >= now_);
  heap_.push_back(Event{at, seq_++, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

bool EventQueue::run_one() {
  if (heap_.empty()) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Event ev = std::move(heap_.back());
  heap_.pop_back();
  now_ = ev.at;
  ev.action();
  return true;
}

void EventQueue::run() {
  while (run_one()) {
  }
}

Cycle DeviceTiming::burst_cycles(std::uint32_t bytes) const {
  const std::uint64_t bytes_per_bus_cycle = 2ull * bus_width_bits / 8;
  const std::uint64_t bus_cycles =
      (bytes + bytes_per_bus_cycle - 1) / bytes_per_bus_cycle;
  return (bus_cycles * cpu_clock_mhz + bus_clock_mhz - 1) / bus_clock_mhz;
}

DeviceTiming DeviceTiming::cache_defaults() { return DeviceTiming{}; }

DeviceTiming DeviceTiming::memory_defaults() {
  DeviceTiming t;
  t.channels = 2;
  t.bus_width_bits = 64;
  t.bus_clock_mhz = 800;
  t.banks = 8;
  return t;
}

const char* to_string(Purpose p) {
  switch (p) {
    case Purpose::DemandData: return "demand_data";
    case Purpose::TagBatch: return "tag_batch";
    case Purpose::TadProbe: return "tad_probe";
    case Purpose::WriteData: return "write_data";
    case Purpose::TagUpdate: return "tag_update";
    case Purpose::TagWriteback: return "tag_writeback";
    case Purpose::Fill: return "fill";
    case Purpose::VictimRead: return "victim_read";
    case Purpose::Writeback: return "writeback";
    case Purpose::Migration: return "migration";
    case Purpose::Count: break;
  }
  return "?";
}

void DeviceLog::record(const Transaction& t, Cycle bus_cycles) {
  const auto p = static_cast<std::size_t>(t.purpose);
  ++count[p];
  bytes[p] += t.bytes;
  ++transactions;
  total_bytes += t.bytes;
  if (t.kind == TxnKind::Read) {
    ++reads;
    read_queue_delay_sum += t.queue_delay();
  } else {
    ++writes;
  }
  if (t.row_outcome == RowOutcome::Hit) ++row_hits;
  queue_delay_sum += t.queue_delay();
  busy_bus_cycles += bus_cycles;
  last_complete = std::max(last_complete, t.complete_cycle);
}

DramDevice::DramDevice(DeviceKind kind, const DeviceTiming& timing,
                       EventQueue& events)
    : kind_(kind), timing_(timing), events_(events) {
  channels_.resize(timing.channels);
  for (auto& ch : channels_) ch.banks.resize(timing.banks);
}

void DramDevice::submit(Transaction txn, Callback done) {
  assert(txn.channel < channels_.size());
  assert(txn.bank < timing_.banks);
  txn.device = kind_;
  txn.issue_cycle = events_.now();
  Bank& bank = channels_[txn.channel].banks[txn.bank];
  bank.queue.push_back(Pending{txn, std::move(done)});
  if (!bank.busy) start_next(txn.channel, txn.bank);
}

void DramDevice::start_next(std::uint32_t ch, std::uint32_t b) {
  Bank& bank = channels_[ch].banks[b];
  assert(!bank.busy && !bank.queue.empty());
  bank.current = std::move(bank.queue.front());
  bank.queue.pop_front();
  bank.busy = true;

  Transaction& t = bank.current.txn;
  const Cycle now = events_.now();
  t.start_cycle = now;

  Cycle data_ready = 0;
  Cycle access = 0;
  if (bank.open_row && *bank.open_row == t.row) {
    t.row_outcome = RowOutcome::Hit;
    access = timing_.tcas;
    data_ready = now + access;
  } else if (!bank.open_row) {
    t.row_outcome = RowOutcome::Closed;
    access = timing_.trcd + timing_.tcas;
    bank.last_activate = now;
    data_ready = now + access;
  } else {
    // Precharge may not start before tRAS has elapsed since activation.
    t.row_outcome = RowOutcome::Conflict;
    access = timing_.trp + timing_.trcd + timing_.tcas;
    const Cycle precharge = std::max(now, bank.last_activate + timing_.tras);
    bank.last_activate = precharge + timing_.trp;
    data_ready = precharge + access;
  }
  bank.open_row = t.row;
  t.service_min = access + timing_.burst_cycles(t.bytes);

  events_.schedule(data_ready, [this, ch, b] { on_data_ready(ch, b); });
}

void DramDevice::on_data_ready(std::uint32_t ch, std::uint32_t b) {
  Channel& channel = channels_[ch];
  const Transaction& t = channel.banks[b].current.txn;
  const Cycle start = std::max(events_.now(), channel.bus_free);
  channel.bus_free = start + timing_.burst_cycles(t.bytes);
  events_.schedule(channel.bus_free, [this, ch, b] { on_complete(ch, b); });
}

void DramDevice::on_complete(std::uint32_t ch, std::uint32_t b) {
  Bank& bank = channels_[ch].banks[b];
  Pending done = std::move(bank.current);
  done.txn.complete_cycle = events_.now();
  bank.busy = false;
  // Queued work goes ahead of anything the callback submits to this bank.
  if (!bank.queue.empty()) start_next(ch, b);

  log_.record(done.txn, timing_.burst_cycles(done.txn.bytes));
  if (observer_) observer_(done.txn);
  if (done.done) done.done(done.txn);
}

TimingEngine::TimingEngine(const DeviceTiming& cache,
                           const DeviceTiming& memory)
    : cache_(DeviceKind::Cache, cache, events_),
      memory_(DeviceKind::Memory, memory, events_) {}

void TimingEngine::service(const Transaction& txn,
                           std::function<void(Cycle)> done) {
  device(txn.device).submit(txn, [done = std::move(done)](
                                     const Transaction& t) {
    if (done) done(t.complete_cycle);
  });
}

void TimingEngine::parallel_fetch(const std::vector<Transaction>& txns,
                                  std::function<void(Cycle)> done) {
  struct Join {
    std::size_t remaining;
    Cycle latest = 0;
    std::function<void(Cycle)> done;
  };
  auto join = std::make_shared<Join>(Join{txns.size(), 0, std::move(done)});
  if (txns.empty()) {
    if (join->done) join->done(now());
    return;
  }
  for (const Transaction& t : txns) {
    device(t.device).submit(t, [join](const Transaction& c) {
      join->latest = std::max(join->latest, c.complete_cycle);
      if (--join->remaining == 0 && join->done) join->done(join->latest);
    });
  }
}

}  // namespace dcsim
