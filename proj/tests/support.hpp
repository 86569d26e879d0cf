#pragma once

#include <memory>
#include <vector>

#include "dcsim/runner.hpp"

namespace support {

using namespace dcsim;

inline TraceRecord rd(Cycle c, Addr a) { return {c, Op::Read, a, 0}; }
inline TraceRecord wr(Cycle c, Addr a) { return {c, Op::Write, a, 0}; }

inline RecordSource from_vector(std::vector<TraceRecord> recs) {
  auto data = std::make_shared<std::vector<TraceRecord>>(std::move(recs));
  auto pos = std::make_shared<std::size_t>(0);
  return [data, pos]() -> std::optional<TraceRecord> {
    if (*pos == data->size()) return std::nullopt;
    return (*data)[(*pos)++];
  };
}

struct Replay {
  RunStats stats;
  std::vector<AccessOutcome> outcomes;  // completion order
};

inline Replay replay(const ExperimentConfig& cfg,
                     std::vector<TraceRecord> recs) {
  Replay r;
  r.stats = simulate(cfg, from_vector(std::move(recs)),
                     [&r](const AccessOutcome& o) { r.outcomes.push_back(o); });
  return r;
}

inline ExperimentConfig config_for(Design d) {
  ExperimentConfig cfg;
  cfg.controller.design = d;
  return cfg;
}

/// One controller on an idle engine. Tag state can be seeded through
/// `ctrl->store()` before issuing requests, which keeps every bank closed
/// for zero-load measurements.
struct Bench {
  TimingEngine engine;
  std::vector<AccessOutcome> out;
  std::vector<Transaction> cache_txns;
  std::vector<Transaction> mem_txns;
  std::unique_ptr<Controller> ctrl;

  explicit Bench(const ControllerConfig& cfg)
      : engine(DeviceTiming::cache_defaults(),
               DeviceTiming::memory_defaults()) {
    ctrl = make_controller(cfg, engine,
                           [this](const AccessOutcome& o) { out.push_back(o); });
    engine.cache().set_observer(
        [this](const Transaction& t) { cache_txns.push_back(t); });
    engine.memory().set_observer(
        [this](const Transaction& t) { mem_txns.push_back(t); });
  }

  static ControllerConfig make(Design d) {
    ControllerConfig c;
    c.design = d;
    return c;
  }
  explicit Bench(Design d) : Bench(make(d)) {}

  /// Issues one request well after everything before it has drained and
  /// returns its outcome.
  AccessOutcome issue(Op op, Addr addr) {
    const Cycle at = engine.now() + 10'000;
    engine.events().schedule(at, [this, op, addr, at] {
      ctrl->access(Request{at, op, addr, 0});
    });
    engine.events().run();
    return out.back();
  }
  AccessOutcome read(Addr a) { return issue(Op::Read, a); }
  AccessOutcome write(Addr a) { return issue(Op::Write, a); }

  void clear_logs() {
    cache_txns.clear();
    mem_txns.clear();
  }
};

inline std::uint32_t count(const std::vector<Transaction>& txns, Purpose p) {
  std::uint32_t n = 0;
  for (const auto& t : txns) n += t.purpose == p;
  return n;
}

}  // namespace support
