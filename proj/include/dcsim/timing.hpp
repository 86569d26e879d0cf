#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "dcsim/geometry.hpp"

namespace dcsim {

// ---------------------------------------------------------------------------
// Event queue

/// Discrete-event scheduler. Events at equal cycles run in scheduling order,
/// which keeps every run deterministic.
class EventQueue {
 public:
  using Action = std::function<void()>;

  Cycle now() const { return now_; }
  void schedule(Cycle at, Action action);
  bool run_one();
  void run();
  bool empty() const { return heap_.empty(); }

 private:
  struct Event {
    Cycle at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  std::vector<Event> heap_;
  std::uint64_t seq_ = 0;
  Cycle now_ = 0;
};

// ---------------------------------------------------------------------------
// Device parameters

enum class DeviceKind : std::uint8_t { Cache, Memory };

/// All latencies are in CPU cycles.
struct DeviceTiming {
  Cycle tcas = 36;
  Cycle trcd = 36;
  Cycle trp = 36;
  Cycle tras = 144;
  std::uint32_t channels = 4;
  std::uint32_t bus_width_bits = 128;
  std::uint32_t bus_clock_mhz = 1600;
  std::uint32_t banks = 16;
  std::uint32_t row_buffer_bytes = 2048;
  std::uint32_t cpu_clock_mhz = 3200;

  /// CPU cycles to move `bytes` over one channel's double-data-rate bus.
  Cycle burst_cycles(std::uint32_t bytes) const;

  static DeviceTiming cache_defaults();
  static DeviceTiming memory_defaults();
};

// ---------------------------------------------------------------------------
// Transactions

enum class TxnKind : std::uint8_t { Read, Write };

/// Why a transaction exists. Demand purposes sit on a read's critical path;
/// the rest are background traffic.
enum class Purpose : std::uint8_t {
  DemandData,    // data read on the request path (cache or memory)
  TagBatch,      // 64 B tag-batch fetch
  TadProbe,      // direct-mapped tag-and-data read (data + one extra burst)
  WriteData,     // data of a write request
  TagUpdate,     // tag-row write for a write hit with the batch off chip
  TagWriteback,  // modified batch evicted from the tag cache
  Fill,          // cache fill after a miss
  VictimRead,    // reading a dirty victim before writing it back
  Writeback,     // dirty victim written to memory
  Migration,     // leading-block move to its static position
  Count
};

inline constexpr std::size_t kPurposeCount =
    static_cast<std::size_t>(Purpose::Count);

const char* to_string(Purpose p);

enum class RowOutcome : std::uint8_t { Hit, Closed, Conflict };

struct Transaction {
  DeviceKind device = DeviceKind::Cache;
  TxnKind kind = TxnKind::Read;
  Purpose purpose = Purpose::DemandData;
  std::uint32_t channel = 0;
  std::uint32_t bank = 0;
  std::uint64_t row = 0;
  std::uint32_t bytes = 64;

  Cycle issue_cycle = 0;
  Cycle start_cycle = 0;
  Cycle complete_cycle = 0;
  Cycle service_min = 0;  // zero-load service under the row state found
  RowOutcome row_outcome = RowOutcome::Closed;

  Cycle queue_delay() const {
    return complete_cycle - issue_cycle - service_min;
  }
};

/// Aggregate view over every completed transaction of one device.
struct DeviceLog {
  std::array<std::uint64_t, kPurposeCount> count{};
  std::array<std::uint64_t, kPurposeCount> bytes{};
  std::uint64_t transactions = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t queue_delay_sum = 0;
  std::uint64_t read_queue_delay_sum = 0;
  Cycle busy_bus_cycles = 0;
  Cycle last_complete = 0;

  void record(const Transaction& t, Cycle bus_cycles);
  double mean_queue_delay() const {
    return transactions ? double(queue_delay_sum) / double(transactions) : 0.0;
  }
};

// ---------------------------------------------------------------------------
// DRAM device

/// Banks with open-page row buffers behind per-channel shared data buses.
/// Each bank serves its queue first-come first-served and stays occupied
/// until its burst finishes; the bus is granted in order of data readiness.
class DramDevice {
 public:
  using Callback = std::function<void(const Transaction&)>;

  DramDevice(DeviceKind kind, const DeviceTiming& timing, EventQueue& events);

  /// Issues `txn` at the current cycle. `done` runs at completion.
  void submit(Transaction txn, Callback done = {});

  const DeviceTiming& timing() const { return timing_; }
  DeviceKind kind() const { return kind_; }
  const DeviceLog& log() const { return log_; }

  /// Optional tap on every completed transaction (tests and reconciliation).
  void set_observer(std::function<void(const Transaction&)> obs) {
    observer_ = std::move(obs);
  }

 private:
  struct Pending {
    Transaction txn;
    Callback done;
  };
  struct Bank {
    std::optional<std::uint64_t> open_row;
    Cycle last_activate = 0;
    bool busy = false;
    Pending current;
    std::deque<Pending> queue;
  };
  struct Channel {
    Cycle bus_free = 0;
    std::vector<Bank> banks;
  };

  void start_next(std::uint32_t ch, std::uint32_t bank);
  void on_data_ready(std::uint32_t ch, std::uint32_t bank);
  void on_complete(std::uint32_t ch, std::uint32_t bank);

  DeviceKind kind_;
  DeviceTiming timing_;
  EventQueue& events_;
  std::vector<Channel> channels_;
  DeviceLog log_;
  std::function<void(const Transaction&)> observer_;
};

/// The DRAM cache and off-chip memory sharing one clock.
class TimingEngine {
 public:
  TimingEngine(const DeviceTiming& cache, const DeviceTiming& memory);

  EventQueue& events() { return events_; }
  Cycle now() const { return events_.now(); }
  DramDevice& cache() { return cache_; }
  DramDevice& memory() { return memory_; }
  DramDevice& device(DeviceKind k) {
    return k == DeviceKind::Cache ? cache_ : memory_;
  }

  /// Single-transaction service; `done` receives the completion cycle.
  void service(const Transaction& txn, std::function<void(Cycle)> done);

  /// Issues all `txns` now; `done` runs once with the latest completion.
  void parallel_fetch(const std::vector<Transaction>& txns,
                      std::function<void(Cycle)> done);

 private:
  EventQueue events_;
  DramDevice cache_;
  DramDevice memory_;
};

}  // namespace dcsim
