#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "dcsim/geometry.hpp"

namespace dcsim {

enum class TagLookup { Hit, Miss, InFlight };

/// On-chip SRAM cache of tag batches, keyed by set index (or by line index
/// for the direct-mapped design). Set-associative with exact LRU.
///
/// A key is in exactly one of three states: absent, in flight (fetch
/// issued, batch not yet arrived) or resident. Only resident keys occupy
/// slots.
class TagCache {
 public:
  struct Evicted {
    std::uint64_t key;
    bool modified;
  };

  TagCache(std::uint32_t num_entries, std::uint32_t assoc, Cycle latency);

  /// Hit refreshes recency. Never mutates slot contents otherwise.
  TagLookup lookup(std::uint64_t key);
  /// Same classification as lookup() without touching recency.
  TagLookup probe(std::uint64_t key) const;

  void begin_fetch(std::uint64_t key);

  /// Makes `key` resident as most recently used. The key must not already
  /// be resident. Returns the LRU victim of its tag-cache set, if any.
  std::optional<Evicted> install(std::uint64_t key);

  /// Marks a resident batch as holding bits newer than the tag row.
  /// Returns false when the key is not resident.
  bool mark_modified(std::uint64_t key);

  /// Clears the modified flag; true when a tag-row write is owed.
  bool writeback(std::uint64_t key);

  bool resident(std::uint64_t key) const;
  bool in_flight(std::uint64_t key) const { return in_flight_.count(key) != 0; }

  /// Resident keys of one tag-cache set, most recently used first.
  std::vector<std::uint64_t> lru_order(std::uint32_t tc_set) const;

  std::uint32_t set_of(std::uint64_t key) const {
    return static_cast<std::uint32_t>(key % num_sets_);
  }
  std::uint32_t num_sets() const { return num_sets_; }
  std::uint32_t assoc() const { return assoc_; }
  std::uint32_t capacity() const { return num_sets_ * assoc_; }
  std::uint64_t occupancy() const { return occupancy_; }
  Cycle latency() const { return latency_; }

 private:
  struct Slot {
    std::uint64_t key = 0;
    std::uint64_t stamp = 0;
    bool valid = false;
    bool modified = false;
  };

  Slot* find(std::uint64_t key);
  const Slot* find(std::uint64_t key) const;

  std::uint32_t num_sets_;
  std::uint32_t assoc_;
  Cycle latency_;
  std::vector<Slot> slots_;
  std::unordered_set<std::uint64_t> in_flight_;
  std::uint64_t clock_ = 0;
  std::uint64_t occupancy_ = 0;
};

}  // namespace dcsim
