#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dcsim/geometry.hpp"

namespace dcsim {

enum class BlockType : std::uint8_t { Leading, Following };

inline const char* to_string(BlockType t) {
  return t == BlockType::Leading ? "L" : "F";
}

inline constexpr std::uint8_t kFilterMax = 3;

/// One tag of a set. `priority` is the H bit and doubles as the stored
/// block type (1 = leading). `last_seen` and `run_length` are simulator
/// bookkeeping for the type observed on the block's recent reads; the
/// type-variation filter is driven by them so that a reserved block (H held
/// at 1) still sees its following run.
struct TagEntry {
  BlockId block_id = 0;
  bool valid = false;
  bool dirty = false;
  bool ref = false;       // A
  bool priority = false;  // H
  std::uint8_t filter = 0;  // C, two bits
  BlockType last_seen = BlockType::Following;
  std::uint16_t run_length = 0;  // consecutive reads of type last_seen

  BlockType stored_type() const {
    return priority ? BlockType::Leading : BlockType::Following;
  }
};

/// Mutable view of one set: its ways and the persistent CLOCK hand.
struct SetView {
  std::span<TagEntry> ways;
  std::uint32_t* hand;

  std::size_t size() const { return ways.size(); }
  TagEntry& operator[](std::size_t i) const { return ways[i]; }

  std::optional<std::uint32_t> find(BlockId block) const {
    for (std::uint32_t w = 0; w < ways.size(); ++w) {
      if (ways[w].valid && ways[w].block_id == block) return w;
    }
    return std::nullopt;
  }
};

/// Authoritative tag contents for every set (the in-DRAM tag rows). The
/// tag cache only tracks which batches are on chip; bit updates land here.
class TagStore {
 public:
  TagStore(std::uint64_t num_sets, std::uint32_t ways)
      : ways_(ways), entries_(num_sets * ways), hands_(num_sets, 0) {}

  SetView set(std::uint64_t set_index) {
    return SetView{std::span<TagEntry>(entries_.data() + set_index * ways_,
                                       ways_),
                   &hands_[set_index]};
  }

  std::uint64_t num_sets() const { return hands_.size(); }
  std::uint32_t ways() const { return ways_; }

 private:
  std::uint32_t ways_;
  std::vector<TagEntry> entries_;
  std::vector<std::uint32_t> hands_;
};

}  // namespace dcsim
