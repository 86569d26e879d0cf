#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcsim {

using Cycle = std::uint64_t;
using Addr = std::uint64_t;
using BlockId = std::uint64_t;

inline constexpr Addr kMaxAddr = Addr{1} << 48;

enum class Op : std::uint8_t { Read, Write };

/// Block/set/section arithmetic for one DRAM cache organization.
///
/// A section is `section_blocks` consecutive blocks that all land in the
/// same set; sections are interleaved over sets modulo `num_sets()`.
struct CacheGeometry {
  std::uint64_t block_size = 64;
  std::uint32_t ways_per_set = 16;
  std::uint64_t cache_capacity = 4ull << 20;
  std::uint32_t section_blocks = 16;  // always equal to ways_per_set
  std::uint32_t tag_size = 4;
  std::uint64_t row_size = 2048;

  std::uint64_t num_sets() const {
    return cache_capacity / (block_size * ways_per_set);
  }
  std::uint64_t set_bytes() const { return block_size * ways_per_set; }
  std::uint64_t batch_bytes() const {
    return std::uint64_t{ways_per_set} * tag_size;
  }
};

/// Returns one message per violated invariant, each prefixed with the
/// offending key name. Empty means valid.
std::vector<std::string> geometry_errors(const CacheGeometry& g);

/// Set-associative variant with `ways` data ways per set, the same number of
/// sets as `base`, and sections of `ways` blocks (tags share the data row).
CacheGeometry with_ways(const CacheGeometry& base, std::uint32_t ways);

/// One line per block; set_index is the direct-mapped line index.
CacheGeometry direct_mapped(const CacheGeometry& base);

struct BlockLocator {
  BlockId block_id = 0;
  std::uint64_t section_id = 0;
  std::uint64_t set_index = 0;
  std::uint32_t static_pos = 0;

  friend bool operator==(const BlockLocator&, const BlockLocator&) = default;
};

BlockLocator locate(Addr addr, const CacheGeometry& g);

/// How tags sit relative to data in the DRAM cache.
enum class TagLayout {
  SeparateBank,   // tag rows in a different bank from the set's data row
  SameRow,        // tags and data of a set share one row
  TagAndData,     // tag streams out with the data line (TAD)
};

struct BankLayout {
  std::uint32_t channels = 4;
  std::uint32_t banks = 16;
  TagLayout tags = TagLayout::SeparateBank;
};

struct Placement {
  std::uint32_t channel = 0;
  std::uint32_t data_bank = 0;
  std::uint64_t data_row = 0;
  std::uint32_t tag_channel = 0;
  std::uint32_t tag_bank = 0;
  std::uint64_t tag_row = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Number of sets (or TAD lines) stored per DRAM row under `layout`.
std::uint64_t units_per_row(const CacheGeometry& g, TagLayout layout);

/// Pure function of set_index. Under TagLayout::SeparateBank the tag row is
/// in a different bank from the data row and, when there is more than one
/// channel, on the next channel so both bursts can overlap.
Placement placement(std::uint64_t set_index, const CacheGeometry& g,
                    const BankLayout& layout);

inline Placement placement(const BlockLocator& loc, const CacheGeometry& g,
                           const BankLayout& layout) {
  return placement(loc.set_index, g, layout);
}

}  // namespace dcsim
