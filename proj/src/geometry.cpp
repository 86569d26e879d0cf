#include "dcsim/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

namespace dcsim {

namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && std::has_single_bit(v); }

// Bytes one set (or line) occupies inside a data row.
std::uint64_t unit_bytes(const CacheGeometry& g, TagLayout layout) {
  switch (layout) {
    case TagLayout::SeparateBank:
      return g.set_bytes();
    case TagLayout::SameRow:
      return g.set_bytes() + g.batch_bytes();
    case TagLayout::TagAndData:
      // 64 B of data plus the tag-and-metadata word that rides with it.
      return g.block_size + 2 * std::uint64_t{g.tag_size};
  }
  return g.set_bytes();
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return (a + b - 1) / b;
}

}  // namespace

std::vector<std::string> geometry_errors(const CacheGeometry& g) {
  std::vector<std::string> errs;
  if (!is_pow2(g.block_size)) {
    errs.push_back("geometry.block_size: must be a power of two");
  }
  if (g.ways_per_set == 0) {
    errs.push_back("geometry.ways: must be positive");
  }
  if (g.section_blocks != g.ways_per_set) {
    errs.push_back("geometry.section_blocks: must equal ways_per_set");
  }
  if (g.tag_size == 0) {
    errs.push_back("geometry.tag_size: must be positive");
  }
  if (g.block_size != 0 && g.ways_per_set != 0) {
    const std::uint64_t set_bytes = g.set_bytes();
    if (g.cache_capacity == 0 || g.cache_capacity % set_bytes != 0) {
      errs.push_back(
          "geometry.cache_capacity: must be a positive multiple of "
          "block_size * ways");
    }
    if (g.row_size == 0 || g.row_size % g.block_size != 0) {
      errs.push_back("geometry.row_size: must be a multiple of block_size");
    } else if (g.row_size % set_bytes != 0 && set_bytes % g.row_size != 0) {
      errs.push_back(
          "geometry.row_size: must hold an integral number of sets or an "
          "integral number of rows per set");
    }
  }
  return errs;
}

CacheGeometry with_ways(const CacheGeometry& base, std::uint32_t ways) {
  CacheGeometry g = base;
  g.ways_per_set = ways;
  // One run of `ways` consecutive blocks per set, so a set can hold its
  // whole section.
  g.section_blocks = ways;
  g.cache_capacity = base.num_sets() * base.block_size * ways;
  return g;
}

CacheGeometry direct_mapped(const CacheGeometry& base) {
  CacheGeometry g = base;
  g.ways_per_set = 1;
  g.section_blocks = 1;
  return g;
}

BlockLocator locate(Addr addr, const CacheGeometry& g) {
  assert(addr < kMaxAddr);
  BlockLocator loc;
  loc.block_id = addr >> std::countr_zero(g.block_size);
  loc.section_id = loc.block_id / g.section_blocks;
  loc.set_index = loc.section_id % g.num_sets();
  loc.static_pos = static_cast<std::uint32_t>(loc.block_id % g.ways_per_set);
  return loc;
}

std::uint64_t units_per_row(const CacheGeometry& g, TagLayout layout) {
  return std::max<std::uint64_t>(1, g.row_size / unit_bytes(g, layout));
}

Placement placement(std::uint64_t set_index, const CacheGeometry& g,
                    const BankLayout& layout) {
  const std::uint64_t per_row = units_per_row(g, layout.tags);
  const std::uint64_t channels = layout.channels;
  const std::uint64_t banks = layout.banks;

  Placement p;
  p.channel = static_cast<std::uint32_t>(set_index % channels);
  const std::uint64_t local = set_index / channels;
  const std::uint64_t row_local = local / per_row;
  p.data_bank = static_cast<std::uint32_t>(row_local % banks);
  p.data_row = row_local / banks;

  if (layout.tags != TagLayout::SeparateBank) {
    p.tag_channel = p.channel;
    p.tag_bank = p.data_bank;
    p.tag_row = p.data_row;
    return p;
  }

  // One tag row holds the batches of `batches_per_row` sets, i.e. the sets
  // of `rows_covered` consecutive data rows of one bank. It lives in the
  // next bank of the next channel, above that bank's own data rows.
  const std::uint64_t batches_per_row =
      std::max<std::uint64_t>(1, g.row_size / g.batch_bytes());
  const std::uint64_t rows_covered =
      std::max<std::uint64_t>(1, batches_per_row / per_row);
  const std::uint64_t sets_per_channel = ceil_div(g.num_sets(), channels);
  const std::uint64_t data_rows_per_bank =
      ceil_div(ceil_div(sets_per_channel, per_row), banks);

  p.tag_channel = static_cast<std::uint32_t>((p.channel + 1) % channels);
  p.tag_bank = static_cast<std::uint32_t>((p.data_bank + 1) % banks);
  p.tag_row = data_rows_per_bank + p.data_row / rows_covered;
  return p;
}

}  // namespace dcsim
