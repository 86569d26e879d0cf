#pragma once

#include <cstdint>
#include <optional>

#include "dcsim/tag_cache.hpp"
#include "dcsim/tag_store.hpp"

namespace dcsim {

/// Leading iff the set's batch is neither resident nor being fetched.
inline BlockType classify(TagLookup state) {
  return state == TagLookup::Miss ? BlockType::Leading : BlockType::Following;
}

// ---------------------------------------------------------------------------
// Type-variation filter

enum class FilterEvent : std::uint8_t {
  FollowingToLeading,
  FollowingToFollowing,
  FromLeading,  // L->L and L->F: the counter is held
};

inline FilterEvent filter_event(BlockType last, BlockType current) {
  if (last == BlockType::Leading) return FilterEvent::FromLeading;
  return current == BlockType::Leading ? FilterEvent::FollowingToLeading
                                       : FilterEvent::FollowingToFollowing;
}

/// Two-bit saturating update: +2 on F->L, -1 on F->F, held otherwise.
std::uint8_t filter_update(std::uint8_t counter, FilterEvent event);

/// The filter identifies a block as unstable when it returns to leading
/// with a non-zero counter.
inline bool filter_flags(std::uint8_t counter_before, FilterEvent event) {
  return event == FilterEvent::FollowingToLeading && counter_before != 0;
}

/// Whether a leading->following downgrade keeps H = 1.
inline bool priority_reservation(std::uint8_t counter) { return counter != 0; }

// ---------------------------------------------------------------------------
// Mapping policy

enum class MappingAction : std::uint8_t {
  None,
  ClearPriority,     // L->F: H := 0
  KeepPriority,      // L->F with the downgrade suppressed by reservation
  SetPriority,       // F->L already at the static position: H := 1
  ClearRefAtStatic,  // F->L, static slot holds a referenced leading block
  Migrate,           // F->L: move to the static position
};

const char* to_string(MappingAction a);

struct MappingResult {
  MappingAction action = MappingAction::None;
  std::uint32_t way = 0;  // where the accessed block lives afterwards
  std::optional<TagEntry> evicted;  // occupant displaced by a migration
};

/// Applies the leading/following transition rules to the block at `way`.
/// `last_type` is the stored type (H bit) before this access and
/// `keep_priority` the reservation verdict used on L->F.
MappingResult apply_mapping_policy(SetView set, std::uint32_t way,
                                   std::uint32_t static_pos,
                                   BlockType last_type, BlockType current,
                                   bool keep_priority);

// ---------------------------------------------------------------------------
// Victim selection

/// Range-variable CLOCK. Returns the first invalid way if any. Otherwise,
/// while some following way (H = 0) has A = 0, CLOCK runs over following
/// ways only and leading ways are skipped untouched; once every following
/// way is referenced, CLOCK runs over the whole set. Passed ways have A
/// cleared; the hand stops one past the victim.
std::uint32_t rv_clock_victim(SetView set);

/// Plain CLOCK over the whole set (first invalid way first).
std::uint32_t clock_victim(SetView set);

/// Leading blocks always fill their static position.
inline std::uint32_t leading_fill_victim(std::uint32_t static_pos) {
  return static_pos;
}

/// Overwrites `way` with a fresh block (A = 1, C = 0, H = 1 iff leading)
/// and returns the valid occupant it replaced.
std::optional<TagEntry> install_block(SetView set, std::uint32_t way,
                                      BlockId block, BlockType type);

}  // namespace dcsim
