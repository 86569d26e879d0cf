#include "dcsim/policy.hpp"

#include <algorithm>
#include <cassert>

namespace dcsim {

std::uint8_t filter_update(std::uint8_t counter, FilterEvent event) {
  assert(counter <= kFilterMax);
  switch (event) {
    case FilterEvent::FollowingToLeading:
      return static_cast<std::uint8_t>(std::min<int>(counter + 2, kFilterMax));
    case FilterEvent::FollowingToFollowing:
      return counter == 0 ? 0 : static_cast<std::uint8_t>(counter - 1);
    case FilterEvent::FromLeading:
      return counter;
  }
  return counter;
}

const char* to_string(MappingAction a) {
  switch (a) {
    case MappingAction::None: return "none";
    case MappingAction::ClearPriority: return "clear_H";
    case MappingAction::KeepPriority: return "keep_H";
    case MappingAction::SetPriority: return "set_H";
    case MappingAction::ClearRefAtStatic: return "clear_ref_at_static";
    case MappingAction::Migrate: return "migrate";
  }
  return "?";
}

MappingResult apply_mapping_policy(SetView set, std::uint32_t way,
                                   std::uint32_t static_pos,
                                   BlockType last_type, BlockType current,
                                   bool keep_priority) {
  assert(way < set.size() && static_pos < set.size());
  assert(set[way].valid);
  MappingResult r;
  r.way = way;

  if (last_type == BlockType::Leading && current == BlockType::Following) {
    if (keep_priority) {
      r.action = MappingAction::KeepPriority;
    } else {
      set[way].priority = false;
      r.action = MappingAction::ClearPriority;
    }
    return r;
  }
  if (!(last_type == BlockType::Following && current == BlockType::Leading)) {
    return r;
  }

  if (way == static_pos) {
    set[way].priority = true;
    r.action = MappingAction::SetPriority;
    return r;
  }

  TagEntry& occupant = set[static_pos];
  if (occupant.valid && occupant.priority && occupant.ref) {
    occupant.ref = false;
    r.action = MappingAction::ClearRefAtStatic;
    return r;
  }

  if (occupant.valid) r.evicted = occupant;
  occupant = set[way];
  occupant.priority = true;
  set[way] = TagEntry{};
  r.action = MappingAction::Migrate;
  r.way = static_pos;
  return r;
}

namespace {

std::optional<std::uint32_t> first_invalid(const SetView& set) {
  for (std::uint32_t w = 0; w < set.size(); ++w) {
    if (!set[w].valid) return w;
  }
  return std::nullopt;
}

// Sweeps from the hand over ways accepted by `in_range`, clearing A, until
// one with A = 0 is found. The caller guarantees termination (some way in
// range has A = 0, or the range is the whole set).
template <typename InRange>
std::uint32_t sweep(SetView set, InRange in_range) {
  const auto n = static_cast<std::uint32_t>(set.size());
  std::uint32_t w = *set.hand % n;
  for (;;) {
    if (in_range(set[w])) {
      if (!set[w].ref) {
        *set.hand = (w + 1) % n;
        return w;
      }
      set[w].ref = false;
    }
    w = (w + 1) % n;
  }
}

}  // namespace

std::uint32_t rv_clock_victim(SetView set) {
  if (auto w = first_invalid(set)) return *w;
  const bool cold_following = std::any_of(
      set.ways.begin(), set.ways.end(),
      [](const TagEntry& e) { return !e.priority && !e.ref; });
  if (cold_following) {
    return sweep(set, [](const TagEntry& e) { return !e.priority; });
  }
  return sweep(set, [](const TagEntry&) { return true; });
}

std::uint32_t clock_victim(SetView set) {
  if (auto w = first_invalid(set)) return *w;
  return sweep(set, [](const TagEntry&) { return true; });
}

std::optional<TagEntry> install_block(SetView set, std::uint32_t way,
                                      BlockId block, BlockType type) {
  std::optional<TagEntry> old;
  if (set[way].valid) old = set[way];
  TagEntry e;
  e.block_id = block;
  e.valid = true;
  e.ref = true;
  e.priority = type == BlockType::Leading;
  e.last_seen = type;
  e.run_length = 1;
  set[way] = e;
  return old;
}

}  // namespace dcsim
