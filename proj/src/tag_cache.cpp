#include "dcsim/tag_cache.hpp"

#include <algorithm>
#include <cassert>

namespace dcsim {

TagCache::TagCache(std::uint32_t num_entries, std::uint32_t assoc,
                   Cycle latency)
    : num_sets_(std::max<std::uint32_t>(1, num_entries / assoc)),
      assoc_(assoc),
      latency_(latency),
      slots_(static_cast<std::size_t>(num_sets_) * assoc) {
  assert(assoc > 0);
}

TagCache::Slot* TagCache::find(std::uint64_t key) {
  Slot* base = &slots_[static_cast<std::size_t>(set_of(key)) * assoc_];
  for (std::uint32_t i = 0; i < assoc_; ++i) {
    if (base[i].valid && base[i].key == key) return &base[i];
  }
  return nullptr;
}

const TagCache::Slot* TagCache::find(std::uint64_t key) const {
  return const_cast<TagCache*>(this)->find(key);
}

TagLookup TagCache::lookup(std::uint64_t key) {
  if (Slot* s = find(key)) {
    s->stamp = ++clock_;
    return TagLookup::Hit;
  }
  return in_flight(key) ? TagLookup::InFlight : TagLookup::Miss;
}

TagLookup TagCache::probe(std::uint64_t key) const {
  if (find(key)) return TagLookup::Hit;
  return in_flight(key) ? TagLookup::InFlight : TagLookup::Miss;
}

void TagCache::begin_fetch(std::uint64_t key) {
  assert(!resident(key));
  in_flight_.insert(key);
}

std::optional<TagCache::Evicted> TagCache::install(std::uint64_t key) {
  assert(!resident(key) && "double install of a resident batch");
  in_flight_.erase(key);

  Slot* base = &slots_[static_cast<std::size_t>(set_of(key)) * assoc_];
  Slot* victim = nullptr;
  for (std::uint32_t i = 0; i < assoc_; ++i) {
    if (!base[i].valid) {
      victim = &base[i];
      break;
    }
    if (victim == nullptr || base[i].stamp < victim->stamp) victim = &base[i];
  }

  std::optional<Evicted> evicted;
  if (victim->valid) {
    evicted = Evicted{victim->key, victim->modified};
  } else {
    ++occupancy_;
  }
  *victim = Slot{key, ++clock_, true, false};
  return evicted;
}

bool TagCache::mark_modified(std::uint64_t key) {
  if (Slot* s = find(key)) {
    s->modified = true;
    return true;
  }
  return false;
}

bool TagCache::writeback(std::uint64_t key) {
  Slot* s = find(key);
  if (s == nullptr || !s->modified) return false;
  s->modified = false;
  return true;
}

bool TagCache::resident(std::uint64_t key) const { return find(key) != nullptr; }

std::vector<std::uint64_t> TagCache::lru_order(std::uint32_t tc_set) const {
  std::vector<const Slot*> live;
  const Slot* base = &slots_[static_cast<std::size_t>(tc_set) * assoc_];
  for (std::uint32_t i = 0; i < assoc_; ++i) {
    if (base[i].valid) live.push_back(&base[i]);
  }
  std::sort(live.begin(), live.end(),
            [](const Slot* a, const Slot* b) { return a->stamp > b->stamp; });
  std::vector<std::uint64_t> keys;
  keys.reserve(live.size());
  for (const Slot* s : live) keys.push_back(s->key);
  return keys;
}

}  // namespace dcsim
