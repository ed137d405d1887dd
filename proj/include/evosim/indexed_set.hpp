#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace evosim {

/// Set of small integer ids in [0, capacity) with O(1) insert, erase and uniform
/// sampling. Members live in a dense array; a position map supports swap-remove.
class IndexedSet {
 public:
  static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

  IndexedSet() = default;
  explicit IndexedSet(std::size_t capacity) : pos_(capacity, kAbsent) {}

  void reset(std::size_t capacity) {
    items_.clear();
    pos_.assign(capacity, kAbsent);
  }

  void grow(std::size_t capacity) {
    if (capacity > pos_.size()) pos_.resize(capacity, kAbsent);
  }

  bool contains(std::uint32_t id) const { return pos_[id] != kAbsent; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  bool insert(std::uint32_t id) {
    if (pos_[id] != kAbsent) return false;
    pos_[id] = static_cast<std::uint32_t>(items_.size());
    items_.push_back(id);
    return true;
  }

  bool erase(std::uint32_t id) {
    const std::uint32_t at = pos_[id];
    if (at == kAbsent) return false;
    const std::uint32_t last = items_.back();
    items_[at] = last;
    pos_[last] = at;
    items_.pop_back();
    pos_[id] = kAbsent;
    return true;
  }

  std::uint32_t at(std::size_t i) const { return items_[i]; }

  template <class R>
  std::uint32_t sample(R& rng) const {
    return items_[rng.index(items_.size())];
  }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<std::uint32_t> items_;
  std::vector<std::uint32_t> pos_;
};

}  // namespace evosim
