#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace z2z::detail {

// Open-addressing map from (parent node, token) to child node. Linear probing,
// power-of-two capacity, load factor kept under 1/2. Insert-only apart from
// clear(), which keeps the allocation so per-window resets stay cheap.
class FlatEdgeMap {
 public:
  FlatEdgeMap() { rehash(64); }

  static std::uint64_t key(std::uint32_t parent, std::uint32_t token) noexcept {
    return (static_cast<std::uint64_t>(parent) << 32) | token;
  }

  std::optional<std::uint32_t> find(std::uint32_t parent, std::uint32_t token) const noexcept {
    const std::uint64_t k = key(parent, token);
    for (std::size_t i = slot(k);; i = (i + 1) & mask_) {
      const Slot& s = slots_[i];
      if (s.key == k) return s.value;
      if (s.key == kEmpty) return std::nullopt;
    }
  }

  // Caller guarantees the key is absent.
  void insert(std::uint32_t parent, std::uint32_t token, std::uint32_t child) {
    if ((size_ + 1) * 2 > slots_.size()) rehash(slots_.size() * 2);
    place(key(parent, token), child);
    ++size_;
  }

  void clear() noexcept {
    if (size_ == 0) return;
    for (auto& s : slots_) s.key = kEmpty;
    size_ = 0;
  }

  std::size_t size() const noexcept { return size_; }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

  struct Slot {
    std::uint64_t key = kEmpty;
    std::uint32_t value = 0;
  };

  std::size_t slot(std::uint64_t k) const noexcept {
    return static_cast<std::size_t>((k * 0x9E3779B97F4A7C15ull) >> shift_);
  }

  void place(std::uint64_t k, std::uint32_t v) noexcept {
    std::size_t i = slot(k);
    while (slots_[i].key != kEmpty) i = (i + 1) & mask_;
    slots_[i] = Slot{k, v};
  }

  void rehash(std::size_t capacity) {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(capacity, Slot{});
    mask_ = capacity - 1;
    shift_ = 64;
    for (std::size_t c = capacity; c > 1; c >>= 1) --shift_;
    for (const Slot& s : old) {
      if (s.key != kEmpty) place(s.key, s.value);
    }
  }

  std::vector<Slot> slots_;
  std::size_t size_ = 0;
  std::size_t mask_ = 0;
  unsigned shift_ = 64;
};

}  // namespace z2z::detail
