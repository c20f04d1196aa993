#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hetscreen {

/// Dense fixed-length bit vector over dataset rows.
class Bitset {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t word_bits = 64;

  Bitset() = default;
  explicit Bitset(std::size_t n, bool value = false)
      : size_(n), words_((n + word_bits - 1) / word_bits, value ? ~word_type{0} : word_type{0}) {
    trim();
  }

  std::size_t size() const noexcept { return size_; }
  std::span<const word_type> words() const noexcept { return words_; }

  void set(std::size_t i) noexcept { words_[i / word_bits] |= word_type{1} << (i % word_bits); }
  void reset(std::size_t i) noexcept { words_[i / word_bits] &= ~(word_type{1} << (i % word_bits)); }
  bool test(std::size_t i) const noexcept { return (words_[i / word_bits] >> (i % word_bits)) & 1U; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  Bitset& operator&=(const Bitset& other) noexcept {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
  }
  friend Bitset operator&(Bitset a, const Bitset& b) noexcept { return a &= b; }

  Bitset operator~() const {
    Bitset out = *this;
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }

  friend bool operator==(const Bitset&, const Bitset&) = default;

  /// |a ∩ b| without materializing the intersection. Sizes must match.
  friend std::size_t intersect_count(const Bitset& a, const Bitset& b) noexcept {
    std::size_t n = 0;
    for (std::size_t w = 0; w < a.words_.size(); ++w)
      n += static_cast<std::size_t>(std::popcount(a.words_[w] & b.words_[w]));
    return n;
  }

  /// Calls f(i) for every set bit in increasing order.
  template <typename F>
  void for_each_set(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      word_type bits = words_[w];
      while (bits) {
        const auto off = static_cast<std::size_t>(std::countr_zero(bits));
        f(w * word_bits + off);
        bits &= bits - 1;
      }
    }
  }

  /// Sum of values[i] over set bits i, accumulated in row order.
  double masked_sum(std::span<const double> values) const noexcept {
    double s = 0.0;
    for_each_set([&](std::size_t i) { s += values[i]; });
    return s;
  }

  std::size_t hash() const noexcept {
    std::size_t h = std::hash<std::size_t>{}(size_);
    for (auto w : words_) h ^= std::hash<word_type>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  void trim() noexcept {
    if (const auto tail = size_ % word_bits; tail != 0 && !words_.empty())
      words_.back() &= (word_type{1} << tail) - 1;
  }

  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

}  // namespace hetscreen
