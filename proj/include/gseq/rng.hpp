#ifndef GSEQ_RNG_HPP
#define GSEQ_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace gseq {

// SplitMix64 output finalizer (Steele, Lea & Flood / Vigna).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Folds a tuple of key words into a stream key. Distinct tuples give
// statistically independent streams; no coordination between workers needed.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x8BADF00D5CA1AB1EULL;
  for (std::uint64_t w : words) h = mix64((h + kGoldenGamma) ^ w);
  return h;
}

// Counter-mode SplitMix64. The i-th draw is mix64(key + (i+1)*gamma): a pure
// function of (key, i), so any replicate's stream can be replayed in isolation
// regardless of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) noexcept : state_(key) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform on [0,1) with 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0,1); safe to feed through quantile
  // functions that diverge at the endpoints.
  double next_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), debiased (Lemire multiply-shift with
  // rejection).
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    using u128 = unsigned __int128;
    u128 m = static_cast<u128>(next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        m = static_cast<u128>(next_u64()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace gseq

#endif
