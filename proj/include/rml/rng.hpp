#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so matrix entries can be filled in any order or in
// parallel and still reproduce bit for bit.

#include <array>
#include <cstdint>

namespace rml {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;

  explicit constexpr Philox4x32(std::uint64_t key) noexcept
      : k0_(static_cast<std::uint32_t>(key)), k1_(static_cast<std::uint32_t>(key >> 32)) {}

  constexpr Counter operator()(Counter ctr) const noexcept {
    std::uint32_t k0 = k0_, k1 = k1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<std::uint32_t>(p0)};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  std::uint32_t k0_, k1_;
};

/// 52-bit uniform strictly inside (0, 1); the largest value is 1 - 2^-53.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Uniform for the (row, col, draw) cell of the stream keyed by `seed`.
inline double cell_uniform(std::uint64_t seed, std::uint32_t row, std::uint32_t col,
                           std::uint32_t draw = 0, std::uint32_t tag = 0) noexcept {
  const auto out = Philox4x32(seed)({row, col, draw, tag});
  return to_open_unit((std::uint64_t{out[0]} << 32) | out[1]);
}

/// Per-replica seed derived from a master seed. Injective in `replica` for a
/// fixed master (odd Weyl step followed by a bijective mixer).
constexpr std::uint64_t seed_stream(std::uint64_t master, std::uint64_t replica) noexcept {
  return mix64(mix64(master) + 0x9E3779B97F4A7C15ULL * (replica + 1));
}

/// Sequential draws from one keyed stream, e.g. bootstrap resampling.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed, std::uint32_t tag = 0) noexcept : gen_(seed), tag_(tag) {}

  std::uint64_t next_u64() noexcept {
    const auto out = gen_({static_cast<std::uint32_t>(count_), static_cast<std::uint32_t>(count_ >> 32), tag_,
                           0x5eedu});
    ++count_;
    return (std::uint64_t{out[0]} << 32) | out[1];
  }
  double next_uniform() noexcept { return to_open_unit(next_u64()); }
  /// Uniform index in [0, bound) via Lemire's multiply-shift (bias < 2^-32 for small bounds).
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  Philox4x32 gen_;
  std::uint32_t tag_;
  std::uint64_t count_ = 0;
};

}  // namespace rml
