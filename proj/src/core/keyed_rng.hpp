#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace wmspde {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of
/// (counter, key); no internal state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Stream tags separating the independent noise sources under one seed.
enum class StreamTag : std::uint32_t {
  wiener = 1,
  scalar_driver = 2,
  l0_wiener = 3,
  l0_scale = 4,
};

/// SplitMix64 finaliser; used to derive per-path seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Counter-based generator of standard normals keyed by
/// (seed, tag, step, component). Every draw is a pure function of its key.
class KeyedNormal {
 public:
  KeyedNormal(std::uint64_t seed, StreamTag tag) noexcept;

  double operator()(std::uint64_t step, std::uint64_t component) const noexcept;

  /// Fills out[i] with the normal for (step, first + i).
  void fill(std::uint64_t step, std::uint64_t first, std::span<double> out) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  StreamTag tag() const noexcept { return tag_; }

 private:
  std::array<double, 2> pair(std::uint64_t step, std::uint64_t pair_index) const noexcept;

  std::uint64_t seed_;
  StreamTag tag_;
  std::array<std::uint32_t, 2> key_;
};

}  // namespace wmspde
