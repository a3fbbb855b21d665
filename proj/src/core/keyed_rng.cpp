#include "core/keyed_rng.hpp"

#include <cmath>
#include <numbers>

namespace wmspde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// Uniform in (0, 1], 53 bits; never returns 0 so log() is safe.
inline double to_unit_open_left(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

KeyedNormal::KeyedNormal(std::uint64_t seed, StreamTag tag) noexcept
    : seed_(seed),
      tag_(tag),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

std::array<double, 2> KeyedNormal::pair(std::uint64_t step, std::uint64_t pair_index) const noexcept {
  // Counter layout: [pair lo, pair hi | tag << 24, step lo, step hi].
  // Component indices stay far below 2^55, so the tag byte never collides.
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(pair_index),
      static_cast<std::uint32_t>(pair_index >> 32) ^ (static_cast<std::uint32_t>(tag_) << 24),
      static_cast<std::uint32_t>(step),
      static_cast<std::uint32_t>(step >> 32)};
  const auto r = philox4x32(ctr, key_);
  const double u1 = to_unit_open_left(r[0], r[1]);
  const double u2 = to_unit_open_left(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double KeyedNormal::operator()(std::uint64_t step, std::uint64_t component) const noexcept {
  return pair(step, component / 2)[component % 2];
}

void KeyedNormal::fill(std::uint64_t step, std::uint64_t first, std::span<double> out) const noexcept {
  std::size_t i = 0;
  std::uint64_t component = first;
  if (component % 2 == 1 && i < out.size()) {
    out[i++] = pair(step, component / 2)[1];
    ++component;
  }
  for (; i + 1 < out.size(); i += 2, component += 2) {
    const auto z = pair(step, component / 2);
    out[i] = z[0];
    out[i + 1] = z[1];
  }
  if (i < out.size()) out[i] = pair(step, component / 2)[0];
}

}  // namespace wmspde
