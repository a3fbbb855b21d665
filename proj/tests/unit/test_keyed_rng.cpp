#include "core/keyed_rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace wmspde;

TEST(Philox, KnownAnswerZeroKey) {
  // Random123 reference vector for philox4x32_10 with zero counter and key.
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(KeyedNormal, PureFunctionOfKey) {
  const KeyedNormal a(42, StreamTag::wiener), b(42, StreamTag::wiener);
  for (std::uint64_t s = 0; s < 10; ++s)
    for (std::uint64_t c = 0; c < 7; ++c) EXPECT_EQ(a(s, c), b(s, c));
  // order of evaluation does not matter
  const double late = a(1000, 3);
  EXPECT_EQ(a(1000, 3), late);
}

TEST(KeyedNormal, FillMatchesPointwise) {
  const KeyedNormal n(7, StreamTag::wiener);
  for (std::uint64_t first : {0u, 1u, 5u}) {
    std::vector<double> out(11);
    n.fill(3, first, out);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], n(3, first + i));
  }
}

TEST(KeyedNormal, TagsAndSeedsSeparateStreams) {
  const KeyedNormal w(1, StreamTag::wiener), d(1, StreamTag::scalar_driver), other(2, StreamTag::wiener);
  int same_tag = 0, same_seed = 0;
  for (std::uint64_t c = 0; c < 100; ++c) {
    same_tag += w(0, c) == d(0, c);
    same_seed += w(0, c) == other(0, c);
  }
  EXPECT_EQ(same_tag, 0);
  EXPECT_EQ(same_seed, 0);
}

TEST(KeyedNormal, FirstTwoMomentsAndCorrelation) {
  const KeyedNormal n(2024, StreamTag::wiener);
  const int count = 200000;
  double sum = 0, sq = 0, cross = 0, fourth = 0;
  for (int i = 0; i < count; ++i) {
    const double x = n(static_cast<std::uint64_t>(i), 0), y = n(static_cast<std::uint64_t>(i), 1);
    sum += x;
    sq += x * x;
    fourth += x * x * x * x;
    cross += x * y;
  }
  const double se = 1.0 / std::sqrt(count);
  EXPECT_NEAR(sum / count, 0.0, 4 * se);
  EXPECT_NEAR(sq / count, 1.0, 4 * std::sqrt(2.0) * se);
  EXPECT_NEAR(fourth / count, 3.0, 4 * std::sqrt(96.0) * se);
  EXPECT_NEAR(cross / count, 0.0, 4 * se);
}

TEST(MixSeed, DistinctAndDeterministic) {
  EXPECT_EQ(mix_seed(1, 0), mix_seed(1, 0));
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
}
