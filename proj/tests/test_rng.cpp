#include <gtest/gtest.h>

#include <cmath>

#include "terra/rng.hpp"

using namespace terra;

TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Uniform, OpenClosedRange) {
  EXPECT_GT(uniform_open_closed(0, 0), 0.0);
  EXPECT_EQ(uniform_open_closed(0xffffffffu, 0xffffffffu), 1.0);
}

TEST(NormalPair, MomentsAndIndependence) {
  const int n = 200000;
  double s1 = 0, s2 = 0, s12 = 0, q1 = 0;
  for (int i = 0; i < n; ++i) {
    const NormalPair z = normal_pair(42, 3, static_cast<std::uint64_t>(i));
    s1 += z.first;
    s2 += z.second;
    q1 += z.first * z.first;
    s12 += z.first * z.second;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 0.0, 0.01);
  EXPECT_NEAR(q1 / n, 1.0, 0.015);
  EXPECT_NEAR(s12 / n, 0.0, 0.01);
}

TEST(NormalPair, PureFunctionOfAddress) {
  const NormalPair a = normal_pair(7, 11, 13);
  const NormalPair b = normal_pair(7, 11, 13);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
  EXPECT_NE(normal_pair(7, 12, 13).first, a.first);
  EXPECT_NE(normal_pair(8, 11, 13).first, a.first);
}
