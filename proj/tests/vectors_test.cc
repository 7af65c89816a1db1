//
// Copyright 2026 The Stosign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include "stosign/vectors.h"

#include <cmath>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace stosign {
namespace {

std::vector<int8_t> SignValues(const SignVector& s) {
  return {s.values().begin(), s.values().end()};
}

using ::testing::ElementsAre;

SignVector Signs(std::vector<int8_t> v) { return *SignVector::FromValues(v); }

TEST(SignVectorTest, RejectsValuesOtherThanPlusMinusOne) {
  EXPECT_FALSE(SignVector::FromValues({1, 0, -1}).ok());
  EXPECT_FALSE(SignVector::FromValues({2}).ok());
  EXPECT_TRUE(SignVector::FromValues({1, -1}).ok());
}

TEST(SignVectorTest, FillNormalizesToPlusMinusOne) {
  SignVector s(3, -1);
  EXPECT_THAT(SignValues(s), ElementsAre(-1, -1, -1));
  SignVector t(2);
  EXPECT_THAT(SignValues(t), ElementsAre(1, 1));
}

TEST(GradientTest, ValidateRejectsNonFinite) {
  EXPECT_TRUE(ValidateGradient(std::vector<double>{1.0, -2.0}).ok());
  EXPECT_FALSE(ValidateGradient(std::vector<double>{1.0, NAN}).ok());
  EXPECT_FALSE(ValidateGradient(std::vector<double>{INFINITY}).ok());
}

TEST(PackSignsTest, AllPositiveIsFF) {
  EXPECT_THAT(PackSigns(SignVector(8, 1)), ElementsAre(0xFF));
}

TEST(PackSignsTest, AllNegativeIsZero) {
  EXPECT_THAT(PackSigns(SignVector(8, -1)), ElementsAre(0x00));
}

TEST(PackSignsTest, LeastSignificantBitFirst) {
  EXPECT_THAT(PackSigns(Signs({1, -1, 1})), ElementsAre(0x05));
  EXPECT_EQ(PayloadBits(3), 3u);
}

TEST(PackSignsTest, SecondByte) {
  std::vector<int8_t> v(10, -1);
  v[9] = 1;
  EXPECT_THAT(PackSigns(Signs(v)), ElementsAre(0x00, 0x02));
}

TEST(UnpackSignsTest, Examples) {
  const uint8_t five[] = {0x05};
  EXPECT_THAT(SignValues(*UnpackSigns(five, 3)), ElementsAre(1, -1, 1));
  const uint8_t ff[] = {0xFF};
  EXPECT_EQ(*UnpackSigns(ff, 8), SignVector(8, 1));
  const uint8_t zero[] = {0x00};
  EXPECT_THAT(SignValues(*UnpackSigns(zero, 1)), ElementsAre(-1));
}

TEST(UnpackSignsTest, LengthMismatchIsAnError) {
  const uint8_t two[] = {0x00, 0x00};
  EXPECT_FALSE(UnpackSigns(two, 8).ok());
  EXPECT_FALSE(UnpackSigns(two, 17).ok());
  EXPECT_TRUE(UnpackSigns(two, 9).ok());
  EXPECT_TRUE(UnpackSigns({}, 0).ok());
}

TEST(CodecPropertyTest, RoundTripOverRandomLengths) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t d = rng() % 10001;
    std::vector<int8_t> v(d);
    for (int8_t& x : v) x = (rng() & 1) ? 1 : -1;
    const SignVector s = Signs(v);
    const std::vector<uint8_t> bytes = PackSigns(s);
    ASSERT_EQ(bytes.size(), (d + 7) / 8);
    ASSERT_EQ(bytes.size(), PackedSize(d));
    if (d % 8 != 0) {
      ASSERT_EQ(bytes.back() >> (d % 8), 0) << "pad bits must be zero";
    }
    absl::StatusOr<SignVector> back = UnpackSigns(bytes, d);
    ASSERT_TRUE(back.ok());
    ASSERT_EQ(*back, s);
  }
}

TEST(RngStreamTest, SamePathSameSequence) {
  RngStream a = DeriveStream(42, 3, 1, StreamPurpose::kCompress);
  RngStream b = DeriveStream(42, 3, 1, StreamPurpose::kCompress);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStreamTest, PurposeSeparatesStreams) {
  RngStream a = DeriveStream(42, 1, 1, 0);
  RngStream b = DeriveStream(42, 1, 1, 1);
  int same = 0;
  for (int i = 0; i < 1000; ++i) same += a() == b();
  EXPECT_EQ(same, 0);
}

TEST(RngStreamTest, NeighbouringWorkersAreUncorrelated) {
  RngStream a = DeriveStream(42, 1, 1, StreamPurpose::kCompress);
  RngStream b = DeriveStream(42, 1, 2, StreamPurpose::kCompress);
  const int n = 100000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.Uniform();
    const double y = b.Uniform();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double var_a = saa / n - (sa / n) * (sa / n);
  const double var_b = sbb / n - (sb / n) * (sb / n);
  EXPECT_LT(std::abs(cov / std::sqrt(var_a * var_b)), 0.01);
}

TEST(RngStreamTest, UniformIsInUnitInterval) {
  RngStream a = DeriveStream(1, 0, 0, 0);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = a.Uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

}  // namespace
}  // namespace stosign
