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


#include "stosign/kernels.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace stosign::kernels {
namespace {

std::vector<size_t> Lengths() {
  std::vector<size_t> out;
  for (size_t d = 0; d <= 300; ++d) out.push_back(d);
  for (size_t d : {1023, 1024, 1025, 4099, 65536 + 13}) out.push_back(d);
  return out;
}

std::vector<int8_t> RandomSigns(size_t d, std::mt19937_64& rng) {
  std::vector<int8_t> s(d);
  for (int8_t& v : s) v = (rng() & 1) ? 1 : -1;
  return s;
}

class KernelEquivalenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    simd_ = Avx2Kernels();
    if (simd_ == nullptr) GTEST_SKIP() << "no AVX2 kernels on this machine";
  }

  const KernelTable& scalar_ = ScalarKernels();
  const KernelTable* simd_ = nullptr;
  std::mt19937_64 rng_{20260417};
};

TEST_F(KernelEquivalenceTest, PackAndUnpack) {
  for (size_t d : Lengths()) {
    std::vector<int8_t> s = RandomSigns(d, rng_);
    std::vector<uint8_t> a((d + 7) / 8, 0xAB), b((d + 7) / 8, 0xCD);
    scalar_.pack_signs(s.data(), d, a.data());
    simd_->pack_signs(s.data(), d, b.data());
    ASSERT_EQ(a, b) << "d=" << d;

    std::vector<int8_t> ua(d, 0), ub(d, 0);
    scalar_.unpack_signs(a.data(), d, ua.data());
    simd_->unpack_signs(a.data(), d, ub.data());
    ASSERT_EQ(ua, s) << "d=" << d;
    ASSERT_EQ(ub, s) << "d=" << d;
  }
}

TEST_F(KernelEquivalenceTest, UnpackIgnoresNothingButPadBits) {
  // Arbitrary bytes, including set pad bits, decode the same on both paths.
  for (size_t d : Lengths()) {
    std::vector<uint8_t> bytes((d + 7) / 8);
    for (uint8_t& v : bytes) v = static_cast<uint8_t>(rng_());
    std::vector<int8_t> ua(d), ub(d);
    scalar_.unpack_signs(bytes.data(), d, ua.data());
    simd_->unpack_signs(bytes.data(), d, ub.data());
    ASSERT_EQ(ua, ub) << "d=" << d;
  }
}

TEST_F(KernelEquivalenceTest, VoteTallies) {
  for (size_t d : Lengths()) {
    std::vector<int32_t> ta(d), tb(d);
    for (size_t i = 0; i < d; ++i)
      ta[i] = tb[i] = static_cast<int32_t>(rng_() % 7) - 3;
    for (int m = 0; m < 5; ++m) {
      std::vector<int8_t> s = RandomSigns(d, rng_);
      scalar_.accumulate_votes(s.data(), d, ta.data());
      simd_->accumulate_votes(s.data(), d, tb.data());
    }
    ASSERT_EQ(ta, tb) << "d=" << d;

    std::vector<int8_t> oa(d), ob(d);
    scalar_.signs_from_tally(ta.data(), d, oa.data());
    simd_->signs_from_tally(tb.data(), d, ob.data());
    ASSERT_EQ(oa, ob) << "d=" << d;
  }
}

TEST_F(KernelEquivalenceTest, ZeroTallyIsPositive) {
  std::vector<int32_t> t(37, 0);
  std::vector<int8_t> oa(37), ob(37);
  scalar_.signs_from_tally(t.data(), t.size(), oa.data());
  simd_->signs_from_tally(t.data(), t.size(), ob.data());
  EXPECT_EQ(oa, std::vector<int8_t>(37, 1));
  EXPECT_EQ(ob, oa);
}

TEST_F(KernelEquivalenceTest, WeightedTallies) {
  for (size_t d : Lengths()) {
    std::vector<double> ta(d, 0.0), tb(d, 0.0);
    for (int m = 0; m < 4; ++m) {
      std::vector<int32_t> c(d);
      for (int32_t& v : c) v = static_cast<int32_t>(rng_() % 63) - 31;
      const double w = (m == 3) ? 0.0 : std::ldexp(double(rng_() % 1000), -7);
      scalar_.accumulate_weighted(c.data(), w, d, ta.data());
      simd_->accumulate_weighted(c.data(), w, d, tb.data());
    }
    ASSERT_EQ(0, std::memcmp(ta.data(), tb.data(), d * sizeof(double)))
        << "d=" << d;
    std::vector<int8_t> oa(d), ob(d);
    scalar_.signs_from_weighted(ta.data(), d, oa.data());
    simd_->signs_from_weighted(tb.data(), d, ob.data());
    ASSERT_EQ(oa, ob) << "d=" << d;
  }
}

TEST_F(KernelEquivalenceTest, SignedZeroWeightedTallyIsPositive) {
  std::vector<double> t = {0.0,  -0.0, -1e-300, 1e-300, 0.0,
                           -0.0, 2.0,  -2.0,    -0.0};
  std::vector<int8_t> oa(t.size()), ob(t.size());
  scalar_.signs_from_weighted(t.data(), t.size(), oa.data());
  simd_->signs_from_weighted(t.data(), t.size(), ob.data());
  const std::vector<int8_t> want = {1, 1, -1, 1, 1, 1, 1, -1, 1};
  EXPECT_EQ(oa, want);
  EXPECT_EQ(ob, want);
}

TEST_F(KernelEquivalenceTest, Agreements) {
  for (size_t d : Lengths()) {
    std::vector<int8_t> a = RandomSigns(d, rng_), b = RandomSigns(d, rng_);
    ASSERT_EQ(scalar_.count_agreements(a.data(), b.data(), d),
              simd_->count_agreements(a.data(), b.data(), d))
        << "d=" << d;
    ASSERT_EQ(simd_->count_agreements(a.data(), a.data(), d), d);
  }
}

TEST_F(KernelEquivalenceTest, StoSignProbabilitiesBitIdentical) {
  std::uniform_real_distribution<double> g(-5.0, 5.0), b(0.01, 4.0);
  for (size_t d : Lengths()) {
    std::vector<double> gv(d), bv(d);
    for (size_t i = 0; i < d; ++i) {
      gv[i] = g(rng_);
      bv[i] = b(rng_);
      if (i % 11 == 0) gv[i] = bv[i];
      if (i % 13 == 0) gv[i] = -bv[i];
      if (i % 17 == 0) gv[i] = (i % 34 == 0) ? 0.0 : -0.0;
    }
    std::vector<double> pa(d), pb(d);
    scalar_.sto_sign_probabilities(gv.data(), bv.data(), d, pa.data());
    simd_->sto_sign_probabilities(gv.data(), bv.data(), d, pb.data());
    ASSERT_EQ(0, std::memcmp(pa.data(), pb.data(), d * sizeof(double)))
        << "d=" << d;
    for (double p : pa) ASSERT_TRUE(p >= 0.0 && p <= 1.0);
  }
}

TEST_F(KernelEquivalenceTest, Thresholds) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (size_t d : Lengths()) {
    std::vector<double> p(d), x(d);
    for (size_t i = 0; i < d; ++i) {
      p[i] = u(rng_);
      x[i] = (i % 5 == 0) ? p[i] : u(rng_);
      if (i % 7 == 0) p[i] = 0.0;
      if (i % 9 == 0) p[i] = 1.0;
    }
    std::vector<int8_t> oa(d), ob(d);
    scalar_.threshold_signs(p.data(), x.data(), d, oa.data());
    simd_->threshold_signs(p.data(), x.data(), d, ob.data());
    ASSERT_EQ(oa, ob) << "d=" << d;
  }
}

TEST_F(KernelEquivalenceTest, ErrorFeedbackStep) {
  for (size_t d : Lengths()) {
    std::vector<int32_t> tally(d);
    std::vector<int64_t> ra(d), rb(d);
    for (size_t i = 0; i < d; ++i) {
      tally[i] = 2 * static_cast<int32_t>(rng_() % 16) - 15;
      ra[i] = rb[i] = 2 * (static_cast<int64_t>(rng_() % 41) - 20);
    }
    std::vector<int8_t> oa(d), ob(d);
    scalar_.ef_step(tally.data(), ra.data(), d, oa.data());
    simd_->ef_step(tally.data(), rb.data(), d, ob.data());
    ASSERT_EQ(oa, ob) << "d=" << d;
    ASSERT_EQ(ra, rb) << "d=" << d;
  }
}

TEST(KernelDispatchTest, ActiveTableIsOneOfTheVariants) {
  const KernelTable& active = ActiveKernels();
  EXPECT_TRUE(&active == &ScalarKernels() || &active == Avx2Kernels());
}

TEST(ScalarKernelTest, ProbabilityClampsAndHandlesSignedZero) {
  const KernelTable& k = ScalarKernels();
  const double g[] = {2.0, -2.0, 0.0, -0.0, 0.5};
  const double b[] = {1.0, 1.0, 1.0, 1.0, 1.0};
  double p[5];
  k.sto_sign_probabilities(g, b, 5, p);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_EQ(p[2], 0.5);
  EXPECT_EQ(p[3], 0.5);
  EXPECT_EQ(p[4], 0.75);
}

}  // namespace
}  // namespace stosign::kernels
