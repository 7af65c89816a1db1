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

// Compiled with -mavx2. Only reached after a CPUID check, so nothing in here
// may be an inline function shared with other translation units.

#include <immintrin.h>

#include <cstring>

#include "stosign/kernels.h"

namespace stosign::kernels {
namespace {

// Four +-1 bytes for each 4-bit movemask value (bit set -> +1).
constexpr uint32_t SignWord(unsigned mask) {
  uint32_t w = 0;
  for (unsigned j = 0; j < 4; ++j) {
    const uint32_t byte = ((mask >> j) & 1u) ? 0x01u : 0xFFu;
    w |= byte << (8 * j);
  }
  return w;
}

constexpr uint32_t kSignWords[16] = {
    SignWord(0),  SignWord(1),  SignWord(2),  SignWord(3),
    SignWord(4),  SignWord(5),  SignWord(6),  SignWord(7),
    SignWord(8),  SignWord(9),  SignWord(10), SignWord(11),
    SignWord(12), SignWord(13), SignWord(14), SignWord(15),
};

inline void StoreSignWord(int mask, int8_t* out) {
  std::memcpy(out, &kSignWords[mask], 4);
}

void PackSigns(const int8_t* signs, size_t d, uint8_t* out) {
  const __m256i zero = _mm256_setzero_si256();
  size_t i = 0;
  for (; i + 32 <= d; i += 32) {
    const __m256i v =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(signs + i));
    const uint32_t bits =
        static_cast<uint32_t>(_mm256_movemask_epi8(_mm256_cmpgt_epi8(v, zero)));
    std::memcpy(out + i / 8, &bits, 4);
  }
  const size_t tail_bytes = (d + 7) / 8 - i / 8;
  std::memset(out + i / 8, 0, tail_bytes);
  for (; i < d; ++i) {
    if (signs[i] > 0) out[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  }
}

void UnpackSigns(const uint8_t* bytes, size_t d, int8_t* out) {
  const __m256i spread =
      _mm256_setr_epi8(0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1,  //
                       2, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3);
  const __m256i bit = _mm256_setr_epi8(
      1, 2, 4, 8, 16, 32, 64, -128, 1, 2, 4, 8, 16, 32, 64, -128,  //
      1, 2, 4, 8, 16, 32, 64, -128, 1, 2, 4, 8, 16, 32, 64, -128);
  const __m256i one = _mm256_set1_epi8(1);
  const __m256i two = _mm256_set1_epi8(2);
  size_t i = 0;
  for (; i + 32 <= d; i += 32) {
    uint32_t word;
    std::memcpy(&word, bytes + i / 8, 4);
    const __m256i v =
        _mm256_shuffle_epi8(_mm256_set1_epi32(static_cast<int>(word)), spread);
    const __m256i set = _mm256_cmpeq_epi8(_mm256_and_si256(v, bit), bit);
    const __m256i s = _mm256_sub_epi8(_mm256_and_si256(set, two), one);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), s);
  }
  for (; i < d; ++i) out[i] = ((bytes[i / 8] >> (i % 8)) & 1u) ? 1 : -1;
}

void AccumulateVotes(const int8_t* signs, size_t d, int32_t* tally) {
  size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    const __m256i s = _mm256_cvtepi8_epi32(
        _mm_loadl_epi64(reinterpret_cast<const __m128i*>(signs + i)));
    __m256i* t = reinterpret_cast<__m256i*>(tally + i);
    _mm256_storeu_si256(t, _mm256_add_epi32(_mm256_loadu_si256(t), s));
  }
  for (; i < d; ++i) tally[i] += signs[i];
}

void AccumulateWeighted(const int32_t* counts, double weight, size_t d,
                        double* tally) {
  const __m256d w = _mm256_set1_pd(weight);
  size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const __m256d c = _mm256_cvtepi32_pd(
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(counts + i)));
    const __m256d t = _mm256_loadu_pd(tally + i);
    _mm256_storeu_pd(tally + i, _mm256_add_pd(t, _mm256_mul_pd(w, c)));
  }
  for (; i < d; ++i) tally[i] += weight * static_cast<double>(counts[i]);
}

size_t CountAgreements(const int8_t* a, const int8_t* b, size_t d) {
  size_t n = 0;
  size_t i = 0;
  for (; i + 32 <= d; i += 32) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const uint32_t eq =
        static_cast<uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)));
    n += static_cast<size_t>(__builtin_popcount(eq));
  }
  for (; i < d; ++i) n += (a[i] == b[i]) ? 1 : 0;
  return n;
}

void SignsFromTally(const int32_t* tally, size_t d, int8_t* out) {
  const __m256i minus_one = _mm256_set1_epi32(-1);
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i two = _mm256_set1_epi32(2);
  const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  auto to_sign = [&](size_t at) {
    const __m256i t =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(tally + at));
    const __m256i ge = _mm256_cmpgt_epi32(t, minus_one);
    return _mm256_sub_epi32(_mm256_and_si256(ge, two), one);
  };
  size_t i = 0;
  for (; i + 32 <= d; i += 32) {
    const __m256i lo = _mm256_packs_epi32(to_sign(i), to_sign(i + 8));
    const __m256i hi = _mm256_packs_epi32(to_sign(i + 16), to_sign(i + 24));
    const __m256i bytes =
        _mm256_permutevar8x32_epi32(_mm256_packs_epi16(lo, hi), order);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), bytes);
  }
  for (; i < d; ++i) out[i] = tally[i] >= 0 ? 1 : -1;
}

void SignsFromWeighted(const double* tally, size_t d, int8_t* out) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const __m256d ge =
        _mm256_cmp_pd(_mm256_loadu_pd(tally + i), zero, _CMP_GE_OQ);
    StoreSignWord(_mm256_movemask_pd(ge), out + i);
  }
  for (; i < d; ++i) out[i] = tally[i] >= 0.0 ? 1 : -1;
}

void StoSignProbabilities(const double* g, const double* b, size_t d,
                          double* out) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    const __m256d bv = _mm256_loadu_pd(b + i);
    __m256d p = _mm256_div_pd(_mm256_add_pd(bv, gv), _mm256_mul_pd(two, bv));
    // Blends instead of min/max so signed zeros match the scalar path.
    p = _mm256_blendv_pd(p, zero, _mm256_cmp_pd(p, zero, _CMP_LT_OQ));
    p = _mm256_blendv_pd(p, one, _mm256_cmp_pd(p, one, _CMP_GT_OQ));
    _mm256_storeu_pd(out + i, p);
  }
  for (; i < d; ++i) {
    const double p = (b[i] + g[i]) / (2.0 * b[i]);
    out[i] = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  }
}

void ThresholdSigns(const double* prob, const double* uniform, size_t d,
                    int8_t* out) {
  size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const __m256d lt = _mm256_cmp_pd(_mm256_loadu_pd(uniform + i),
                                     _mm256_loadu_pd(prob + i), _CMP_LT_OQ);
    StoreSignWord(_mm256_movemask_pd(lt), out + i);
  }
  for (; i < d; ++i) out[i] = uniform[i] < prob[i] ? 1 : -1;
}

void EfStep(const int32_t* tally, int64_t* residual, size_t d, int8_t* out) {
  const __m256i minus_one = _mm256_set1_epi64x(-1);
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const __m256i t = _mm256_cvtepi32_epi64(
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(tally + i)));
    __m256i* r = reinterpret_cast<__m256i*>(residual + i);
    const __m256i x = _mm256_add_epi64(t, _mm256_loadu_si256(r));
    const __m256i ge = _mm256_cmpgt_epi64(x, minus_one);
    const __m256i s = _mm256_sub_epi64(_mm256_and_si256(ge, two), one);
    _mm256_storeu_si256(r, _mm256_sub_epi64(x, s));
    StoreSignWord(_mm256_movemask_pd(_mm256_castsi256_pd(ge)), out + i);
  }
  for (; i < d; ++i) {
    const int64_t x = static_cast<int64_t>(tally[i]) + residual[i];
    const int8_t s = x >= 0 ? 1 : -1;
    out[i] = s;
    residual[i] = x - s;
  }
}

constexpr KernelTable kAvx2Table = {
    "avx2",
    PackSigns,
    UnpackSigns,
    AccumulateVotes,
    AccumulateWeighted,
    CountAgreements,
    SignsFromTally,
    SignsFromWeighted,
    StoSignProbabilities,
    ThresholdSigns,
    EfStep,
};

}  // namespace

namespace internal {
const KernelTable& Avx2Table() { return kAvx2Table; }
}  // namespace internal

}  // namespace stosign::kernels
