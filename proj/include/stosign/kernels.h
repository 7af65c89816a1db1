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

#ifndef STOSIGN_KERNELS_H_
#define STOSIGN_KERNELS_H_

// Inner loops over sign payloads. Every kernel has a scalar reference and,
// on x86-64, an AVX2 variant that must produce bit-identical output. The
// variant is picked once at startup from CPUID; setting the environment
// variable STOSIGN_SIMD=scalar forces the reference path.
//
// This header is included from the AVX2 translation unit, so it must not pull
// in any standard library templates.

#include <cstddef>
#include <cstdint>

namespace stosign::kernels {

struct KernelTable {
  const char* name;

  // LSB-first bit packing, +1 -> 1. `out` holds (d + 7) / 8 bytes.
  void (*pack_signs)(const int8_t* signs, size_t d, uint8_t* out);
  void (*unpack_signs)(const uint8_t* bytes, size_t d, int8_t* out);

  // tally[i] += signs[i]
  void (*accumulate_votes)(const int8_t* signs, size_t d, int32_t* tally);
  // tally[i] += weight * counts[i]
  void (*accumulate_weighted)(const int32_t* counts, double weight, size_t d,
                              double* tally);
  // Number of i with a[i] == b[i].
  size_t (*count_agreements)(const int8_t* a, const int8_t* b, size_t d);

  // out[i] = tally[i] >= 0 ? +1 : -1
  void (*signs_from_tally)(const int32_t* tally, size_t d, int8_t* out);
  void (*signs_from_weighted)(const double* tally, size_t d, int8_t* out);

  // out[i] = clamp((b[i] + g[i]) / (2 b[i]), 0, 1)
  void (*sto_sign_probabilities)(const double* g, const double* b, size_t d,
                                 double* out);
  // out[i] = uniform[i] < prob[i] ? +1 : -1
  void (*threshold_signs)(const double* prob, const double* uniform, size_t d,
                          int8_t* out);

  // Error-feedback step on scaled integers: x = tally + residual,
  // out = x >= 0 ? +1 : -1, residual = x - out.
  void (*ef_step)(const int32_t* tally, int64_t* residual, size_t d,
                  int8_t* out);
};

const KernelTable& ScalarKernels();

// nullptr when the build has no AVX2 variant or the CPU lacks AVX2.
const KernelTable* Avx2Kernels();

// The table every module uses.
const KernelTable& ActiveKernels();

namespace internal {
// Defined in the AVX2 translation unit, only on x86-64 builds.
const KernelTable& Avx2Table();
}  // namespace internal

}  // namespace stosign::kernels

#endif  // STOSIGN_KERNELS_H_
