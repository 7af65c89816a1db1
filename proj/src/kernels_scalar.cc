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

#include <cstring>

#include "stosign/kernels.h"

namespace stosign::kernels {
namespace {

void PackSigns(const int8_t* signs, size_t d, uint8_t* out) {
  std::memset(out, 0, (d + 7) / 8);
  for (size_t i = 0; i < d; ++i) {
    if (signs[i] > 0) out[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  }
}

void UnpackSigns(const uint8_t* bytes, size_t d, int8_t* out) {
  for (size_t i = 0; i < d; ++i) {
    out[i] = ((bytes[i / 8] >> (i % 8)) & 1u) ? 1 : -1;
  }
}

void AccumulateVotes(const int8_t* signs, size_t d, int32_t* tally) {
  for (size_t i = 0; i < d; ++i) tally[i] += signs[i];
}

void AccumulateWeighted(const int32_t* counts, double weight, size_t d,
                        double* tally) {
  for (size_t i = 0; i < d; ++i) {
    tally[i] += weight * static_cast<double>(counts[i]);
  }
}

size_t CountAgreements(const int8_t* a, const int8_t* b, size_t d) {
  size_t n = 0;
  for (size_t i = 0; i < d; ++i) n += (a[i] == b[i]) ? 1 : 0;
  return n;
}

void SignsFromTally(const int32_t* tally, size_t d, int8_t* out) {
  for (size_t i = 0; i < d; ++i) out[i] = tally[i] >= 0 ? 1 : -1;
}

void SignsFromWeighted(const double* tally, size_t d, int8_t* out) {
  for (size_t i = 0; i < d; ++i) out[i] = tally[i] >= 0.0 ? 1 : -1;
}

void StoSignProbabilities(const double* g, const double* b, size_t d,
                          double* out) {
  for (size_t i = 0; i < d; ++i) {
    const double p = (b[i] + g[i]) / (2.0 * b[i]);
    out[i] = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  }
}

void ThresholdSigns(const double* prob, const double* uniform, size_t d,
                    int8_t* out) {
  for (size_t i = 0; i < d; ++i) out[i] = uniform[i] < prob[i] ? 1 : -1;
}

void EfStep(const int32_t* tally, int64_t* residual, size_t d, int8_t* out) {
  for (size_t i = 0; i < d; ++i) {
    const int64_t x = static_cast<int64_t>(tally[i]) + residual[i];
    const int8_t s = x >= 0 ? 1 : -1;
    out[i] = s;
    residual[i] = x - s;
  }
}

constexpr KernelTable kScalarTable = {
    "scalar",
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

const KernelTable& ScalarKernels() { return kScalarTable; }

}  // namespace stosign::kernels
