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

#include <cassert>
#include <cmath>
#include <utility>

#include "absl/strings/str_format.h"
#include "stosign/kernels.h"

namespace stosign {
namespace {

// SplitMix64 finalizer.
uint64_t Mix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t PathKey(uint64_t root, int64_t round, int64_t worker,
                 int64_t purpose) {
  uint64_t k = Mix(root);
  k = Mix(k ^ (static_cast<uint64_t>(round) * 0xd1b54a32d192ed03ULL));
  k = Mix(k ^ (static_cast<uint64_t>(worker) * 0xaef17502108ef2d9ULL));
  k = Mix(k ^ (static_cast<uint64_t>(purpose) * 0xf58f2a1b2e1c5a7dULL));
  return k;
}

}  // namespace

absl::Status ValidateGradient(std::span<const double> g) {
  for (size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("gradient entry %d is not finite (%g)", i, g[i]));
    }
  }
  return absl::OkStatus();
}

SignVector::SignVector(size_t d, int8_t fill)
    : signs_(d, fill >= 0 ? int8_t{1} : int8_t{-1}) {}

absl::StatusOr<SignVector> SignVector::FromValues(std::vector<int8_t> values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 1 && values[i] != -1) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "sign entry %d is %d; expected -1 or +1", i, values[i]));
    }
  }
  return SignVector(std::move(values));
}

SignVector SignVector::Adopt(std::vector<int8_t> values) {
#ifndef NDEBUG
  for (int8_t v : values) assert(v == 1 || v == -1);
#endif
  return SignVector(std::move(values));
}

std::vector<uint8_t> PackSigns(const SignVector& signs) {
  std::vector<uint8_t> out(PackedSize(signs.size()));
  kernels::ActiveKernels().pack_signs(signs.values().data(), signs.size(),
                                      out.data());
  return out;
}

absl::StatusOr<SignVector> UnpackSigns(std::span<const uint8_t> bytes,
                                       size_t d) {
  if (bytes.size() != PackedSize(d)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sign payload has %d bytes; %d coordinates need %d",
                        bytes.size(), d, PackedSize(d)));
  }
  std::vector<int8_t> out(d);
  kernels::ActiveKernels().unpack_signs(bytes.data(), d, out.data());
  return SignVector::Adopt(std::move(out));
}

RngStream::RngStream(uint64_t root_seed, int64_t round, int64_t worker,
                     int64_t purpose)
    : engine_(PathKey(root_seed, round, worker, purpose)) {}

}  // namespace stosign
