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

#ifndef STOSIGN_VECTORS_H_
#define STOSIGN_VECTORS_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace stosign {

// A dense worker gradient (or true gradient, or model weights) of length d.
using GradientVector = std::vector<double>;

// Returns InvalidArgument if any entry is NaN or infinite.
absl::Status ValidateGradient(std::span<const double> g);

// A vector over {-1, +1}. This is the only payload that crosses the wire in
// either direction.
class SignVector {
 public:
  SignVector() = default;

  // d copies of `fill`, which must be -1 or +1.
  explicit SignVector(size_t d, int8_t fill = 1);

  // Checks that every entry is exactly -1 or +1.
  static absl::StatusOr<SignVector> FromValues(std::vector<int8_t> values);

  // Takes ownership of a buffer produced by a sign kernel. Kernel outputs are
  // always +-1, so this only asserts in debug builds.
  static SignVector Adopt(std::vector<int8_t> values);

  size_t size() const { return signs_.size(); }
  bool empty() const { return signs_.empty(); }
  int8_t operator[](size_t i) const { return signs_[i]; }
  void Set(size_t i, bool positive) { signs_[i] = positive ? 1 : -1; }
  std::span<const int8_t> values() const { return signs_; }

  bool operator==(const SignVector& other) const = default;

 private:
  explicit SignVector(std::vector<int8_t> values) : signs_(std::move(values)) {}

  std::vector<int8_t> signs_;
};

// Wire codec. Coordinate i lives in bit (i % 8) of byte i / 8, least
// significant bit first; +1 encodes as 1 and -1 as 0. Pad bits are zero. The
// dimension d travels out of band, so a payload is exactly d bits.
std::vector<uint8_t> PackSigns(const SignVector& signs);
absl::StatusOr<SignVector> UnpackSigns(std::span<const uint8_t> bytes,
                                       size_t d);

constexpr size_t PackedSize(size_t d) { return (d + 7) / 8; }
constexpr uint64_t PayloadBits(size_t d) { return d; }

// Purpose tags keep the streams used by different parts of one round apart.
enum class StreamPurpose : int64_t {
  kCompress = 0,
  kBatch = 1,
  kPartition = 2,
  kInit = 3,
  kData = 4,
  kMonteCarlo = 5,
  kSplit = 6,
};

// Deterministic random stream keyed on (root seed, round, worker, purpose).
// The path is hashed into the engine seed, so streams for different workers
// never depend on evaluation order. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = uint64_t;

  RngStream(uint64_t root_seed, int64_t round, int64_t worker, int64_t purpose);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal draw; used for data synthesis and weight init only.
  double Gaussian() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline RngStream DeriveStream(uint64_t root_seed, int64_t round, int64_t worker,
                              StreamPurpose purpose) {
  return RngStream(root_seed, round, worker, static_cast<int64_t>(purpose));
}

inline RngStream DeriveStream(uint64_t root_seed, int64_t round, int64_t worker,
                              int64_t purpose) {
  return RngStream(root_seed, round, worker, purpose);
}

}  // namespace stosign

#endif  // STOSIGN_VECTORS_H_
