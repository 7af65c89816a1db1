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

#ifndef STOSIGN_COMPRESSORS_H_
#define STOSIGN_COMPRESSORS_H_

// Worker-side 1-bit compressors and the transforms applied before them.
//
// Throughout the library sign(0) = +1, including for -0.0.

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "stosign/vectors.h"

namespace stosign {

enum class ScaleMode {
  kFixedScalar,     // b_i = b for all i
  kOracleMax,       // b_i = max_m |(g_m)_i| over this round's normal workers
  kTheorySchedule,  // b_i = T^(1/4) d^(1/4)
};

// Per-coordinate scale vector b of the stochastic sign compressor.
struct StoSignParams {
  std::vector<double> b;
  ScaleMode mode = ScaleMode::kFixedScalar;

  static absl::StatusOr<StoSignParams> Fixed(double b, size_t d);

  // Uses only the normal workers' gradients. A coordinate where every worker
  // reports exactly zero gets b_i = 1; any positive b maps 0 to a fair coin.
  static absl::StatusOr<StoSignParams> OracleMax(
      std::span<const GradientVector> normal_gradients);

  static absl::StatusOr<StoSignParams> TheorySchedule(int64_t rounds, size_t d);

  absl::Status Validate() const;
};

enum class DpMechanism { kGaussian, kLaplace };

// sigma for the Gaussian mechanism, lambda for Laplace.
struct DpSignParams {
  DpMechanism mechanism = DpMechanism::kGaussian;
  double scale = 1.0;

  absl::Status Validate() const;
};

// Entrywise sign with sign(0) = +1. Rejects NaN.
absl::StatusOr<SignVector> SignCompress(std::span<const double> g);

// Probability that sto-sign emits +1 for one coordinate:
// clamp((b + g) / (2b), 0, 1). Out-of-range values are clamped rather than
// rejected, so fixed-b runs keep going when |g| outgrows b.
absl::StatusOr<double> MappingProbability(double g, double b);

// Each coordinate consumes one uniform draw from `stream`, in index order.
absl::StatusOr<SignVector> StoSign(std::span<const double> g,
                                   const StoSignParams& params,
                                   RngStream& stream);

// Probability that dp-sign emits +1: Phi(g / sigma) for the Gaussian
// mechanism, 1/2 + sign(g) (1 - exp(-|g| / lambda)) / 2 for Laplace.
absl::StatusOr<double> DpSignProbability(double g, const DpSignParams& params);

absl::StatusOr<SignVector> DpSign(std::span<const double> g,
                                  const DpSignParams& params,
                                  RngStream& stream);

// Keeps the ceil(fraction * d) largest-magnitude coordinates (ties go to the
// lower index) and zeroes the rest. `fraction` must be in (0, 1].
absl::StatusOr<GradientVector> TopKMask(std::span<const double> g,
                                        double fraction);

// Indicator of the coordinates TopKMask keeps.
absl::StatusOr<std::vector<bool>> TopKSupport(std::span<const double> g,
                                              double fraction);

// Scales g down to L2 norm `clip` when it is longer. The result never has norm
// above `clip`.
absl::StatusOr<GradientVector> ClipL2(std::span<const double> g, double clip);

// Attack compressor: -sign(target), so exact zeros become -1.
SignVector ByzantineSign(std::span<const double> target);

}  // namespace stosign

#endif  // STOSIGN_COMPRESSORS_H_
