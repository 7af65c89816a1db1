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


#ifndef STOSIGN_PRIVACY_H_
#define STOSIGN_PRIVACY_H_

// Noise calibration for dp-sign and Gaussian-DP accounting.

#include <cstdint>

#include "absl/status/statusor.h"

namespace stosign {

// sigma = (delta2 / eps) sqrt(2 ln(1.25 / delta)), for eps in (0, 1] and
// delta in (0, 1).
absl::StatusOr<double> CalibrateSigma(double epsilon, double delta,
                                      double delta2);

// lambda = delta1 / eps.
absl::StatusOr<double> CalibrateLambda(double epsilon, double delta1);

// mu = sqrt(T) delta2 / sigma for T composed Gaussian mechanisms.
absl::StatusOr<double> ComposeGdp(double sigma, double delta2, int64_t rounds);

// Tightest delta at eps for a mu-GDP mechanism:
// Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2), clamped to [0, 1].
absl::StatusOr<double> MuToDelta(double mu, double epsilon);

// Smallest eps >= 0 with MuToDelta(mu, eps) <= delta. Returns 0 when delta is
// already met at eps = 0. Bisection on [0, 64] to 1e-10.
absl::StatusOr<double> MuToEps(double mu, double delta);

}  // namespace stosign

#endif  // STOSIGN_PRIVACY_H_
