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


#include "stosign/privacy.h"

#include <cmath>

#include "absl/strings/str_format.h"
#include "stosign/normal.h"

namespace stosign {
namespace {

constexpr double kEpsUpper = 64.0;
constexpr double kEpsTolerance = 1e-10;

}  // namespace

absl::StatusOr<double> CalibrateSigma(double epsilon, double delta,
                                      double delta2) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be in (0, 1], got %g", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must be in (0, 1), got %g", delta));
  }
  if (!(delta2 > 0.0) || !std::isfinite(delta2)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("L2 sensitivity must be positive, got %g", delta2));
  }
  return delta2 / epsilon * std::sqrt(2.0 * std::log(1.25 / delta));
}

absl::StatusOr<double> CalibrateLambda(double epsilon, double delta1) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be positive, got %g", epsilon));
  }
  if (!(delta1 > 0.0) || !std::isfinite(delta1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("L1 sensitivity must be positive, got %g", delta1));
  }
  return delta1 / epsilon;
}

absl::StatusOr<double> ComposeGdp(double sigma, double delta2, int64_t rounds) {
  if (!(sigma > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sigma must be positive, got %g", sigma));
  }
  if (!(delta2 > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("L2 sensitivity must be positive, got %g", delta2));
  }
  if (rounds < 1) return absl::InvalidArgumentError("rounds must be >= 1");
  return std::sqrt(static_cast<double>(rounds)) * delta2 / sigma;
}

absl::StatusOr<double> MuToDelta(double mu, double epsilon) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("mu must be positive, got %g", mu));
  }
  if (!(epsilon >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be >= 0, got %g", epsilon));
  }
  const double a = StandardNormalCdf(-epsilon / mu + mu / 2.0);
  // e^eps Phi(x) in log space so large eps does not overflow.
  const double b_arg = -epsilon / mu - mu / 2.0;
  const double b_cdf = StandardNormalCdf(b_arg);
  const double b = b_cdf > 0.0 ? std::exp(epsilon + std::log(b_cdf)) : 0.0;
  const double delta = a - b;
  return delta < 0.0 ? 0.0 : (delta > 1.0 ? 1.0 : delta);
}

absl::StatusOr<double> MuToEps(double mu, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must be in (0, 1), got %g", delta));
  }
  absl::StatusOr<double> at_zero = MuToDelta(mu, 0.0);
  if (!at_zero.ok()) return at_zero.status();
  if (delta >= *at_zero) return 0.0;

  absl::StatusOr<double> at_top = MuToDelta(mu, kEpsUpper);
  if (!at_top.ok()) return at_top.status();
  if (*at_top > delta) {
    return absl::OutOfRangeError(
        absl::StrFormat("no epsilon in [0, %g] reaches delta = %g at mu = %g",
                        kEpsUpper, delta, mu));
  }
  double lo = 0.0;
  double hi = kEpsUpper;
  while (hi - lo > kEpsTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (*MuToDelta(mu, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace stosign
