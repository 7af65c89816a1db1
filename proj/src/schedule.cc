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


#include "stosign/schedule.h"

#include <cmath>

#include "absl/strings/str_format.h"

namespace stosign {

absl::StatusOr<LrKind> ParseLrKind(std::string_view name) {
  if (name == "constant") return LrKind::kConstant;
  if (name == "step-decay") return LrKind::kStepDecay;
  if (name == "multiplicative-decay") return LrKind::kMultiplicative;
  if (name == "theory") return LrKind::kTheory;
  return absl::InvalidArgumentError(absl::StrFormat(
      "unknown learning-rate schedule \"%s\"", std::string(name)));
}

absl::Status LrSchedule::Validate() const {
  if (kind != LrKind::kTheory && !(eta0 > 0.0 && std::isfinite(eta0))) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eta0 must be positive, got %g", eta0));
  }
  if (kind == LrKind::kStepDecay) {
    for (size_t i = 0; i < milestones.size(); ++i) {
      if (!(milestones[i].second > 0.0)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("milestone %d divisor must be positive", i));
      }
      if (i > 0 && milestones[i].first <= milestones[i - 1].first) {
        return absl::InvalidArgumentError(
            "milestones must be strictly increasing");
      }
    }
  }
  if (kind == LrKind::kMultiplicative && !(gamma > 0.0)) {
    return absl::InvalidArgumentError("gamma must be positive");
  }
  if (kind == LrKind::kTheory && (total_rounds < 1 || dim < 1)) {
    return absl::InvalidArgumentError(
        "theory schedule needs rounds >= 1 and d >= 1");
  }
  return absl::OkStatus();
}

double LrSchedule::At(int64_t t) const {
  switch (kind) {
    case LrKind::kConstant:
      return eta0;
    case LrKind::kStepDecay: {
      double divisor = 1.0;
      for (const auto& [round, div] : milestones) {
        if (t >= round) divisor = div;
      }
      return eta0 / divisor;
    }
    case LrKind::kMultiplicative:
      return eta0 * std::pow(gamma, static_cast<double>(t));
    case LrKind::kTheory:
      return 1.0 / std::sqrt(static_cast<double>(total_rounds) *
                             static_cast<double>(dim));
  }
  return eta0;
}

}  // namespace stosign
