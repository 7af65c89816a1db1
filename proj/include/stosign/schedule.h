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


#ifndef STOSIGN_SCHEDULE_H_
#define STOSIGN_SCHEDULE_H_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace stosign {

enum class LrKind { kConstant, kStepDecay, kMultiplicative, kTheory };

absl::StatusOr<LrKind> ParseLrKind(std::string_view name);

struct LrSchedule {
  LrKind kind = LrKind::kConstant;
  double eta0 = 0.01;
  // Step decay: from round `first` on, the rate is eta0 / `second`. Sorted by
  // round; the latest milestone reached wins.
  std::vector<std::pair<int64_t, double>> milestones;
  // Multiplicative: eta0 * gamma^t.
  double gamma = 0.99;
  // Theory: 1 / sqrt(total_rounds * dim), eta0 unused.
  int64_t total_rounds = 1;
  size_t dim = 1;

  absl::Status Validate() const;
  // Rounds count from 0.
  double At(int64_t t) const;
};

}  // namespace stosign

#endif  // STOSIGN_SCHEDULE_H_
