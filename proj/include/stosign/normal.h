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

#ifndef STOSIGN_NORMAL_H_
#define STOSIGN_NORMAL_H_

#include <cmath>
#include <numbers>

namespace stosign {

// Cdf of the standard normal. erfc keeps full relative accuracy in the lower
// tail; absolute error is below 1e-15 everywhere.
inline double StandardNormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace stosign

#endif  // STOSIGN_NORMAL_H_
