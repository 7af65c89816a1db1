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


#ifndef STOSIGN_ANALYSIS_H_
#define STOSIGN_ANALYSIS_H_

// Exact and Monte Carlo oracles for the probability that a majority vote over
// one coordinate disagrees with the true sign, and closed-form bounds on it.
//
// "True sign" is sign(sum u) with sign(0) = +1. Ties in the vote count as
// wrong aggregation, which keeps every bound check conservative.

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "stosign/compressors.h"
#include "stosign/vectors.h"

namespace stosign {

// M fixed scalars, one per normal worker, compressed with scale b.
struct ScalarEnsemble {
  std::vector<double> u;
  double b = 1.0;
  // Extra voters that always send the wrong sign.
  int byzantine_count = 0;
  // Allows b < max|u_m|; the mapping probability is then clamped.
  bool allow_clamp = false;

  int M() const { return static_cast<int>(u.size()); }
  double SumU() const;
  absl::Status Validate() const;
};

// P(wrong aggregation) when normal worker m is wrong independently with
// probability p[m] and `byzantine` extra voters are always wrong. Wrong means
// 2 * (#wrong normals) + byzantine >= M. Poisson-binomial convolution, O(M^2).
absl::StatusOr<double> ExactWrongAggregation(std::span<const double> p,
                                             int byzantine);

struct WrongProbs {
  std::vector<double> p;
  double p_bar = 0.0;
};

// Per-worker probability that sto-sign(u_m, b) differs from the true sign.
// Without clamping, p_bar is checked against (bM - |sum u|) / (2bM).
absl::StatusOr<WrongProbs> StoSignWrongProbs(const ScalarEnsemble& e);

// Same for dp-sign; the ensemble's b is ignored.
absl::StatusOr<WrongProbs> DpSignWrongProbs(const ScalarEnsemble& e,
                                            const DpSignParams& params);

enum class McCompressor { kStoSign, kDpGaussian, kDpLaplace };

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Simulates `trials` independent votes. `dp_scale` is sigma or lambda for the
// dp compressors and unused for sto-sign.
absl::StatusOr<McEstimate> McWrongAggregation(const ScalarEnsemble& e,
                                              McCompressor compressor,
                                              double dp_scale, int64_t trials,
                                              RngStream& stream);

// [4 p (1 - p)]^(M/2). OutOfRange when p_bar >= 1/2, where the bound is
// vacuous.
absl::StatusOr<double> BoundThm1(double p_bar, int M);

// (1 - x^2)^(M/2) with x = |sum u| / (bM). Needs b >= max|u_m|.
absl::StatusOr<double> BoundCor1(const ScalarEnsemble& e);

// 1/2 - C(M-1, (M-1)/2) |sum u| / (2^M b), clamped to [0, 1]. Odd M only.
absl::StatusOr<double> ExpansionThm3(const ScalarEnsemble& e);

// The x solving (1 - x^2)^(M/2) = (1 - c) / 2.
absl::StatusOr<double> DeltaM(int M, double c);

// Left side of the Byzantine tolerance inequality for k attackers:
// [(M-k)(1-p) / ((M+k) p)]^(k/2) (sqrt((M-k)/(M+k)) + sqrt((M+k)/(M-k)))^M
// [p (1-p)]^(M/2). Evaluated in log space; p_bar = 0 gives 0.
absl::StatusOr<double> ByzantineInequalityLhs(double p_bar, int M, int k);

// True iff p_bar <= (M - k) / (2M) and the inequality left side is at most
// (1 - c) / 2. Needs 0 <= k < M.
absl::StatusOr<bool> ByzantineCondition(double p_bar, int M, int k, double c);

// floor(|sum u| / b), capped at M - 1.
absl::StatusOr<int> MaxTolerableK(const ScalarEnsemble& e);

// (1 - 1/B^2)^(M/2) under bounded gradient dissimilarity B >= 1.
absl::StatusOr<double> BoundDissimilarity(double B, int M);

struct BoundReport {
  double exact = 0.0;
  McEstimate monte_carlo;
  // 1 when the bound is vacuous (p_bar >= 1/2).
  double thm1 = 1.0;
  double cor1 = 1.0;
  // NaN for even M.
  double thm3_expansion = 0.0;
  double delta_m = 0.0;
};

// Evaluates every quantity above for a sto-sign ensemble. mc_trials = 0 skips
// the Monte Carlo estimate.
absl::StatusOr<BoundReport> EvaluateBounds(const ScalarEnsemble& e, double c,
                                           int64_t mc_trials,
                                           RngStream& stream);

}  // namespace stosign

#endif  // STOSIGN_ANALYSIS_H_
