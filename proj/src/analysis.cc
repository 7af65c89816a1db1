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


#include "stosign/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_format.h"

namespace stosign {
namespace {

// base^(M/2) in extended precision, through logs so large M cannot underflow
// an intermediate.
double HalfPower(long double base, int M) {
  if (base <= 0.0L) return 0.0;
  return static_cast<double>(
      std::exp(0.5L * static_cast<long double>(M) * std::log(base)));
}

int TrueSign(const ScalarEnsemble& e) { return e.SumU() >= 0.0 ? 1 : -1; }

absl::StatusOr<std::vector<double>> PlusProbabilities(const ScalarEnsemble& e,
                                                      McCompressor compressor,
                                                      double dp_scale) {
  std::vector<double> q(e.u.size());
  for (size_t m = 0; m < e.u.size(); ++m) {
    absl::StatusOr<double> p;
    switch (compressor) {
      case McCompressor::kStoSign:
        p = MappingProbability(e.u[m], e.b);
        break;
      case McCompressor::kDpGaussian:
        p = DpSignProbability(e.u[m], {DpMechanism::kGaussian, dp_scale});
        break;
      case McCompressor::kDpLaplace:
        p = DpSignProbability(e.u[m], {DpMechanism::kLaplace, dp_scale});
        break;
    }
    if (!p.ok()) return p.status();
    q[m] = *p;
  }
  return q;
}

WrongProbs WrongFromPlus(const std::vector<double>& q, int true_sign) {
  WrongProbs out;
  out.p.resize(q.size());
  double sum = 0.0;
  for (size_t m = 0; m < q.size(); ++m) {
    out.p[m] = true_sign > 0 ? 1.0 - q[m] : q[m];
    sum += out.p[m];
  }
  out.p_bar = q.empty() ? 0.0 : sum / static_cast<double>(q.size());
  return out;
}

}  // namespace

double ScalarEnsemble::SumU() const {
  double s = 0.0;
  for (double v : u) s += v;
  return s;
}

absl::Status ScalarEnsemble::Validate() const {
  if (u.empty()) return absl::InvalidArgumentError("ensemble needs M >= 1");
  if (!(b > 0.0) || !std::isfinite(b)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("ensemble b must be positive, got %g", b));
  }
  if (byzantine_count < 0) {
    return absl::InvalidArgumentError("byzantine_count must be >= 0");
  }
  if (absl::Status s = ValidateGradient(u); !s.ok()) return s;
  if (!allow_clamp) {
    for (size_t m = 0; m < u.size(); ++m) {
      if (std::abs(u[m]) > b) {
        return absl::InvalidArgumentError(
            absl::StrFormat("|u[%d]| = %g exceeds b = %g and clamping is off",
                            m, std::abs(u[m]), b));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> ExactWrongAggregation(std::span<const double> p,
                                             int byzantine) {
  if (byzantine < 0) {
    return absl::InvalidArgumentError("byzantine count must be >= 0");
  }
  for (size_t m = 0; m < p.size(); ++m) {
    if (!(p[m] >= 0.0 && p[m] <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("p[%d] = %g is not a probability", m, p[m]));
    }
  }
  const size_t M = p.size();
  // dist[w] = P(exactly w wrong normal workers).
  std::vector<double> dist(M + 1, 0.0);
  dist[0] = 1.0;
  for (size_t m = 0; m < M; ++m) {
    for (size_t w = m + 1; w > 0; --w) {
      dist[w] = dist[w] * (1.0 - p[m]) + dist[w - 1] * p[m];
    }
    dist[0] *= 1.0 - p[m];
  }
  double wrong = 0.0;
  for (size_t w = 0; w <= M; ++w) {
    if (2 * static_cast<int64_t>(w) + byzantine >= static_cast<int64_t>(M)) {
      wrong += dist[w];
    }
  }
  return std::clamp(wrong, 0.0, 1.0);
}

absl::StatusOr<WrongProbs> StoSignWrongProbs(const ScalarEnsemble& e) {
  if (absl::Status s = e.Validate(); !s.ok()) return s;
  absl::StatusOr<std::vector<double>> q =
      PlusProbabilities(e, McCompressor::kStoSign, 0.0);
  if (!q.ok()) return q.status();
  WrongProbs out = WrongFromPlus(*q, TrueSign(e));

  double max_abs = 0.0;
  for (double v : e.u) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs <= e.b) {
    const double M = e.M();
    const double closed = (e.b * M - std::abs(e.SumU())) / (2.0 * e.b * M);
    if (std::abs(out.p_bar - closed) > 1e-9) {
      return absl::InternalError(absl::StrFormat(
          "mean wrong probability %.17g disagrees with closed form %.17g",
          out.p_bar, closed));
    }
  }
  return out;
}

absl::StatusOr<WrongProbs> DpSignWrongProbs(const ScalarEnsemble& e,
                                            const DpSignParams& params) {
  if (e.u.empty()) return absl::InvalidArgumentError("ensemble needs M >= 1");
  if (absl::Status s = params.Validate(); !s.ok()) return s;
  const McCompressor kind = params.mechanism == DpMechanism::kGaussian
                                ? McCompressor::kDpGaussian
                                : McCompressor::kDpLaplace;
  absl::StatusOr<std::vector<double>> q =
      PlusProbabilities(e, kind, params.scale);
  if (!q.ok()) return q.status();
  return WrongFromPlus(*q, TrueSign(e));
}

absl::StatusOr<McEstimate> McWrongAggregation(const ScalarEnsemble& e,
                                              McCompressor compressor,
                                              double dp_scale, int64_t trials,
                                              RngStream& stream) {
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (compressor == McCompressor::kStoSign) {
    if (absl::Status s = e.Validate(); !s.ok()) return s;
  } else if (e.u.empty()) {
    return absl::InvalidArgumentError("ensemble needs M >= 1");
  }
  absl::StatusOr<std::vector<double>> q =
      PlusProbabilities(e, compressor, dp_scale);
  if (!q.ok()) return q.status();

  const int true_sign = TrueSign(e);
  const int64_t byzantine_tally = -static_cast<int64_t>(e.byzantine_count);
  int64_t wrong = 0;
  for (int64_t t = 0; t < trials; ++t) {
    // Tally measured along the true sign; the attackers always oppose it.
    int64_t tally = byzantine_tally;
    for (double qm : *q) {
      const int vote = stream.Uniform() < qm ? 1 : -1;
      tally += vote * true_sign;
    }
    if (tally <= 0) ++wrong;
  }
  McEstimate out;
  out.estimate = static_cast<double>(wrong) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) /
                            static_cast<double>(trials));
  return out;
}

absl::StatusOr<double> BoundThm1(double p_bar, int M) {
  if (M < 1) return absl::InvalidArgumentError("M must be >= 1");
  if (!(p_bar >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("p_bar must be >= 0, got %g", p_bar));
  }
  if (p_bar >= 0.5) {
    return absl::OutOfRangeError(
        absl::StrFormat("p_bar = %g >= 1/2; the bound is vacuous", p_bar));
  }
  const long double p = p_bar;
  return HalfPower(4.0L * p * (1.0L - p), M);
}

absl::StatusOr<double> BoundCor1(const ScalarEnsemble& e) {
  if (e.u.empty()) return absl::InvalidArgumentError("ensemble needs M >= 1");
  if (!(e.b > 0.0)) return absl::InvalidArgumentError("b must be positive");
  for (double v : e.u) {
    if (std::abs(v) > e.b) {
      return absl::InvalidArgumentError(
          "the gradient bound needs b >= max |u_m|");
    }
  }
  const long double x = std::abs(static_cast<long double>(e.SumU())) /
                        (static_cast<long double>(e.b) * e.M());
  return HalfPower(std::max(0.0L, 1.0L - x * x), e.M());
}

absl::StatusOr<double> ExpansionThm3(const ScalarEnsemble& e) {
  const int M = e.M();
  if (M < 1 || M % 2 == 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("the large-b expansion needs odd M, got %d", M));
  }
  if (!(e.b > 0.0)) return absl::InvalidArgumentError("b must be positive");
  // C(M-1, (M-1)/2) / 2^M
  const long double log_coef = std::lgamma(static_cast<long double>(M)) -
                               2.0L * std::lgamma(0.5L * (M + 1)) -
                               M * std::numbers::ln2_v<long double>;
  const long double value =
      0.5L - std::exp(log_coef) * std::abs(static_cast<long double>(e.SumU())) /
                 static_cast<long double>(e.b);
  return std::clamp(static_cast<double>(value), 0.0, 1.0);
}

absl::StatusOr<double> DeltaM(int M, double c) {
  if (M < 1) return absl::InvalidArgumentError("M must be >= 1");
  if (!(c > 0.0 && c < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("c must be in (0, 1), got %g", c));
  }
  const long double target = 0.5L * (1.0L - c);
  const long double power = std::exp(2.0L / M * std::log(target));
  return static_cast<double>(std::sqrt(1.0L - power));
}

absl::StatusOr<double> ByzantineInequalityLhs(double p_bar, int M, int k) {
  if (M < 1 || k < 0 || k >= M) {
    return absl::InvalidArgumentError(
        absl::StrFormat("need 0 <= k < M, got k = %d, M = %d", k, M));
  }
  if (!(p_bar >= 0.0 && p_bar <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("p_bar = %g is not a probability", p_bar));
  }
  if (p_bar == 0.0 || p_bar == 1.0) return 0.0;
  const long double p = p_bar;
  const long double mk = M - k;
  const long double pk = M + k;
  const long double log_lhs =
      0.5L * k * std::log(mk * (1.0L - p) / (pk * p)) +
      M * std::log(std::sqrt(mk / pk) + std::sqrt(pk / mk)) +
      0.5L * M * std::log(p * (1.0L - p));
  const long double lhs = std::exp(log_lhs);
  if (!std::isfinite(lhs)) return std::numeric_limits<double>::infinity();
  return static_cast<double>(lhs);
}

absl::StatusOr<bool> ByzantineCondition(double p_bar, int M, int k, double c) {
  if (!(c > 0.0 && c < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("c must be in (0, 1), got %g", c));
  }
  absl::StatusOr<double> lhs = ByzantineInequalityLhs(p_bar, M, k);
  if (!lhs.ok()) return lhs.status();
  const bool first = p_bar <= static_cast<double>(M - k) / (2.0 * M);
  return first && *lhs <= 0.5 * (1.0 - c);
}

absl::StatusOr<int> MaxTolerableK(const ScalarEnsemble& e) {
  if (e.u.empty()) return absl::InvalidArgumentError("ensemble needs M >= 1");
  if (!(e.b > 0.0)) return absl::InvalidArgumentError("b must be positive");
  const double ratio = std::abs(e.SumU()) / e.b;
  // The slack absorbs rounding in sums that are exact multiples of b.
  const double k = std::floor(ratio + 1e-9);
  return static_cast<int>(std::min<double>(k, e.M() - 1));
}

absl::StatusOr<double> BoundDissimilarity(double B, int M) {
  if (!(B >= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dissimilarity B must be >= 1, got %g", B));
  }
  if (M < 1) return absl::InvalidArgumentError("M must be >= 1");
  if (std::isinf(B)) return 1.0;
  const long double inv = 1.0L / B;
  return HalfPower(1.0L - inv * inv, M);
}

absl::StatusOr<BoundReport> EvaluateBounds(const ScalarEnsemble& e, double c,
                                           int64_t mc_trials,
                                           RngStream& stream) {
  absl::StatusOr<WrongProbs> probs = StoSignWrongProbs(e);
  if (!probs.ok()) return probs.status();
  BoundReport r;
  absl::StatusOr<double> exact =
      ExactWrongAggregation(probs->p, e.byzantine_count);
  if (!exact.ok()) return exact.status();
  r.exact = *exact;

  if (mc_trials > 0) {
    absl::StatusOr<McEstimate> mc =
        McWrongAggregation(e, McCompressor::kStoSign, 0.0, mc_trials, stream);
    if (!mc.ok()) return mc.status();
    r.monte_carlo = *mc;
  }

  absl::StatusOr<double> thm1 = BoundThm1(probs->p_bar, e.M());
  if (thm1.ok()) {
    r.thm1 = *thm1;
  } else if (absl::IsOutOfRange(thm1.status())) {
    r.thm1 = 1.0;
  } else {
    return thm1.status();
  }

  absl::StatusOr<double> cor1 = BoundCor1(e);
  if (!cor1.ok()) return cor1.status();
  r.cor1 = *cor1;

  if (e.M() % 2 == 1) {
    absl::StatusOr<double> thm3 = ExpansionThm3(e);
    if (!thm3.ok()) return thm3.status();
    r.thm3_expansion = *thm3;
  } else {
    r.thm3_expansion = std::numeric_limits<double>::quiet_NaN();
  }

  absl::StatusOr<double> delta = DeltaM(e.M(), c);
  if (!delta.ok()) return delta.status();
  r.delta_m = *delta;
  return r;
}

}  // namespace stosign
