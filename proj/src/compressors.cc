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

#include "stosign/compressors.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_format.h"
#include "stosign/kernels.h"
#include "stosign/normal.h"

namespace stosign {
namespace {

double L2Norm(std::span<const double> g) {
  double sum = 0.0;
  for (double v : g) sum += v * v;
  return std::sqrt(sum);
}

size_t TopKCount(size_t d, double fraction) {
  if (d == 0) return 0;
  // The small slack keeps fraction * d from rounding up past an integer.
  const double raw = std::ceil(fraction * static_cast<double>(d) - 1e-9);
  return std::clamp<size_t>(static_cast<size_t>(std::max(raw, 1.0)), 1, d);
}

}  // namespace

absl::StatusOr<StoSignParams> StoSignParams::Fixed(double b, size_t d) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sto-sign scale b must be positive, got %g", b));
  }
  return StoSignParams{std::vector<double>(d, b), ScaleMode::kFixedScalar};
}

absl::StatusOr<StoSignParams> StoSignParams::OracleMax(
    std::span<const GradientVector> normal_gradients) {
  if (normal_gradients.empty()) {
    return absl::InvalidArgumentError("oracle-max b needs at least one worker");
  }
  const size_t d = normal_gradients.front().size();
  std::vector<double> b(d, 0.0);
  for (const GradientVector& g : normal_gradients) {
    if (g.size() != d) {
      return absl::InvalidArgumentError(
          "oracle-max b: worker gradients differ in length");
    }
    for (size_t i = 0; i < d; ++i) b[i] = std::max(b[i], std::abs(g[i]));
  }
  for (double& v : b) {
    if (v == 0.0) v = 1.0;
  }
  return StoSignParams{std::move(b), ScaleMode::kOracleMax};
}

absl::StatusOr<StoSignParams> StoSignParams::TheorySchedule(int64_t rounds,
                                                            size_t d) {
  if (rounds < 1 || d == 0) {
    return absl::InvalidArgumentError(
        "theory-schedule b needs rounds >= 1 and d >= 1");
  }
  const double b = std::pow(static_cast<double>(rounds), 0.25) *
                   std::pow(static_cast<double>(d), 0.25);
  return StoSignParams{std::vector<double>(d, b), ScaleMode::kTheorySchedule};
}

absl::Status StoSignParams::Validate() const {
  for (size_t i = 0; i < b.size(); ++i) {
    if (!(b[i] > 0.0) || !std::isfinite(b[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("b[%d] = %g; every b_i must be positive", i, b[i]));
    }
  }
  return absl::OkStatus();
}

absl::Status DpSignParams::Validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dp-sign scale must be positive, got %g", scale));
  }
  return absl::OkStatus();
}

absl::StatusOr<SignVector> SignCompress(std::span<const double> g) {
  std::vector<int8_t> out(g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    if (std::isnan(g[i])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("gradient entry %d is NaN", i));
    }
    out[i] = g[i] >= 0.0 ? 1 : -1;
  }
  return SignVector::Adopt(std::move(out));
}

absl::StatusOr<double> MappingProbability(double g, double b) {
  if (!(b > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sto-sign scale b must be positive, got %g", b));
  }
  double p;
  kernels::ScalarKernels().sto_sign_probabilities(&g, &b, 1, &p);
  return p;
}

absl::StatusOr<SignVector> StoSign(std::span<const double> g,
                                   const StoSignParams& params,
                                   RngStream& stream) {
  if (params.b.size() != g.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sto-sign: gradient has %d coordinates but b has %d",
                        g.size(), params.b.size()));
  }
  if (absl::Status s = params.Validate(); !s.ok()) return s;
  if (absl::Status s = ValidateGradient(g); !s.ok()) return s;

  const size_t d = g.size();
  const kernels::KernelTable& k = kernels::ActiveKernels();
  std::vector<double> prob(d);
  k.sto_sign_probabilities(g.data(), params.b.data(), d, prob.data());
  std::vector<double> uniform(d);
  for (double& u : uniform) u = stream.Uniform();
  std::vector<int8_t> out(d);
  k.threshold_signs(prob.data(), uniform.data(), d, out.data());
  return SignVector::Adopt(std::move(out));
}

absl::StatusOr<double> DpSignProbability(double g, const DpSignParams& params) {
  if (absl::Status s = params.Validate(); !s.ok()) return s;
  if (std::isnan(g)) return absl::InvalidArgumentError("gradient entry is NaN");
  switch (params.mechanism) {
    case DpMechanism::kGaussian:
      return StandardNormalCdf(g / params.scale);
    case DpMechanism::kLaplace: {
      const double tail = -0.5 * std::expm1(-std::abs(g) / params.scale);
      return g >= 0.0 ? 0.5 + tail : 0.5 - tail;
    }
  }
  return absl::InternalError("unknown dp mechanism");
}

absl::StatusOr<SignVector> DpSign(std::span<const double> g,
                                  const DpSignParams& params,
                                  RngStream& stream) {
  if (absl::Status s = params.Validate(); !s.ok()) return s;
  if (absl::Status s = ValidateGradient(g); !s.ok()) return s;
  const size_t d = g.size();
  std::vector<double> prob(d);
  for (size_t i = 0; i < d; ++i) {
    absl::StatusOr<double> p = DpSignProbability(g[i], params);
    if (!p.ok()) return p.status();
    prob[i] = *p;
  }
  std::vector<double> uniform(d);
  for (double& u : uniform) u = stream.Uniform();
  std::vector<int8_t> out(d);
  kernels::ActiveKernels().threshold_signs(prob.data(), uniform.data(), d,
                                           out.data());
  return SignVector::Adopt(std::move(out));
}

absl::StatusOr<std::vector<bool>> TopKSupport(std::span<const double> g,
                                              double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("top-k fraction must be in (0, 1], got %g", fraction));
  }
  const size_t d = g.size();
  const size_t k = TopKCount(d, fraction);
  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), size_t{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](size_t a, size_t b) {
                      const double ma = std::abs(g[a]);
                      const double mb = std::abs(g[b]);
                      return ma != mb ? ma > mb : a < b;
                    });
  std::vector<bool> keep(d, false);
  for (size_t j = 0; j < k; ++j) keep[order[j]] = true;
  return keep;
}

absl::StatusOr<GradientVector> TopKMask(std::span<const double> g,
                                        double fraction) {
  absl::StatusOr<std::vector<bool>> keep = TopKSupport(g, fraction);
  if (!keep.ok()) return keep.status();
  GradientVector out(g.size(), 0.0);
  for (size_t i = 0; i < g.size(); ++i) {
    if ((*keep)[i]) out[i] = g[i];
  }
  return out;
}

absl::StatusOr<GradientVector> ClipL2(std::span<const double> g, double clip) {
  if (!(clip > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("clip threshold must be positive, got %g", clip));
  }
  GradientVector out(g.begin(), g.end());
  const double norm = L2Norm(g);
  if (norm <= clip) return out;
  double scale = clip / norm;
  for (;;) {
    for (size_t i = 0; i < g.size(); ++i) out[i] = g[i] * scale;
    if (L2Norm(out) <= clip) break;
    scale = std::nextafter(scale, 0.0);
  }
  return out;
}

SignVector ByzantineSign(std::span<const double> target) {
  std::vector<int8_t> out(target.size());
  for (size_t i = 0; i < target.size(); ++i) {
    out[i] = target[i] >= 0.0 ? -1 : 1;
  }
  return SignVector::Adopt(std::move(out));
}

}  // namespace stosign
