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


#include "stosign/model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_format.h"

namespace stosign {
namespace {

double Dot(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// logits[k] = W[k] . x + bias[k], with W stored as K rows of length n.
void Affine(const double* W, const double* bias, const double* x, size_t n,
            size_t K, double* logits) {
  for (size_t k = 0; k < K; ++k) logits[k] = Dot(W + k * n, x, n) + bias[k];
}

// Returns the log-sum-exp and overwrites logits with softmax probabilities.
double Softmax(std::span<double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    sum += z;
  }
  for (double& z : logits) z /= sum;
  return top + std::log(sum);
}

struct MlpShape {
  size_t D, H, K;
  size_t w1() const { return 0; }
  size_t b1() const { return H * D; }
  size_t w2() const { return H * D + H; }
  size_t b2() const { return H * D + H + K * H; }
};

MlpShape ShapeOf(const ModelSpec& spec) {
  return MlpShape{static_cast<size_t>(spec.input_dim),
                  static_cast<size_t>(spec.hidden),
                  static_cast<size_t>(spec.num_classes)};
}

// Hidden activations and logits of the MLP.
void MlpForward(const MlpShape& s, const double* w, const double* x,
                std::vector<double>& pre, std::vector<double>& hidden,
                std::vector<double>& logits) {
  pre.resize(s.H);
  hidden.resize(s.H);
  logits.resize(s.K);
  Affine(w + s.w1(), w + s.b1(), x, s.D, s.H, pre.data());
  for (size_t h = 0; h < s.H; ++h) hidden[h] = std::max(pre[h], 0.0);
  Affine(w + s.w2(), w + s.b2(), hidden.data(), s.H, s.K, logits.data());
}

std::vector<double> Logits(const ModelSpec& spec, std::span<const double> w,
                           const Sample& s) {
  const size_t D = spec.input_dim;
  const size_t K = spec.num_classes;
  std::vector<double> logits(K);
  if (spec.kind == ModelKind::kLogisticRegression) {
    Affine(w.data(), w.data() + K * D, s.x.data(), D, K, logits.data());
  } else {
    std::vector<double> pre, hidden;
    MlpForward(ShapeOf(spec), w.data(), s.x.data(), pre, hidden, logits);
  }
  return logits;
}

}  // namespace

absl::StatusOr<ModelKind> ParseModelKind(std::string_view name) {
  if (name == "scalar-quadratic") return ModelKind::kScalarQuadratic;
  if (name == "linear-regression") return ModelKind::kLinearRegression;
  if (name == "logistic-regression") return ModelKind::kLogisticRegression;
  if (name == "mlp-1-hidden") return ModelKind::kMlp;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown model kind \"%s\"", std::string(name)));
}

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kScalarQuadratic:
      return "scalar-quadratic";
    case ModelKind::kLinearRegression:
      return "linear-regression";
    case ModelKind::kLogisticRegression:
      return "logistic-regression";
    case ModelKind::kMlp:
      return "mlp-1-hidden";
  }
  return "unknown";
}

size_t ModelSpec::NumParams() const {
  const size_t D = input_dim;
  const size_t K = num_classes;
  const size_t H = hidden;
  switch (kind) {
    case ModelKind::kScalarQuadratic:
      return D;
    case ModelKind::kLinearRegression:
      return D + 1;
    case ModelKind::kLogisticRegression:
      return K * D + K;
    case ModelKind::kMlp:
      return H * D + H + K * H + K;
  }
  return 0;
}

absl::Status ModelSpec::Validate() const {
  if (input_dim < 1)
    return absl::InvalidArgumentError("input_dim must be >= 1");
  if (IsClassifier() && num_classes < 2) {
    return absl::InvalidArgumentError(
        "classification models need at least 2 classes");
  }
  if (kind == ModelKind::kMlp && hidden < 1) {
    return absl::InvalidArgumentError("mlp-1-hidden needs hidden >= 1");
  }
  return absl::OkStatus();
}

absl::Status ModelSpec::ValidateSample(const Sample& s) const {
  if (s.x.size() != static_cast<size_t>(input_dim)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sample has %d features, model expects %d", s.x.size(), input_dim));
  }
  if (absl::Status st = ValidateGradient(s.x); !st.ok()) return st;
  if (!std::isfinite(s.y)) {
    return absl::InvalidArgumentError("sample target is not finite");
  }
  if (IsClassifier()) {
    if (s.y != std::floor(s.y) || s.y < 0 || s.y >= num_classes) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "label %g is not a class in [0, %d)", s.y, num_classes));
    }
  }
  return absl::OkStatus();
}

double SampleLoss(const ModelSpec& spec, std::span<const double> w,
                  const Sample& s) {
  const size_t D = spec.input_dim;
  switch (spec.kind) {
    case ModelKind::kScalarQuadratic: {
      double sum = 0.0;
      for (size_t i = 0; i < D; ++i) {
        const double r = w[i] - s.x[i];
        sum += r * r;
      }
      return 0.5 * sum;
    }
    case ModelKind::kLinearRegression: {
      const double r = Dot(w.data(), s.x.data(), D) + w[D] - s.y;
      return 0.5 * r * r;
    }
    case ModelKind::kLogisticRegression:
    case ModelKind::kMlp: {
      std::vector<double> logits = Logits(spec, w, s);
      const double z = logits[static_cast<size_t>(s.y)];
      return Softmax(logits) - z;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void AddSampleGradient(const ModelSpec& spec, std::span<const double> w,
                       const Sample& s, double weight, std::span<double> grad) {
  const size_t D = spec.input_dim;
  switch (spec.kind) {
    case ModelKind::kScalarQuadratic:
      for (size_t i = 0; i < D; ++i) grad[i] += weight * (w[i] - s.x[i]);
      return;
    case ModelKind::kLinearRegression: {
      const double r = Dot(w.data(), s.x.data(), D) + w[D] - s.y;
      for (size_t i = 0; i < D; ++i) grad[i] += weight * r * s.x[i];
      grad[D] += weight * r;
      return;
    }
    case ModelKind::kLogisticRegression: {
      const size_t K = spec.num_classes;
      std::vector<double> p = Logits(spec, w, s);
      Softmax(p);
      p[static_cast<size_t>(s.y)] -= 1.0;
      for (size_t k = 0; k < K; ++k) {
        const double c = weight * p[k];
        double* row = grad.data() + k * D;
        for (size_t i = 0; i < D; ++i) row[i] += c * s.x[i];
        grad[K * D + k] += c;
      }
      return;
    }
    case ModelKind::kMlp: {
      const MlpShape sh = ShapeOf(spec);
      std::vector<double> pre, hidden, p;
      MlpForward(sh, w.data(), s.x.data(), pre, hidden, p);
      Softmax(p);
      p[static_cast<size_t>(s.y)] -= 1.0;
      std::vector<double> dh(sh.H, 0.0);
      for (size_t k = 0; k < sh.K; ++k) {
        const double c = weight * p[k];
        const double* w2 = w.data() + sh.w2() + k * sh.H;
        double* g2 = grad.data() + sh.w2() + k * sh.H;
        for (size_t h = 0; h < sh.H; ++h) {
          g2[h] += c * hidden[h];
          dh[h] += c * w2[h];
        }
        grad[sh.b2() + k] += c;
      }
      for (size_t h = 0; h < sh.H; ++h) {
        if (pre[h] <= 0.0) continue;
        double* g1 = grad.data() + sh.w1() + h * sh.D;
        for (size_t i = 0; i < sh.D; ++i) g1[i] += dh[h] * s.x[i];
        grad[sh.b1() + h] += dh[h];
      }
      return;
    }
  }
}

absl::StatusOr<double> MeanLoss(const ModelSpec& spec,
                                std::span<const double> w,
                                std::span<const Sample> batch) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  if (w.size() != spec.NumParams()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "model has %d parameters, got %d", spec.NumParams(), w.size()));
  }
  double sum = 0.0;
  for (const Sample& s : batch) sum += SampleLoss(spec, w, s);
  return sum / static_cast<double>(batch.size());
}

absl::StatusOr<GradientVector> MeanGradient(const ModelSpec& spec,
                                            std::span<const double> w,
                                            std::span<const Sample> batch) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  if (w.size() != spec.NumParams()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "model has %d parameters, got %d", spec.NumParams(), w.size()));
  }
  GradientVector grad(w.size(), 0.0);
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const Sample& s : batch) AddSampleGradient(spec, w, s, weight, grad);
  return grad;
}

double Accuracy(const ModelSpec& spec, std::span<const double> w,
                std::span<const Sample> batch) {
  if (!spec.IsClassifier() || batch.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  size_t correct = 0;
  for (const Sample& s : batch) {
    std::vector<double> logits = Logits(spec, w, s);
    const auto best = static_cast<size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == static_cast<size_t>(s.y)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

GradientVector InitParams(const ModelSpec& spec, double scale,
                          RngStream& stream) {
  GradientVector w(spec.NumParams(), 0.0);
  if (scale == 0.0) return w;
  for (double& v : w) v = scale * stream.Gaussian();
  return w;
}

}  // namespace stosign
