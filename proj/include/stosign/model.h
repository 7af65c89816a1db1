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


#ifndef STOSIGN_MODEL_H_
#define STOSIGN_MODEL_H_

// Small differentiable models with analytic gradients.
//
// Parameter layouts (row-major):
//   scalar-quadratic     w[D]; per-sample loss |w - x|^2 / 2
//   linear-regression    w[D], bias; squared loss (w.x + bias - y)^2 / 2
//   logistic-regression  W[K][D], bias[K]; softmax cross-entropy
//   mlp-1-hidden         W1[H][D], b1[H], W2[K][H], b2[K]; ReLU hidden layer,
//                        softmax cross-entropy

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "stosign/vectors.h"

namespace stosign {

enum class ModelKind {
  kScalarQuadratic,
  kLinearRegression,
  kLogisticRegression,
  kMlp,
};

absl::StatusOr<ModelKind> ParseModelKind(std::string_view name);
const char* ModelKindName(ModelKind kind);

// For classification kinds `y` holds the class index.
struct Sample {
  std::vector<double> x;
  double y = 0.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kScalarQuadratic;
  int input_dim = 1;
  // Classification kinds only.
  int num_classes = 0;
  // mlp-1-hidden only.
  int hidden = 0;

  bool IsClassifier() const {
    return kind == ModelKind::kLogisticRegression || kind == ModelKind::kMlp;
  }
  size_t NumParams() const;
  absl::Status Validate() const;
  // Checks feature length and label range.
  absl::Status ValidateSample(const Sample& s) const;
};

double SampleLoss(const ModelSpec& spec, std::span<const double> w,
                  const Sample& s);

// grad += weight * d(loss)/dw for one sample.
void AddSampleGradient(const ModelSpec& spec, std::span<const double> w,
                       const Sample& s, double weight, std::span<double> grad);

absl::StatusOr<double> MeanLoss(const ModelSpec& spec,
                                std::span<const double> w,
                                std::span<const Sample> batch);

absl::StatusOr<GradientVector> MeanGradient(const ModelSpec& spec,
                                            std::span<const double> w,
                                            std::span<const Sample> batch);

// Fraction of correctly classified samples; NaN for regression kinds and for
// an empty batch.
double Accuracy(const ModelSpec& spec, std::span<const double> w,
                std::span<const Sample> batch);

// Entries are scale * N(0, 1); scale = 0 gives the zero vector.
GradientVector InitParams(const ModelSpec& spec, double scale,
                          RngStream& stream);

}  // namespace stosign

#endif  // STOSIGN_MODEL_H_
