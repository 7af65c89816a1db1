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


#ifndef STOSIGN_DATA_H_
#define STOSIGN_DATA_H_

// Synthetic datasets and their assignment to workers.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "stosign/model.h"
#include "stosign/vectors.h"

namespace stosign {

enum class DatasetKind { kGaussianMixture, kLinear, kQuadratic };

absl::StatusOr<DatasetKind> ParseDatasetKind(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussianMixture;
  // Total samples before the 80/20 train/test split.
  int num_samples = 1000;
  int input_dim = 2;
  // Gaussian mixture only.
  int num_classes = 2;
  // Distance scale between class means (mixture) or weight scale (linear).
  double separation = 3.0;
  // Standard deviation of per-sample noise.
  double noise = 1.0;
  // Quadratic only: one anchor per normal worker.
  std::vector<double> anchors;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
  int num_classes = 0;
};

// Mixture: class means are separation * N(0, I); each sample is its class mean
// plus noise * N(0, I), with classes balanced. Linear: x ~ N(0, I),
// y = w* . x + noise * N(0, 1) with w* = separation * N(0, I) / sqrt(D).
// The split is a seeded shuffle, first 80% to train. Not used for quadratic.
absl::StatusOr<Dataset> SynthesizeDataset(const DatasetSpec& spec,
                                          uint64_t seed);

using WorkerPartition = std::vector<std::vector<Sample>>;

// Label-skewed assignment. Each worker gets n distinct labels and up to
// floor(N / (M n)) samples of each, drawn without replacement. Labels are
// dealt from a shuffled cyclic sequence, so every label is held by the same
// number of workers up to one. When a label cannot cover all its holders, each
// holder's share is reduced evenly.
absl::StatusOr<WorkerPartition> PartitionByLabel(std::span<const Sample> data,
                                                 int num_classes, int M, int n,
                                                 RngStream& stream);

// Shuffled near-equal split, for regression data or when labels do not matter.
absl::StatusOr<WorkerPartition> PartitionIid(std::span<const Sample> data,
                                             int M, RngStream& stream);

// Worker m holds the single sample x = [a_m], so its loss is (w - a_m)^2 / 2
// and the global minimizer is mean(a).
absl::StatusOr<WorkerPartition> QuadraticWorkers(std::span<const double> a);

}  // namespace stosign

#endif  // STOSIGN_DATA_H_
