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


#include "stosign/data.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_format.h"

namespace stosign {
namespace {

template <typename T>
void Shuffle(std::vector<T>& v, RngStream& stream) {
  std::shuffle(v.begin(), v.end(), stream);
}

}  // namespace

absl::StatusOr<DatasetKind> ParseDatasetKind(std::string_view name) {
  if (name == "gaussian-mixture") return DatasetKind::kGaussianMixture;
  if (name == "linear") return DatasetKind::kLinear;
  if (name == "quadratic") return DatasetKind::kQuadratic;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown dataset kind \"%s\"", std::string(name)));
}

absl::StatusOr<Dataset> SynthesizeDataset(const DatasetSpec& spec,
                                          uint64_t seed) {
  if (spec.kind == DatasetKind::kQuadratic) {
    return absl::InvalidArgumentError(
        "quadratic instances are built from anchors, not synthesized");
  }
  if (spec.num_samples < 2) {
    return absl::InvalidArgumentError("dataset needs at least 2 samples");
  }
  if (spec.input_dim < 1) {
    return absl::InvalidArgumentError("input_dim must be >= 1");
  }
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.separation)) {
    return absl::InvalidArgumentError("noise must be >= 0, separation finite");
  }
  const size_t D = spec.input_dim;
  RngStream data = DeriveStream(seed, 0, 0, StreamPurpose::kData);
  std::vector<Sample> all(spec.num_samples);
  Dataset out;

  if (spec.kind == DatasetKind::kGaussianMixture) {
    if (spec.num_classes < 2) {
      return absl::InvalidArgumentError("mixture needs at least 2 classes");
    }
    const size_t K = spec.num_classes;
    std::vector<std::vector<double>> means(K, std::vector<double>(D));
    for (auto& mean : means) {
      for (double& v : mean) v = spec.separation * data.Gaussian();
    }
    for (size_t i = 0; i < all.size(); ++i) {
      const size_t label = i % K;
      all[i].y = static_cast<double>(label);
      all[i].x.resize(D);
      for (size_t j = 0; j < D; ++j) {
        all[i].x[j] = means[label][j] + spec.noise * data.Gaussian();
      }
    }
    out.num_classes = spec.num_classes;
  } else {
    std::vector<double> w(D);
    const double scale = spec.separation / std::sqrt(static_cast<double>(D));
    for (double& v : w) v = scale * data.Gaussian();
    for (Sample& s : all) {
      s.x.resize(D);
      for (double& v : s.x) v = data.Gaussian();
      double y = 0.0;
      for (size_t j = 0; j < D; ++j) y += w[j] * s.x[j];
      s.y = y + spec.noise * data.Gaussian();
    }
    out.num_classes = 0;
  }

  RngStream split = DeriveStream(seed, 0, 0, StreamPurpose::kSplit);
  Shuffle(all, split);
  const size_t n_train = all.size() * 4 / 5;
  out.train.assign(std::make_move_iterator(all.begin()),
                   std::make_move_iterator(all.begin() + n_train));
  out.test.assign(std::make_move_iterator(all.begin() + n_train),
                  std::make_move_iterator(all.end()));
  return out;
}

absl::StatusOr<WorkerPartition> PartitionByLabel(std::span<const Sample> data,
                                                 int num_classes, int M, int n,
                                                 RngStream& stream) {
  if (M < 1) return absl::InvalidArgumentError("M must be >= 1");
  if (num_classes < 1) {
    return absl::InvalidArgumentError("label partitioning needs labels");
  }
  if (n < 1 || n > num_classes) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "labels_per_worker must be in [1, %d], got %d", num_classes, n));
  }
  const size_t L = num_classes;
  std::vector<std::vector<size_t>> pool(L);
  for (size_t i = 0; i < data.size(); ++i) {
    const double y = data[i].y;
    if (y < 0 || y >= num_classes || y != std::floor(y)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "sample %d has label %g outside [0, %d)", i, y, num_classes));
    }
    pool[static_cast<size_t>(y)].push_back(i);
  }
  for (auto& p : pool) Shuffle(p, stream);

  std::vector<size_t> order(L);
  std::iota(order.begin(), order.end(), size_t{0});
  Shuffle(order, stream);
  std::vector<std::vector<size_t>> labels(M);
  std::vector<size_t> holders(L, 0);
  for (size_t m = 0; m < static_cast<size_t>(M); ++m) {
    for (size_t j = 0; j < static_cast<size_t>(n); ++j) {
      const size_t label = order[(m * n + j) % L];
      labels[m].push_back(label);
      ++holders[label];
    }
  }

  const size_t target = data.size() / (static_cast<size_t>(M) * n);
  std::vector<size_t> share(L, target);
  for (size_t l = 0; l < L; ++l) {
    if (holders[l] == 0) continue;
    share[l] = std::min(target, pool[l].size() / holders[l]);
    if (share[l] == 0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "label %d has %d samples for %d workers; demand is infeasible", l,
          pool[l].size(), holders[l]));
    }
  }

  WorkerPartition out(M);
  std::vector<size_t> cursor(L, 0);
  for (size_t m = 0; m < static_cast<size_t>(M); ++m) {
    for (size_t label : labels[m]) {
      for (size_t k = 0; k < share[label]; ++k) {
        out[m].push_back(data[pool[label][cursor[label]++]]);
      }
    }
  }
  return out;
}

absl::StatusOr<WorkerPartition> PartitionIid(std::span<const Sample> data,
                                             int M, RngStream& stream) {
  if (M < 1) return absl::InvalidArgumentError("M must be >= 1");
  if (data.size() < static_cast<size_t>(M)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%d samples cannot cover %d workers", data.size(), M));
  }
  std::vector<size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Shuffle(idx, stream);
  WorkerPartition out(M);
  for (size_t i = 0; i < idx.size(); ++i) out[i % M].push_back(data[idx[i]]);
  return out;
}

absl::StatusOr<WorkerPartition> QuadraticWorkers(std::span<const double> a) {
  if (a.empty()) return absl::InvalidArgumentError("need at least one anchor");
  if (absl::Status s = ValidateGradient(a); !s.ok()) return s;
  WorkerPartition out(a.size());
  for (size_t m = 0; m < a.size(); ++m) {
    out[m].push_back(Sample{{a[m]}, 0.0});
  }
  return out;
}

}  // namespace stosign
