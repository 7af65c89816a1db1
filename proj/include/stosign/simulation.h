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


#ifndef STOSIGN_SIMULATION_H_
#define STOSIGN_SIMULATION_H_

// The federated round loop. Every worker applies the same broadcast, so one
// shared weight vector stands in for all of them.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "stosign/aggregation.h"
#include "stosign/compressors.h"
#include "stosign/data.h"
#include "stosign/model.h"
#include "stosign/schedule.h"
#include "stosign/vectors.h"

namespace stosign {

enum class Algorithm {
  kSign,
  kSto,
  kDp,
  kDpTopk,
  kEfSto,
  kEfDp,
  kFullPrecision,
};

absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name);
const char* AlgorithmName(Algorithm a);
bool UsesDp(Algorithm a);
bool UsesErrorFeedback(Algorithm a);
bool UsesStoScale(Algorithm a);

enum class Aggregator { kMajority, kWeighted };

// What the attackers negate: the mean of this round's normal gradients, or
// the true full-dataset gradient (the worst case).
enum class ByzantineKnowledge { kMeanOfNormals, kTrueFullGradient };

struct DpSettings {
  DpMechanism mechanism = DpMechanism::kGaussian;
  double epsilon = 0.0;
  double delta = 0.0;
  // Per-sample L2 clip; also taken as the L2 sensitivity.
  double clip = 0.0;
  // Gaussian only: use this sigma instead of calibrating from (eps, delta).
  std::optional<double> sigma;
  double topk_fraction = 0.1;
  // dp-topk: the server ignores coordinates a worker did not keep instead of
  // counting their coin-flip signs.
  bool skip_untransmitted = false;
};

struct SimulationConfig {
  uint64_t seed = 0;
  Algorithm algorithm = Algorithm::kSto;
  Aggregator aggregator = Aggregator::kMajority;
  int byzantine_count = 0;
  ByzantineKnowledge knowledge = ByzantineKnowledge::kTrueFullGradient;
  ModelSpec model;
  LrSchedule lr;
  ScaleMode b_mode = ScaleMode::kFixedScalar;
  double b_value = 1.0;
  DpSettings dp;
  int64_t rounds = 1;
  // 0 means each worker uses its whole local dataset every round.
  int64_t batch_size = 0;
  // 0 means one thread per hardware core.
  int threads = 1;
  double init_scale = 0.0;
};

struct RoundMetrics {
  int64_t round = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  // Share of coordinates where the broadcast differs from sign(grad F).
  double wrong_agg_frac = 0.0;
  uint64_t uplink_bits = 0;
  uint64_t downlink_bits = 0;
  double lr = 0.0;
};

class Simulation {
 public:
  // `workers` holds the local data of the normal workers, one entry each.
  // Byzantine workers hold no data.
  static absl::StatusOr<Simulation> Create(SimulationConfig config,
                                           WorkerPartition workers,
                                           std::vector<Sample> test);

  // Runs one round. Losses and accuracies are measured after the update;
  // wrong_agg_frac compares against the gradient before it.
  absl::StatusOr<RoundMetrics> Step();

  // Runs the remaining rounds.
  absl::StatusOr<std::vector<RoundMetrics>> Run();

  int64_t round() const { return round_; }
  size_t dim() const { return weights_.size(); }
  int num_normal() const { return static_cast<int>(workers_.size()); }
  int num_voters() const { return num_normal() + config_.byzantine_count; }
  const SimulationConfig& config() const { return config_; }

  const GradientVector& weights() const { return weights_; }
  void set_weights(GradientVector w) { weights_ = std::move(w); }

  // Voters are ordered normal workers first, then attackers.
  const CreditLedger& credits() const { return ledger_; }
  const ResidualState& residual() const { return residual_; }
  const SignVector& last_broadcast() const { return last_broadcast_; }

  // sigma (Gaussian) or lambda (Laplace) for DP algorithms, else 0.
  double dp_scale() const { return dp_scale_; }

  // Bits one voter sends per round.
  uint64_t UplinkBitsPerVoter() const;

  // Full local gradient of each normal worker at the current weights.
  absl::StatusOr<std::vector<GradientVector>> FullWorkerGradients() const;

  // grad F = mean of the normal workers' full local gradients.
  absl::StatusOr<GradientVector> TrueGradient() const;

  // F = mean of the normal workers' mean local losses.
  double TrainLoss() const;

 private:
  struct BatchState {
    std::vector<size_t> order;
    size_t cursor = 0;
    int64_t epoch = -1;
  };

  Simulation() = default;

  std::vector<size_t> NextBatch(size_t m);
  GradientVector LocalGradient(size_t m, const std::vector<size_t>& batch,
                               bool clip) const;
  absl::Status Evaluate(RoundMetrics& metrics) const;

  SimulationConfig config_;
  WorkerPartition workers_;
  std::vector<Sample> test_;
  std::vector<BatchState> batches_;
  GradientVector weights_;
  CreditLedger ledger_;
  ResidualState residual_;
  SignVector last_broadcast_;
  double dp_scale_ = 0.0;
  int64_t round_ = 0;
  int threads_ = 1;
};

}  // namespace stosign

#endif  // STOSIGN_SIMULATION_H_
