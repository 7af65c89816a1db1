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


#ifndef STOSIGN_EXPERIMENT_H_
#define STOSIGN_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "stosign/data.h"
#include "stosign/simulation.h"

namespace stosign {

struct OutputSpec {
  std::string dir = ".";
  std::string csv = "metrics.csv";
  std::string summary = "summary.json";
};

struct ExperimentConfig {
  SimulationConfig sim;
  // Normal workers.
  int num_workers = 1;
  DatasetSpec dataset;
  // 0 splits the training data uniformly at random.
  int labels_per_worker = 0;
  // Rounds composed in the privacy report; 0 means all rounds.
  int64_t accounting_rounds = 0;
  // Delta at which the summary converts mu to epsilon.
  double report_delta = 1e-5;
  OutputSpec output;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rounds;
  size_t dim = 0;
  int num_voters = 0;
  double dp_scale = 0.0;
  uint64_t uplink_bits_per_voter = 0;
  GradientVector final_weights;
  std::vector<double> final_credits;
};

// Synthesizes and partitions the data and constructs the simulation. All
// randomness derives from config.sim.seed.
absl::StatusOr<Simulation> BuildSimulation(const ExperimentConfig& config);

// Runs the remaining rounds of an already built simulation.
absl::StatusOr<ExperimentResult> RunSimulation(Simulation& sim);

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

}  // namespace stosign

#endif  // STOSIGN_EXPERIMENT_H_
