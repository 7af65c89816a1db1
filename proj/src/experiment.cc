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


#include "stosign/experiment.h"

#include <utility>

#include "absl/strings/str_format.h"

namespace stosign {

absl::StatusOr<Simulation> BuildSimulation(const ExperimentConfig& config) {
  const uint64_t seed = config.sim.seed;
  WorkerPartition workers;
  std::vector<Sample> test;
  SimulationConfig sim = config.sim;

  if (config.dataset.kind == DatasetKind::kQuadratic) {
    if (config.dataset.anchors.size() !=
        static_cast<size_t>(config.num_workers)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("dataset.anchors has %d entries but M = %d",
                          config.dataset.anchors.size(), config.num_workers));
    }
    absl::StatusOr<WorkerPartition> w =
        QuadraticWorkers(config.dataset.anchors);
    if (!w.ok()) return w.status();
    workers = std::move(*w);
    for (const auto& local : workers) test.push_back(local.front());
    sim.model.input_dim = 1;
    sim.model.num_classes = 0;
  } else {
    absl::StatusOr<Dataset> data = SynthesizeDataset(config.dataset, seed);
    if (!data.ok()) return data.status();
    RngStream part = DeriveStream(seed, 0, 0, StreamPurpose::kPartition);
    absl::StatusOr<WorkerPartition> w =
        config.labels_per_worker > 0
            ? PartitionByLabel(data->train, data->num_classes,
                               config.num_workers, config.labels_per_worker,
                               part)
            : PartitionIid(data->train, config.num_workers, part);
    if (!w.ok()) return w.status();
    workers = std::move(*w);
    test = std::move(data->test);
    sim.model.input_dim = config.dataset.input_dim;
    sim.model.num_classes = data->num_classes;
  }
  return Simulation::Create(std::move(sim), std::move(workers),
                            std::move(test));
}

absl::StatusOr<ExperimentResult> RunSimulation(Simulation& sim) {
  absl::StatusOr<std::vector<RoundMetrics>> rounds = sim.Run();
  if (!rounds.ok()) return rounds.status();
  ExperimentResult out;
  out.rounds = std::move(*rounds);
  out.dim = sim.dim();
  out.num_voters = sim.num_voters();
  out.dp_scale = sim.dp_scale();
  out.uplink_bits_per_voter = sim.UplinkBitsPerVoter();
  out.final_weights = sim.weights();
  out.final_credits = sim.credits().credits;
  return out;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config) {
  absl::StatusOr<Simulation> sim = BuildSimulation(config);
  if (!sim.ok()) return sim.status();
  return RunSimulation(*sim);
}

}  // namespace stosign
