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


#ifndef STOSIGN_CLI_H_
#define STOSIGN_CLI_H_

// JSON experiment configs, metrics output, the bounds sweep and the privacy
// report behind the stosign command-line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "stosign/experiment.h"

namespace stosign {

// Environment variable naming the default output directory.
inline constexpr char kOutputDirEnv[] = "STOSIGN_OUTPUT_DIR";

inline constexpr char kMetricsCsvHeader[] =
    "round,train_loss,test_loss,train_acc,test_acc,wrong_agg_frac,"
    "uplink_bits,downlink_bits,lr";

inline constexpr char kBoundsCsvHeader[] =
    "M,b,sum_u,exact,mc_estimate,mc_se,thm1,cor1,thm3_expansion,delta_M";

// Strict parse: unknown keys, keys the algorithm does not use, and missing
// required keys are all errors. Every problem is reported, each prefixed by
// its dotted field path, joined with "; ". `default_output_dir` applies when
// output.dir is absent.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    std::string_view json_text, const std::string& default_output_dir);

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);

// Value of STOSIGN_OUTPUT_DIR, or "." when unset.
std::string DefaultOutputDir();

std::string FormatMetricsCsv(const std::vector<RoundMetrics>& rounds);

std::string FormatSummaryJson(const ExperimentConfig& config,
                              const ExperimentResult& result);

// Writes the CSV and the summary into config.output.dir, creating it.
absl::Status WriteRunOutputs(const ExperimentConfig& config,
                             const ExperimentResult& result);

struct BoundsSweep {
  uint64_t seed = 0;
  int64_t mc_trials = 10000;
  double c = 0.1;
  std::vector<int> M;
  std::vector<double> b;
  // Random ensembles per M, u_m uniform on [-u_max, u_max].
  int ensembles = 1;
  double u_max = 1.0;
  // Replaces the random ensembles with one fixed u; M is then its length.
  std::optional<std::vector<double>> fixed_u;
};

absl::StatusOr<BoundsSweep> ParseBoundsSweep(std::string_view json_text);

// One CSV row per (M, ensemble, b), with kBoundsCsvHeader first. Vacuous
// thm1 bounds print as 1; thm3_expansion is nan for even M.
absl::StatusOr<std::string> RunBoundsSweep(const BoundsSweep& sweep);

struct PrivacyReport {
  double mu = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
};

// mu after composing `rounds` Gaussian mechanisms with L2 sensitivity `clip`,
// and the epsilon it gives at `delta`.
absl::StatusOr<PrivacyReport> ComputePrivacyReport(double sigma, double clip,
                                                   int64_t rounds,
                                                   double delta);

}  // namespace stosign

#endif  // STOSIGN_CLI_H_
