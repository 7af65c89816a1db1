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


// stosign run <config.json>
// stosign bounds <sweep.json>
// stosign privacy --sigma S --clip C --rounds T [--delta D]
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "stosign/cli.h"
#include "stosign/experiment.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

int Fail(int code, const absl::Status& status) {
  std::cerr << "stosign: " << status.message() << "\n";
  return code;
}

int CmdRun(const std::string& path) {
  absl::StatusOr<stosign::ExperimentConfig> config =
      stosign::LoadExperimentConfig(path);
  if (!config.ok()) return Fail(kExitInvalid, config.status());

  absl::StatusOr<stosign::Simulation> sim = stosign::BuildSimulation(*config);
  if (!sim.ok()) return Fail(kExitInvalid, sim.status());
  absl::StatusOr<stosign::ExperimentResult> result =
      stosign::RunSimulation(*sim);
  if (!result.ok()) return Fail(kExitRuntime, result.status());
  if (absl::Status s = stosign::WriteRunOutputs(*config, *result); !s.ok()) {
    return Fail(kExitRuntime, s);
  }
  const stosign::RoundMetrics& last = result->rounds.back();
  std::cout << absl::StrFormat(
      "%d rounds, final train_loss %.6g, wrote %s/%s and %s/%s\n", last.round,
      last.train_loss, config->output.dir, config->output.csv,
      config->output.dir, config->output.summary);
  return kExitOk;
}

int CmdBounds(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return Fail(kExitInvalid, absl::NotFoundError(absl::StrFormat(
                                  "cannot open sweep file %s", path)));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  absl::StatusOr<stosign::BoundsSweep> sweep =
      stosign::ParseBoundsSweep(buf.str());
  if (!sweep.ok()) return Fail(kExitInvalid, sweep.status());
  absl::StatusOr<std::string> csv = stosign::RunBoundsSweep(*sweep);
  if (!csv.ok()) {
    const int code =
        absl::IsInvalidArgument(csv.status()) ? kExitInvalid : kExitRuntime;
    return Fail(code, csv.status());
  }
  std::cout << *csv;
  return kExitOk;
}

int CmdPrivacy(double sigma, double clip, int64_t rounds, double delta) {
  absl::StatusOr<stosign::PrivacyReport> r =
      stosign::ComputePrivacyReport(sigma, clip, rounds, delta);
  if (!r.ok()) return Fail(kExitInvalid, r.status());
  std::cout << absl::StrFormat("mu=%.6f\nepsilon=%.6f\ndelta=%g\n", r->mu,
                               r->epsilon, r->delta);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign-based federated learning simulator"};
  app.require_subcommand(1);

  std::string run_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", run_path, "Experiment JSON")->required();

  std::string bounds_path;
  CLI::App* bounds =
      app.add_subcommand("bounds", "Tabulate bounds against the exact oracle");
  bounds->add_option("sweep", bounds_path, "Sweep JSON")->required();

  double sigma = 0.0;
  double clip = 0.0;
  int64_t rounds = 0;
  double delta = 1e-5;
  CLI::App* privacy =
      app.add_subcommand("privacy", "Compose Gaussian DP over rounds");
  privacy->add_option("--sigma", sigma, "Noise scale")->required();
  privacy->add_option("--clip", clip, "Clip threshold (L2 sensitivity)")
      ->required();
  privacy->add_option("--rounds", rounds, "Composed rounds")->required();
  privacy->add_option("--delta", delta, "Target delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (*run) return CmdRun(run_path);
  if (*bounds) return CmdBounds(bounds_path);
  if (*privacy) return CmdPrivacy(sigma, clip, rounds, delta);
  return kExitInvalid;
}
