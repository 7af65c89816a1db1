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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "stosign/analysis.h"
#include "stosign/cli.h"
#include "stosign/privacy.h"

namespace stosign {
namespace {

using nlohmann::json;

// NaN has no JSON spelling; null stands in for it.
json Num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

absl::Status WriteFile(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(
        absl::StrFormat("cannot open %s for writing", path.string()));
  }
  out << text;
  out.close();
  if (!out) {
    return absl::DataLossError(
        absl::StrFormat("failed writing %s", path.string()));
  }
  return absl::OkStatus();
}

}  // namespace

std::string FormatMetricsCsv(const std::vector<RoundMetrics>& rounds) {
  std::string out = absl::StrCat(kMetricsCsvHeader, "\n");
  for (const RoundMetrics& m : rounds) {
    absl::StrAppendFormat(
        &out, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d,%.12g\n", m.round,
        m.train_loss, m.test_loss, m.train_acc, m.test_acc, m.wrong_agg_frac,
        m.uplink_bits, m.downlink_bits, m.lr);
  }
  return out;
}

std::string FormatSummaryJson(const ExperimentConfig& config,
                              const ExperimentResult& result) {
  const SimulationConfig& sim = config.sim;
  json s;
  s["algorithm"] = AlgorithmName(sim.algorithm);
  s["aggregator"] =
      sim.aggregator == Aggregator::kWeighted ? "weighted" : "majority";
  s["seed"] = sim.seed;
  s["M"] = config.num_workers;
  s["byzantine"] = sim.byzantine_count;
  s["d"] = result.dim;
  s["rounds"] = result.rounds.size();

  if (!result.rounds.empty()) {
    const RoundMetrics& f = result.rounds.back();
    s["final"] = {{"round", f.round},
                  {"train_loss", Num(f.train_loss)},
                  {"test_loss", Num(f.test_loss)},
                  {"train_acc", Num(f.train_acc)},
                  {"test_acc", Num(f.test_acc)},
                  {"wrong_agg_frac", Num(f.wrong_agg_frac)},
                  {"lr", Num(f.lr)}};
  }

  uint64_t uplink = 0;
  uint64_t downlink = 0;
  for (const RoundMetrics& m : result.rounds) {
    uplink += m.uplink_bits;
    downlink += m.downlink_bits;
  }
  const uint64_t full_bits = 32 * PayloadBits(result.dim);
  s["bits"] = {{"uplink_total", uplink},
               {"downlink_total", downlink},
               {"uplink_per_worker_per_round", result.uplink_bits_per_voter},
               {"full_precision_per_worker_per_round", full_bits}};
  s["compression_ratio"] =
      result.uplink_bits_per_voter == 0
          ? json(nullptr)
          : json(static_cast<double>(full_bits) /
                 static_cast<double>(result.uplink_bits_per_voter));

  if (UsesDp(sim.algorithm)) {
    json p;
    if (sim.dp.mechanism == DpMechanism::kGaussian) {
      const int64_t window =
          config.accounting_rounds > 0 ? config.accounting_rounds : sim.rounds;
      p["mechanism"] = "gaussian";
      p["sigma"] = result.dp_scale;
      p["clip"] = sim.dp.clip;
      p["accounting_rounds"] = window;
      absl::StatusOr<PrivacyReport> r = ComputePrivacyReport(
          result.dp_scale, sim.dp.clip, window, config.report_delta);
      if (r.ok()) {
        p["mu"] = r->mu;
        p["delta"] = r->delta;
        p["epsilon"] = r->epsilon;
      } else {
        p["error"] = std::string(r.status().message());
      }
    } else {
      p["mechanism"] = "laplace";
      p["lambda"] = result.dp_scale;
      p["clip"] = sim.dp.clip;
      p["epsilon_per_round"] = sim.dp.epsilon;
    }
    s["privacy"] = p;
  } else {
    s["privacy"] = nullptr;
  }
  if (sim.aggregator == Aggregator::kWeighted) {
    s["credits"] = result.final_credits;
  }
  return s.dump(2) + "\n";
}

absl::Status WriteRunOutputs(const ExperimentConfig& config,
                             const ExperimentResult& result) {
  const std::filesystem::path dir(config.output.dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(absl::StrFormat(
        "cannot create output directory %s: %s", dir.string(), ec.message()));
  }
  if (absl::Status s =
          WriteFile(dir / config.output.csv, FormatMetricsCsv(result.rounds));
      !s.ok()) {
    return s;
  }
  return WriteFile(dir / config.output.summary,
                   FormatSummaryJson(config, result));
}

absl::StatusOr<std::string> RunBoundsSweep(const BoundsSweep& sweep) {
  std::string out = absl::StrCat(kBoundsCsvHeader, "\n");
  const std::vector<int> ms =
      sweep.fixed_u.has_value()
          ? std::vector<int>{static_cast<int>(sweep.fixed_u->size())}
          : sweep.M;
  const int ensembles = sweep.fixed_u.has_value() ? 1 : sweep.ensembles;
  double u_bound = sweep.u_max;
  if (sweep.fixed_u.has_value()) {
    u_bound = 0.0;
    for (double v : *sweep.fixed_u) u_bound = std::max(u_bound, std::abs(v));
  }
  for (double b : sweep.b) {
    if (b < u_bound) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "b = %g is below max |u| = %g; the bounds need b >= max |u|", b,
          u_bound));
    }
  }

  for (int M : ms) {
    for (int e = 0; e < ensembles; ++e) {
      ScalarEnsemble ens;
      if (sweep.fixed_u.has_value()) {
        ens.u = *sweep.fixed_u;
      } else {
        RngStream draw = DeriveStream(sweep.seed, e, M, StreamPurpose::kData);
        ens.u.resize(M);
        for (double& v : ens.u) v = sweep.u_max * (2.0 * draw.Uniform() - 1.0);
      }
      for (size_t bi = 0; bi < sweep.b.size(); ++bi) {
        ens.b = sweep.b[bi];
        RngStream mc =
            DeriveStream(sweep.seed, static_cast<int64_t>(e) * 1024 + bi, M,
                         StreamPurpose::kMonteCarlo);
        absl::StatusOr<BoundReport> r =
            EvaluateBounds(ens, sweep.c, sweep.mc_trials, mc);
        if (!r.ok()) return r.status();
        const bool mc_on = sweep.mc_trials > 0;
        const double nan = std::nan("");
        absl::StrAppendFormat(
            &out, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
            M, ens.b, ens.SumU(), r->exact,
            mc_on ? r->monte_carlo.estimate : nan,
            mc_on ? r->monte_carlo.std_error : nan, r->thm1, r->cor1,
            r->thm3_expansion, r->delta_m);
      }
    }
  }
  return out;
}

absl::StatusOr<PrivacyReport> ComputePrivacyReport(double sigma, double clip,
                                                   int64_t rounds,
                                                   double delta) {
  absl::StatusOr<double> mu = ComposeGdp(sigma, clip, rounds);
  if (!mu.ok()) return mu.status();
  absl::StatusOr<double> eps = MuToEps(*mu, delta);
  if (!eps.ok()) return eps.status();
  return PrivacyReport{*mu, *eps, delta};
}

}  // namespace stosign
