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


// Acceptance checks for the simulator. Prints one [PASS]/[FAIL] line per
// criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "absl/strings/str_format.h"
#include "json.hpp"
#include "stosign/aggregation.h"
#include "stosign/analysis.h"
#include "stosign/cli.h"
#include "stosign/compressors.h"
#include "stosign/data.h"
#include "stosign/experiment.h"
#include "stosign/model.h"
#include "stosign/privacy.h"
#include "stosign/simulation.h"

namespace stosign {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome Fail(const absl::Status& s) {
  return {false, std::string(s.message())};
}

ScalarEnsemble DrawEnsemble(int M, RngStream& r) {
  ScalarEnsemble e;
  e.u.resize(M);
  double top = 0;
  for (double& v : e.u) {
    v = 2 * r.Uniform() - 1;
    top = std::max(top, std::abs(v));
  }
  e.b = top * (1 + 2 * r.Uniform());
  return e;
}

Outcome BoundSandwich() {
  const auto start = Clock::now();
  RngStream r = DeriveStream(101, 0, 0, StreamPurpose::kData);
  int checked = 0, violations = 0;
  while (checked < 500) {
    const int M = 1 + 2 * static_cast<int>(r() % 51);
    ScalarEnsemble e = DrawEnsemble(M, r);
    if (e.SumU() == 0) continue;
    absl::StatusOr<WrongProbs> w = StoSignWrongProbs(e);
    if (!w.ok()) return Fail(w.status());
    absl::StatusOr<double> exact = ExactWrongAggregation(w->p, 0);
    absl::StatusOr<double> cor1 = BoundCor1(e);
    absl::StatusOr<double> thm1 = BoundThm1(w->p_bar, M);
    if (!exact.ok() || !cor1.ok() || !thm1.ok()) {
      return {false, "bound evaluation failed"};
    }
    // cor1 equals thm1 at p_bar in exact arithmetic.
    if (*exact > *cor1 || *cor1 > *thm1 * (1 + 1e-12)) ++violations;
    ++checked;
  }
  const double t = Seconds(start);
  return {violations == 0 && t < 10,
          absl::StrFormat("%d ensembles, %d violations, %.2fs", checked,
                          violations, t)};
}

Outcome OracleEquivalence() {
  const auto start = Clock::now();
  const int64_t n = 100000;
  int compared = 0, outside = 0;
  double worst = 0;
  const McCompressor kinds[] = {McCompressor::kStoSign,
                                McCompressor::kDpGaussian,
                                McCompressor::kDpLaplace};
  for (int k = 0; k < 3; ++k) {
    RngStream draw = DeriveStream(102, k, 0, StreamPurpose::kData);
    for (int i = 0; i < 50; ++i) {
      const int M = 1 + static_cast<int>(draw() % 31);
      ScalarEnsemble e = DrawEnsemble(M, draw);
      e.byzantine_count = static_cast<int>(draw() % 3);
      const double scale = 0.2 + 2 * draw.Uniform();
      absl::StatusOr<WrongProbs> w;
      if (kinds[k] == McCompressor::kStoSign) {
        w = StoSignWrongProbs(e);
      } else {
        DpSignParams p{kinds[k] == McCompressor::kDpGaussian
                           ? DpMechanism::kGaussian
                           : DpMechanism::kLaplace,
                       scale};
        w = DpSignWrongProbs(e, p);
      }
      if (!w.ok()) return Fail(w.status());
      absl::StatusOr<double> exact =
          ExactWrongAggregation(w->p, e.byzantine_count);
      if (!exact.ok()) return Fail(exact.status());
      RngStream mc = DeriveStream(102, k, i, StreamPurpose::kMonteCarlo);
      absl::StatusOr<McEstimate> est =
          McWrongAggregation(e, kinds[k], scale, n, mc);
      if (!est.ok()) return Fail(est.status());
      const double se =
          std::max(est->std_error, std::sqrt(*exact * (1 - *exact) / n));
      const double z = se > 0 ? std::abs(est->estimate - *exact) / se
                              : (est->estimate == *exact ? 0 : INFINITY);
      worst = std::max(worst, z);
      if (z > 4) ++outside;
      ++compared;
    }
  }
  const double t = Seconds(start);
  return {outside == 0 && t < 60,
          absl::StrFormat("%d ensembles x 3 compressors, %d beyond 4 SE, "
                          "max %.2f SE, %.2fs",
                          compared / 3, outside, worst, t)};
}

Outcome ExpansionOrder() {
  const double bs[] = {10, 20, 40, 80, 160, 320, 640};
  std::vector<double> xs, ys;
  for (double b : bs) {
    ScalarEnsemble e{{0.3, 0.3, 0.4}, b};
    absl::StatusOr<WrongProbs> w = StoSignWrongProbs(e);
    if (!w.ok()) return Fail(w.status());
    absl::StatusOr<double> exact = ExactWrongAggregation(w->p, 0);
    absl::StatusOr<double> approx = ExpansionThm3(e);
    if (!exact.ok() || !approx.ok()) return {false, "evaluation failed"};
    xs.push_back(std::log(b));
    ys.push_back(std::log(std::abs(*exact - *approx)));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / xs.size();
    my += ys[i] / ys.size();
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= -2.3 && slope <= -1.7,
          absl::StrFormat("log-log slope %.4f, required [-2.3, -1.7]", slope)};
}

Outcome GdpTable() {
  const double sigma[] = {10, 20, 30, 50, 80};
  const double mu[] = {5.66, 2.83, 1.89, 1.13, 0.71};
  std::string detail;
  bool pass = true;
  for (int i = 0; i < 5; ++i) {
    absl::StatusOr<double> got = ComposeGdp(sigma[i], 4.0, 200);
    if (!got.ok()) return Fail(got.status());
    pass = pass && std::abs(*got - mu[i]) <= 0.005;
    absl::StatusOr<double> eps = MuToEps(*got, 1e-5);
    detail += absl::StrFormat("%ssigma=%g mu=%.4f eps@1e-5=%.4f", i ? "; " : "",
                              sigma[i], *got, eps.ok() ? *eps : NAN);
  }
  return {pass, detail};
}

Outcome DpRatio() {
  const double delta2 = 1.0;
  std::vector<double> grid(100);
  for (int i = 0; i < 100; ++i) grid[i] = -2 * delta2 + i * 4 * delta2 / 99;
  int64_t pairs = 0, violations = 0;
  auto check = [&](const DpSignParams& p, double eps, double delta) {
    const double ee = std::exp(eps);
    for (double a : grid) {
      for (double b : grid) {
        if (std::abs(a - b) > delta2) continue;
        const double pa = *DpSignProbability(a, p);
        const double pb = *DpSignProbability(b, p);
        ++pairs;
        // Relative slack of 1e-12 absorbs rounding at the tight Laplace edge.
        if (pa > (ee * pb + delta) * (1 + 1e-12)) ++violations;
        if (1 - pa > (ee * (1 - pb) + delta) * (1 + 1e-12)) ++violations;
      }
    }
  };
  for (double eps : {0.5, 0.9}) {
    for (double delta : {1e-3, 1e-2}) {
      absl::StatusOr<double> sigma = CalibrateSigma(eps, delta, delta2);
      if (!sigma.ok()) return Fail(sigma.status());
      check({DpMechanism::kGaussian, *sigma}, eps, delta);
    }
    absl::StatusOr<double> lambda = CalibrateLambda(eps, delta2);
    if (!lambda.ok()) return Fail(lambda.status());
    check({DpMechanism::kLaplace, *lambda}, eps, 0.0);
  }
  return {violations == 0,
          absl::StrFormat("%d pairs (Gaussian and Laplace), %d violations",
                          pairs, violations)};
}

Outcome EfParity() {
  const size_t d = 64;
  int64_t bad_residual = 0, bad_argument = 0, rounds = 0;
  for (int M : {3, 31}) {
    RngStream r = DeriveStream(106, M, 0, StreamPurpose::kCompress);
    ResidualState state = ResidualState::Zero(d, M);
    for (int t = 0; t < 1000; ++t) {
      std::vector<SignVector> votes;
      std::vector<int64_t> sum(d, 0);
      for (int m = 0; m < M; ++m) {
        std::vector<int8_t> v(d);
        for (size_t i = 0; i < d; ++i) {
          v[i] = r.Uniform() < 0.5 ? 1 : -1;
          sum[i] += v[i];
        }
        votes.push_back(SignVector::Adopt(std::move(v)));
      }
      for (size_t i = 0; i < d; ++i) {
        const int64_t arg = sum[i] + state.scaled[i];
        if (arg == 0 || arg % 2 == 0) ++bad_argument;
      }
      absl::StatusOr<EfResult> res = EfAggregate(state, votes);
      if (!res.ok()) return Fail(res.status());
      state = res->next;
      for (int64_t v : state.scaled) {
        if (v % 2 != 0) ++bad_residual;
      }
      ++rounds;
    }
  }
  return {bad_residual == 0 && bad_argument == 0,
          absl::StrFormat("%d rounds, %d odd residual entries, %d even or "
                          "zero arguments",
                          rounds, bad_residual, bad_argument)};
}

absl::StatusOr<double> QuadraticTailError(Algorithm alg, uint64_t seed) {
  SimulationConfig c;
  c.seed = seed;
  c.algorithm = alg;
  c.model = {ModelKind::kScalarQuadratic, 1, 0, 0};
  c.lr.eta0 = 0.001;
  c.b_value = 4.0;
  c.rounds = 2000;
  const std::vector<double> a = {-3, 1, 1};
  absl::StatusOr<WorkerPartition> workers = QuadraticWorkers(a);
  if (!workers.ok()) return workers.status();
  absl::StatusOr<Simulation> sim = Simulation::Create(c, *workers, {});
  if (!sim.ok()) return sim.status();
  double tail = 0;
  for (int64_t t = 0; t < c.rounds; ++t) {
    if (absl::StatusOr<RoundMetrics> m = sim->Step(); !m.ok()) {
      return m.status();
    }
    if (t >= c.rounds - 100) tail += sim->weights()[0] / 100;
  }
  return std::abs(tail + 1.0 / 3);
}

Outcome Divergence() {
  const auto start = Clock::now();
  double sto = 0, sign = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    absl::StatusOr<double> s = QuadraticTailError(Algorithm::kSto, seed);
    absl::StatusOr<double> p = QuadraticTailError(Algorithm::kSign, seed);
    if (!s.ok()) return Fail(s.status());
    if (!p.ok()) return Fail(p.status());
    sto += *s / 20;
    sign += *p / 20;
  }
  const double t = Seconds(start);
  return {sto < 0.2 && sign > 1.0 && t < 5,
          absl::StrFormat("sto-sign %.4f (< 0.2), signSGD %.4f (> 1.0), %.2fs",
                          sto, sign, t)};
}

Outcome HomogeneousByzantine() {
  std::string detail;
  bool pass = true;
  for (int M : {3, 5, 31}) {
    RngStream r = DeriveStream(108, M, 0, StreamPurpose::kData);
    std::vector<double> x(8);
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = (i % 2 ? -1 : 1) * (0.1 + r.Uniform());
    }
    int first_flip = -1;
    bool all_flipped_next = false;
    for (int B = 0; B <= M + 1; ++B) {
      SimulationConfig c;
      c.algorithm = Algorithm::kSign;
      c.byzantine_count = B;
      c.model = {ModelKind::kScalarQuadratic, static_cast<int>(x.size()), 0, 0};
      c.rounds = 1;
      WorkerPartition workers(M, std::vector<Sample>{{x, 0.0}});
      absl::StatusOr<Simulation> sim = Simulation::Create(c, workers, {});
      if (!sim.ok()) return Fail(sim.status());
      absl::StatusOr<GradientVector> truth = sim->TrueGradient();
      if (!truth.ok()) return Fail(truth.status());
      if (absl::StatusOr<RoundMetrics> m = sim->Step(); !m.ok()) {
        return Fail(m.status());
      }
      int differ = 0;
      for (size_t i = 0; i < x.size(); ++i) {
        const int8_t s = (*truth)[i] >= 0 ? 1 : -1;
        differ += sim->last_broadcast()[i] != s;
      }
      if (differ > 0 && first_flip < 0) first_flip = B;
      if (B == M + 1) all_flipped_next = differ == static_cast<int>(x.size());
    }
    pass = pass && first_flip == M && all_flipped_next;
    detail += absl::StrFormat("%sM=%d first flip at B=%d", M == 3 ? "" : "; ",
                              M, first_flip);
  }
  return {pass, detail};
}

absl::StatusOr<ExperimentResult> RunJson(const std::string& text) {
  absl::StatusOr<ExperimentConfig> cfg = ParseExperimentConfig(text, ".");
  if (!cfg.ok()) return cfg.status();
  return RunExperiment(*cfg);
}

std::string WeightedScenario(const char* aggregator, int byzantine) {
  return absl::StrFormat(R"({
    "seed": 1, "algorithm": "sto", "aggregator": "%s", "M": 11,
    "byzantine": {"count": %d},
    "model": {"kind": "logistic-regression"},
    "dataset": {"kind": "gaussian-mixture", "samples": 4400, "input_dim": 10,
                "classes": 10, "separation": 1.0, "noise": 1.0},
    "labels_per_worker": 8, "rounds": 100,
    "lr": {"eta0": 0.005}, "b": {"mode": "oracle-max"}
  })",
                         aggregator, byzantine);
}

Outcome WeightedSuppression() {
  const auto start = Clock::now();
  absl::StatusOr<ExperimentConfig> cfg =
      ParseExperimentConfig(WeightedScenario("weighted", 5), ".");
  if (!cfg.ok()) return Fail(cfg.status());
  absl::StatusOr<Simulation> sim = BuildSimulation(*cfg);
  if (!sim.ok()) return Fail(sim.status());
  int separated_at = -1;
  for (int64_t t = 1; t <= cfg->sim.rounds; ++t) {
    if (absl::StatusOr<RoundMetrics> m = sim->Step(); !m.ok()) {
      return Fail(m.status());
    }
    const std::vector<double>& r = sim->credits().credits;
    double worst_normal = INFINITY, best_attacker = -INFINITY;
    for (int m = 0; m < 11; ++m) worst_normal = std::min(worst_normal, r[m]);
    for (int m = 11; m < 16; ++m) best_attacker = std::max(best_attacker, r[m]);
    if (best_attacker < worst_normal) {
      if (separated_at < 0) separated_at = static_cast<int>(t);
    } else {
      separated_at = -1;
    }
  }
  const double attacked = sim->TrainLoss();
  absl::StatusOr<ExperimentResult> clean =
      RunJson(WeightedScenario("majority", 0));
  if (!clean.ok()) return Fail(clean.status());
  const double baseline = clean->rounds.back().train_loss;
  const double gap = std::abs(attacked - baseline) / baseline;
  const double t = Seconds(start);
  return {separated_at > 0 && separated_at <= 50 && gap <= 0.15 && t < 120,
          absl::StrFormat("credits separated from round %d, final loss %.4f "
                          "vs clean %.4f (%.1f%%), %.2fs",
                          separated_at, attacked, baseline, 100 * gap, t)};
}

Outcome Communication() {
  const char* kAlgorithms[] = {
      "sign", "sto", "dp", "dp-topk", "ef-sto", "ef-dp", "full-precision"};
  std::string detail;
  bool pass = true;
  for (const char* alg : kAlgorithms) {
    const std::string name = alg;
    std::string extra;
    if (name == "sto" || name == "ef-sto") {
      extra = R"(, "b": {"mode": "oracle-max"})";
    } else if (name == "dp" || name == "ef-dp" || name == "dp-topk") {
      extra = R"(, "dp": {"clip": 1, "sigma": 1})";
    }
    const std::string text = absl::StrFormat(R"({
      "seed": 1, "algorithm": "%s", "M": 3,
      "model": {"kind": "logistic-regression"},
      "dataset": {"kind": "gaussian-mixture", "samples": 200, "input_dim": 4,
                  "classes": 3},
      "rounds": 2, "lr": {"eta0": 0.01}%s
    })",
                                             alg, extra);
    absl::StatusOr<ExperimentConfig> cfg = ParseExperimentConfig(text, ".");
    if (!cfg.ok()) return Fail(cfg.status());
    absl::StatusOr<ExperimentResult> res = RunExperiment(*cfg);
    if (!res.ok()) return Fail(res.status());
    const uint64_t d = res->dim;
    const uint64_t per = res->uplink_bits_per_voter;
    const bool full = name == "full-precision";
    pass = pass && per == (full ? 32 * d : d);
    pass = pass && res->rounds.front().uplink_bits == per * 3;
    if (!full) {
      const nlohmann::json summary =
          nlohmann::json::parse(FormatSummaryJson(*cfg, *res));
      pass = pass && summary["compression_ratio"].get<double>() == 32.0;
    }
    detail += absl::StrFormat("%s%s=%d", detail.empty() ? "" : " ", alg, per);
  }
  return {pass, absl::StrFormat("uplink bits per worker per round (d=15): %s; "
                                "ratio 32",
                                detail)};
}

Outcome GradientOracles() {
  const ModelSpec specs[] = {{ModelKind::kScalarQuadratic, 4, 0, 0},
                             {ModelKind::kLinearRegression, 5, 0, 0},
                             {ModelKind::kLogisticRegression, 4, 3, 0},
                             {ModelKind::kMlp, 4, 3, 6}};
  double worst = 0;
  for (const ModelSpec& spec : specs) {
    for (int inst = 0; inst < 20; ++inst) {
      RngStream r = DeriveStream(111, inst, static_cast<int>(spec.kind),
                                 StreamPurpose::kData);
      std::vector<Sample> batch(5);
      for (size_t j = 0; j < batch.size(); ++j) {
        batch[j].x.resize(spec.input_dim);
        for (double& v : batch[j].x) v = r.Gaussian();
        batch[j].y = spec.IsClassifier()
                         ? static_cast<double>(r() % spec.num_classes)
                         : r.Gaussian();
      }
      GradientVector w = InitParams(spec, 0.7, r);
      absl::StatusOr<GradientVector> g = MeanGradient(spec, w, batch);
      if (!g.ok()) return Fail(g.status());
      double diff = 0, norm = 0;
      const double h = 1e-6;
      for (size_t i = 0; i < w.size(); ++i) {
        GradientVector up = w, down = w;
        up[i] += h;
        down[i] -= h;
        const double fd =
            (*MeanLoss(spec, up, batch) - *MeanLoss(spec, down, batch)) /
            (2 * h);
        diff += (fd - (*g)[i]) * (fd - (*g)[i]);
        norm += fd * fd;
      }
      worst = std::max(worst, std::sqrt(diff / std::max(norm, 1e-300)));
    }
  }
  return {worst <= 1e-5,
          absl::StrFormat("4 kinds x 20 instances, max relative error %.2e",
                          worst)};
}

Outcome Determinism() {
  const char* kTemplate = R"({
    "seed": 12, "algorithm": "%s", "aggregator": "%s", "M": %d,
    "byzantine": {"count": 2},
    "model": {"kind": "mlp-1-hidden", "hidden": 8},
    "dataset": {"kind": "gaussian-mixture", "samples": 600, "input_dim": 4,
                "classes": 4},
    "labels_per_worker": 2, "rounds": 25, "batch_size": 16,
    "lr": {"eta0": 0.02}, "threads": %d, %s
  })";
  struct Case {
    const char* alg;
    const char* agg;
    int M;
    const char* extra;
  };
  const Case cases[] = {
      {"sto", "weighted", 6, R"("b": {"mode": "oracle-max"})"},
      {"dp", "majority", 6,
       R"("dp": {"clip": 1, "epsilon": 0.5, "delta": 1e-3})"},
      {"ef-sto", "majority", 5, R"("b": {"mode": "fixed", "value": 1})"}};
  int identical = 0, total = 0;
  for (const Case& c : cases) {
    std::string first;
    for (int threads : {1, 1, 4}) {
      absl::StatusOr<ExperimentResult> res = RunJson(
          absl::StrFormat(kTemplate, c.alg, c.agg, c.M, threads, c.extra));
      if (!res.ok()) return Fail(res.status());
      const std::string csv = FormatMetricsCsv(res->rounds);
      if (first.empty()) {
        first = csv;
        continue;
      }
      ++total;
      identical += csv == first;
    }
  }
  return {identical == total,
          absl::StrFormat("%d of %d reruns byte-identical (1 and 4 threads)",
                          identical, total)};
}

}  // namespace
}  // namespace stosign

int main() {
  using stosign::Outcome;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"bound sandwich", stosign::BoundSandwich},
      {"oracle equivalence", stosign::OracleEquivalence},
      {"expansion order", stosign::ExpansionOrder},
      {"GDP table", stosign::GdpTable},
      {"pointwise DP ratio", stosign::DpRatio},
      {"error-feedback parity", stosign::EfParity},
      {"divergence instance", stosign::Divergence},
      {"homogeneous Byzantine tolerance", stosign::HomogeneousByzantine},
      {"weighted-vote suppression", stosign::WeightedSuppression},
      {"communication accounting", stosign::Communication},
      {"gradient oracles", stosign::GradientOracles},
      {"determinism", stosign::Determinism},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const Outcome o = c.run();
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
