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


#include "stosign/simulation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "absl/strings/str_format.h"
#include "stosign/privacy.h"

namespace stosign {
namespace {

// Static striding over [0, n). Each index runs exactly once, and results go to
// per-index slots, so the thread count never changes the output.
template <typename F>
void ParallelFor(int threads, size_t n, const F& f) {
  const size_t t =
      std::min<size_t>(static_cast<size_t>(std::max(threads, 1)), n);
  if (t <= 1) {
    for (size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  for (size_t k = 1; k < t; ++k) {
    pool.emplace_back([&f, k, t, n] {
      for (size_t i = k; i < n; i += t) f(i);
    });
  }
  for (size_t i = 0; i < n; i += t) f(i);
  for (std::thread& th : pool) th.join();
}

GradientVector Mean(const std::vector<GradientVector>& v, size_t d) {
  GradientVector out(d, 0.0);
  for (const GradientVector& g : v) {
    for (size_t i = 0; i < d; ++i) out[i] += g[i];
  }
  for (double& x : out) x /= static_cast<double>(v.size());
  return out;
}

absl::Status FirstError(const std::vector<absl::Status>& statuses) {
  for (const absl::Status& s : statuses) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name) {
  if (name == "sign") return Algorithm::kSign;
  if (name == "sto") return Algorithm::kSto;
  if (name == "dp") return Algorithm::kDp;
  if (name == "dp-topk") return Algorithm::kDpTopk;
  if (name == "ef-sto") return Algorithm::kEfSto;
  if (name == "ef-dp") return Algorithm::kEfDp;
  if (name == "full-precision") return Algorithm::kFullPrecision;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown algorithm \"%s\"", std::string(name)));
}

const char* AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kSign:
      return "sign";
    case Algorithm::kSto:
      return "sto";
    case Algorithm::kDp:
      return "dp";
    case Algorithm::kDpTopk:
      return "dp-topk";
    case Algorithm::kEfSto:
      return "ef-sto";
    case Algorithm::kEfDp:
      return "ef-dp";
    case Algorithm::kFullPrecision:
      return "full-precision";
  }
  return "unknown";
}

bool UsesDp(Algorithm a) {
  return a == Algorithm::kDp || a == Algorithm::kDpTopk ||
         a == Algorithm::kEfDp;
}

bool UsesErrorFeedback(Algorithm a) {
  return a == Algorithm::kEfSto || a == Algorithm::kEfDp;
}

bool UsesStoScale(Algorithm a) {
  return a == Algorithm::kSto || a == Algorithm::kEfSto;
}

absl::StatusOr<Simulation> Simulation::Create(SimulationConfig config,
                                              WorkerPartition workers,
                                              std::vector<Sample> test) {
  if (absl::Status s = config.model.Validate(); !s.ok()) return s;
  if (workers.empty()) {
    return absl::InvalidArgumentError("need at least one normal worker");
  }
  for (size_t m = 0; m < workers.size(); ++m) {
    if (workers[m].empty()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("worker %d has no local data", m));
    }
    for (const Sample& s : workers[m]) {
      if (absl::Status st = config.model.ValidateSample(s); !st.ok()) {
        return absl::InvalidArgumentError(
            absl::StrFormat("worker %d: %s", m, st.message()));
      }
    }
  }
  for (const Sample& s : test) {
    if (absl::Status st = config.model.ValidateSample(s); !st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("test set: %s", st.message()));
    }
  }
  if (config.rounds < 1)
    return absl::InvalidArgumentError("rounds must be >= 1");
  if (config.byzantine_count < 0) {
    return absl::InvalidArgumentError("byzantine count must be >= 0");
  }
  if (config.batch_size < 0) {
    return absl::InvalidArgumentError("batch_size must be >= 0");
  }

  Simulation sim;
  const size_t d = config.model.NumParams();
  const int voters = static_cast<int>(workers.size()) + config.byzantine_count;
  config.lr.total_rounds = config.rounds;
  config.lr.dim = d;
  if (absl::Status s = config.lr.Validate(); !s.ok()) return s;

  if (UsesErrorFeedback(config.algorithm) && voters % 2 == 0) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "error feedback needs an odd number of voters, got %d", voters));
  }
  if (UsesStoScale(config.algorithm) &&
      config.b_mode == ScaleMode::kFixedScalar &&
      !(config.b_value > 0.0 && std::isfinite(config.b_value))) {
    return absl::InvalidArgumentError(
        absl::StrFormat("b must be positive, got %g", config.b_value));
  }
  if (UsesDp(config.algorithm)) {
    const DpSettings& dp = config.dp;
    if (!(dp.clip > 0.0)) {
      return absl::InvalidArgumentError("dp clip must be positive");
    }
    if (dp.mechanism == DpMechanism::kGaussian) {
      if (dp.sigma.has_value()) {
        if (!(*dp.sigma > 0.0)) {
          return absl::InvalidArgumentError("dp sigma must be positive");
        }
        sim.dp_scale_ = *dp.sigma;
      } else {
        absl::StatusOr<double> sigma =
            CalibrateSigma(dp.epsilon, dp.delta, dp.clip);
        if (!sigma.ok()) return sigma.status();
        sim.dp_scale_ = *sigma;
      }
    } else {
      // A clipped vector has L1 norm at most sqrt(d) times its L2 norm.
      absl::StatusOr<double> lambda = CalibrateLambda(
          dp.epsilon, std::sqrt(static_cast<double>(d)) * dp.clip);
      if (!lambda.ok()) return lambda.status();
      sim.dp_scale_ = *lambda;
    }
    if (config.algorithm == Algorithm::kDpTopk &&
        !(dp.topk_fraction > 0.0 && dp.topk_fraction <= 1.0)) {
      return absl::InvalidArgumentError("topk_fraction must be in (0, 1]");
    }
  }

  sim.threads_ =
      config.threads > 0
          ? config.threads
          : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  RngStream init = DeriveStream(config.seed, 0, 0, StreamPurpose::kInit);
  sim.weights_ = InitParams(config.model, config.init_scale, init);
  sim.ledger_ = CreditLedger::Initial(voters);
  sim.residual_ = ResidualState::Zero(d, voters);
  sim.batches_.resize(workers.size());
  sim.workers_ = std::move(workers);
  sim.test_ = std::move(test);
  sim.config_ = std::move(config);
  return sim;
}

uint64_t Simulation::UplinkBitsPerVoter() const {
  const uint64_t bits = PayloadBits(dim());
  return config_.algorithm == Algorithm::kFullPrecision ? 32 * bits : bits;
}

std::vector<size_t> Simulation::NextBatch(size_t m) {
  const size_t n = workers_[m].size();
  const auto bs = static_cast<size_t>(config_.batch_size);
  if (bs == 0 || bs >= n) return {};
  BatchState& st = batches_[m];
  if (st.epoch < 0 || st.cursor + bs > n) {
    ++st.epoch;
    st.order.resize(n);
    std::iota(st.order.begin(), st.order.end(), size_t{0});
    RngStream s = DeriveStream(config_.seed, st.epoch, static_cast<int64_t>(m),
                               StreamPurpose::kBatch);
    std::shuffle(st.order.begin(), st.order.end(), s);
    st.cursor = 0;
  }
  std::vector<size_t> batch(st.order.begin() + st.cursor,
                            st.order.begin() + st.cursor + bs);
  st.cursor += bs;
  return batch;
}

GradientVector Simulation::LocalGradient(size_t m,
                                         const std::vector<size_t>& batch,
                                         bool clip) const {
  const std::vector<Sample>& data = workers_[m];
  const size_t n = batch.empty() ? data.size() : batch.size();
  const double weight = 1.0 / static_cast<double>(n);
  GradientVector grad(dim(), 0.0);
  GradientVector one(dim());
  for (size_t j = 0; j < n; ++j) {
    const Sample& s = data[batch.empty() ? j : batch[j]];
    if (!clip) {
      AddSampleGradient(config_.model, weights_, s, weight, grad);
      continue;
    }
    std::fill(one.begin(), one.end(), 0.0);
    AddSampleGradient(config_.model, weights_, s, 1.0, one);
    // Clip cannot fail here: the threshold was validated at construction.
    GradientVector clipped = *ClipL2(one, config_.dp.clip);
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += weight * clipped[i];
  }
  return grad;
}

absl::StatusOr<std::vector<GradientVector>> Simulation::FullWorkerGradients()
    const {
  std::vector<GradientVector> out(workers_.size());
  ParallelFor(threads_, workers_.size(),
              [&](size_t m) { out[m] = LocalGradient(m, {}, false); });
  for (size_t m = 0; m < out.size(); ++m) {
    if (absl::Status s = ValidateGradient(out[m]); !s.ok()) {
      return absl::InternalError(
          absl::StrFormat("worker %d gradient: %s", m, s.message()));
    }
  }
  return out;
}

absl::StatusOr<GradientVector> Simulation::TrueGradient() const {
  absl::StatusOr<std::vector<GradientVector>> full = FullWorkerGradients();
  if (!full.ok()) return full.status();
  return Mean(*full, dim());
}

double Simulation::TrainLoss() const {
  std::vector<double> loss(workers_.size());
  ParallelFor(threads_, workers_.size(), [&](size_t m) {
    loss[m] = *MeanLoss(config_.model, weights_, workers_[m]);
  });
  double sum = 0.0;
  for (double l : loss) sum += l;
  return sum / static_cast<double>(loss.size());
}

absl::Status Simulation::Evaluate(RoundMetrics& metrics) const {
  metrics.train_loss = TrainLoss();
  if (!std::isfinite(metrics.train_loss)) {
    return absl::InternalError(
        absl::StrFormat("training loss diverged at round %d", metrics.round));
  }
  if (config_.model.IsClassifier()) {
    double correct = 0.0;
    size_t total = 0;
    for (const std::vector<Sample>& data : workers_) {
      correct += Accuracy(config_.model, weights_, data) *
                 static_cast<double>(data.size());
      total += data.size();
    }
    metrics.train_acc = correct / static_cast<double>(total);
  } else {
    metrics.train_acc = std::numeric_limits<double>::quiet_NaN();
  }
  if (test_.empty()) {
    metrics.test_loss = std::numeric_limits<double>::quiet_NaN();
  } else {
    metrics.test_loss = *MeanLoss(config_.model, weights_, test_);
  }
  metrics.test_acc = Accuracy(config_.model, weights_, test_);
  return absl::OkStatus();
}

absl::StatusOr<RoundMetrics> Simulation::Step() {
  if (round_ >= config_.rounds) {
    return absl::FailedPreconditionError("all configured rounds have run");
  }
  const int64_t t = round_;
  const size_t d = dim();
  const size_t M = workers_.size();
  const auto B = static_cast<size_t>(config_.byzantine_count);
  const Algorithm alg = config_.algorithm;
  const bool dp = UsesDp(alg);

  RoundMetrics metrics;
  metrics.round = t + 1;
  metrics.lr = config_.lr.At(t);
  metrics.uplink_bits = UplinkBitsPerVoter() * (M + B);
  metrics.downlink_bits = UplinkBitsPerVoter() * (M + B);

  absl::StatusOr<std::vector<GradientVector>> full = FullWorkerGradients();
  if (!full.ok()) return full.status();
  const GradientVector truth = Mean(*full, d);

  std::vector<std::vector<size_t>> batch(M);
  bool all_full = true;
  for (size_t m = 0; m < M; ++m) {
    batch[m] = NextBatch(m);
    all_full = all_full && batch[m].empty();
  }
  std::vector<GradientVector> grads;
  if (!dp && all_full) {
    grads = std::move(*full);
  } else {
    grads.resize(M);
    ParallelFor(threads_, M,
                [&](size_t m) { grads[m] = LocalGradient(m, batch[m], dp); });
    for (size_t m = 0; m < M; ++m) {
      if (absl::Status s = ValidateGradient(grads[m]); !s.ok()) return s;
    }
  }
  const GradientVector target =
      config_.knowledge == ByzantineKnowledge::kTrueFullGradient
          ? truth
          : Mean(grads, d);

  SignVector broadcast;
  double step_scale = 1.0;

  if (alg == Algorithm::kFullPrecision) {
    GradientVector agg(d, 0.0);
    for (const GradientVector& g : grads) {
      for (size_t i = 0; i < d; ++i) agg[i] += g[i];
    }
    for (size_t j = 0; j < B; ++j) {
      for (size_t i = 0; i < d; ++i) agg[i] -= target[i];
    }
    for (double& v : agg) v /= static_cast<double>(M + B);
    for (size_t i = 0; i < d; ++i) weights_[i] -= metrics.lr * agg[i];
    absl::StatusOr<SignVector> s = SignCompress(agg);
    if (!s.ok()) return s.status();
    broadcast = std::move(*s);
  } else {
    StoSignParams sto;
    if (UsesStoScale(alg)) {
      absl::StatusOr<StoSignParams> p;
      switch (config_.b_mode) {
        case ScaleMode::kFixedScalar:
          p = StoSignParams::Fixed(config_.b_value, d);
          break;
        case ScaleMode::kOracleMax:
          p = StoSignParams::OracleMax(grads);
          break;
        case ScaleMode::kTheorySchedule:
          p = StoSignParams::TheorySchedule(config_.rounds, d);
          break;
      }
      if (!p.ok()) return p.status();
      sto = std::move(*p);
    }
    const DpSignParams dp_params{config_.dp.mechanism, dp_scale_};
    const bool skip =
        alg == Algorithm::kDpTopk && config_.dp.skip_untransmitted;

    std::vector<SignVector> votes(M + B);
    std::vector<std::vector<bool>> keep(skip ? M : 0);
    std::vector<absl::Status> status(M);
    ParallelFor(threads_, M, [&](size_t m) {
      RngStream stream = DeriveStream(config_.seed, t, static_cast<int64_t>(m),
                                      StreamPurpose::kCompress);
      absl::StatusOr<SignVector> v;
      switch (alg) {
        case Algorithm::kSign:
          v = SignCompress(grads[m]);
          break;
        case Algorithm::kSto:
        case Algorithm::kEfSto:
          v = StoSign(grads[m], sto, stream);
          break;
        case Algorithm::kDp:
        case Algorithm::kEfDp:
          v = DpSign(grads[m], dp_params, stream);
          break;
        case Algorithm::kDpTopk: {
          absl::StatusOr<std::vector<bool>> support =
              TopKSupport(grads[m], config_.dp.topk_fraction);
          if (!support.ok()) {
            v = support.status();
            break;
          }
          GradientVector masked(d, 0.0);
          for (size_t i = 0; i < d; ++i) {
            if ((*support)[i]) masked[i] = grads[m][i];
          }
          v = DpSign(masked, dp_params, stream);
          if (skip) keep[m] = std::move(*support);
          break;
        }
        case Algorithm::kFullPrecision:
          break;
      }
      if (!v.ok()) {
        status[m] = v.status();
        return;
      }
      votes[m] = std::move(*v);
    });
    if (absl::Status s = FirstError(status); !s.ok()) return s;
    for (size_t j = 0; j < B; ++j) votes[M + j] = ByzantineSign(target);

    const bool weighted = config_.aggregator == Aggregator::kWeighted;
    if (UsesErrorFeedback(alg)) {
      absl::StatusOr<EfResult> ef = EfAggregate(residual_, votes);
      if (!ef.ok()) return ef.status();
      if (absl::Status s = CheckParity(ef->next); !s.ok()) return s;
      broadcast = std::move(ef->broadcast);
      step_scale = ef->scale;
      residual_ = std::move(ef->next);
    } else if (skip) {
      std::vector<double> tally(d, 0.0);
      for (size_t v = 0; v < M + B; ++v) {
        const double w = weighted ? std::max(ledger_.credits[v], 0.0) : 1.0;
        for (size_t i = 0; i < d; ++i) {
          if (v < M && !keep[v][i]) continue;
          tally[i] += w * votes[v][i];
        }
      }
      std::vector<int8_t> out(d);
      for (size_t i = 0; i < d; ++i) out[i] = tally[i] >= 0.0 ? 1 : -1;
      broadcast = SignVector::Adopt(std::move(out));
    } else if (weighted) {
      absl::StatusOr<SignVector> agg = WeightedVote(votes, ledger_);
      if (!agg.ok()) return agg.status();
      broadcast = std::move(*agg);
    } else {
      absl::StatusOr<SignVector> agg = MajorityVote(votes);
      if (!agg.ok()) return agg.status();
      broadcast = std::move(*agg);
    }
    if (weighted && !UsesErrorFeedback(alg)) {
      if (absl::Status s = UpdateCredits(ledger_, votes, broadcast); !s.ok()) {
        return s;
      }
    }
    const double step = metrics.lr * step_scale;
    for (size_t i = 0; i < d; ++i) weights_[i] -= step * broadcast[i];
  }

  size_t wrong = 0;
  for (size_t i = 0; i < d; ++i) {
    if (broadcast[i] != (truth[i] >= 0.0 ? 1 : -1)) ++wrong;
  }
  metrics.wrong_agg_frac =
      d == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(d);
  last_broadcast_ = std::move(broadcast);
  ++round_;
  if (absl::Status s = Evaluate(metrics); !s.ok()) return s;
  return metrics;
}

absl::StatusOr<std::vector<RoundMetrics>> Simulation::Run() {
  std::vector<RoundMetrics> out;
  out.reserve(static_cast<size_t>(config_.rounds - round_));
  while (round_ < config_.rounds) {
    absl::StatusOr<RoundMetrics> m = Step();
    if (!m.ok()) return m.status();
    out.push_back(*m);
  }
  return out;
}

}  // namespace stosign
