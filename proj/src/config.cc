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
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "stosign/cli.h"

namespace stosign {
namespace {

using nlohmann::json;

class Errors {
 public:
  void Add(std::string message) { list_.push_back(std::move(message)); }
  bool empty() const { return list_.empty(); }
  std::string Joined() const { return absl::StrJoin(list_, "; "); }

 private:
  std::vector<std::string> list_;
};

// Reads fields from one JSON object and remembers which keys were consumed,
// so Finish() can reject everything else.
class ObjectReader {
 public:
  ObjectReader(const json* obj, std::string path, Errors* errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (obj_ != nullptr && !obj_->is_object()) {
      errors_->Add(absl::StrFormat("%s must be an object", path_));
      obj_ = nullptr;
    }
  }

  bool present() const { return obj_ != nullptr; }

  std::string Path(std::string_view key) const {
    return path_.empty() ? std::string(key)
                         : absl::StrFormat("%s.%s", path_, std::string(key));
  }

  bool Has(std::string_view key) const {
    return obj_ != nullptr && obj_->contains(std::string(key));
  }

  const json* Get(std::string_view key, bool required,
                  std::string_view why = "") {
    if (!Has(key)) {
      if (required) {
        errors_->Add(why.empty()
                         ? absl::StrFormat("%s is required", Path(key))
                         : absl::StrFormat("%s is required %s", Path(key),
                                           std::string(why)));
      }
      return nullptr;
    }
    used_.insert(std::string(key));
    return &obj_->at(std::string(key));
  }

  std::optional<double> Number(std::string_view key, bool required,
                               std::string_view why = "") {
    const json* v = Get(key, required, why);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) {
      errors_->Add(absl::StrFormat("%s must be a number", Path(key)));
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<int64_t> Integer(std::string_view key, bool required,
                                 std::string_view why = "") {
    const json* v = Get(key, required, why);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) {
      errors_->Add(absl::StrFormat("%s must be an integer", Path(key)));
      return std::nullopt;
    }
    return v->get<int64_t>();
  }

  std::optional<std::string> String(std::string_view key, bool required,
                                    std::string_view why = "") {
    const json* v = Get(key, required, why);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) {
      errors_->Add(absl::StrFormat("%s must be a string", Path(key)));
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> Bool(std::string_view key) {
    const json* v = Get(key, false);
    if (v == nullptr) return std::nullopt;
    if (!v->is_boolean()) {
      errors_->Add(absl::StrFormat("%s must be true or false", Path(key)));
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::vector<double>> Numbers(std::string_view key,
                                             bool required,
                                             std::string_view why = "") {
    const json* v = Get(key, required, why);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) {
      errors_->Add(
          absl::StrFormat("%s must be an array of numbers", Path(key)));
      return std::nullopt;
    }
    std::vector<double> out;
    for (const json& e : *v) {
      if (!e.is_number()) {
        errors_->Add(
            absl::StrFormat("%s must be an array of numbers", Path(key)));
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  ObjectReader Child(std::string_view key, bool required,
                     std::string_view why = "") {
    const json* v = Get(key, required, why);
    return ObjectReader(v, Path(key), errors_);
  }

  // A key that must not appear in this configuration.
  void Forbid(std::string_view key, std::string_view why) {
    if (!Has(key)) return;
    used_.insert(std::string(key));
    errors_->Add(
        absl::StrFormat("%s is not used %s", Path(key), std::string(why)));
  }

  void Finish() {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (used_.count(key) == 0) {
        errors_->Add(
            absl::StrFormat("%s is not a recognized field", Path(key)));
      }
    }
  }

  Errors* errors() const { return errors_; }

 private:
  const json* obj_;
  std::string path_;
  Errors* errors_;
  std::set<std::string> used_;
};

std::string ForAlgorithm(Algorithm a) {
  return absl::StrFormat("for algorithm \"%s\"", AlgorithmName(a));
}

bool ModelFitsDataset(ModelKind model, DatasetKind data) {
  switch (data) {
    case DatasetKind::kQuadratic:
      return model == ModelKind::kScalarQuadratic;
    case DatasetKind::kLinear:
      return model == ModelKind::kLinearRegression;
    case DatasetKind::kGaussianMixture:
      return model == ModelKind::kLogisticRegression ||
             model == ModelKind::kMlp;
  }
  return false;
}

void ParseDataset(ObjectReader& r, ExperimentConfig& cfg) {
  DatasetSpec& ds = cfg.dataset;
  std::optional<std::string> kind = r.String("kind", true);
  if (!kind.has_value()) return;
  absl::StatusOr<DatasetKind> k = ParseDatasetKind(*kind);
  if (!k.ok()) {
    r.errors()->Add(
        absl::StrFormat("%s: %s", r.Path("kind"), k.status().message()));
    return;
  }
  ds.kind = *k;
  const std::string why = absl::StrFormat("by dataset kind \"%s\"", *kind);
  if (ds.kind == DatasetKind::kQuadratic) {
    if (auto a = r.Numbers("anchors", true); a.has_value()) ds.anchors = *a;
    for (const char* key :
         {"samples", "input_dim", "classes", "separation", "noise"}) {
      r.Forbid(key, why);
    }
    return;
  }
  r.Forbid("anchors", why);
  if (auto n = r.Integer("samples", true); n.has_value()) {
    if (*n < 2)
      r.errors()->Add(absl::StrFormat("%s must be >= 2", r.Path("samples")));
    ds.num_samples = static_cast<int>(*n);
  }
  if (auto n = r.Integer("input_dim", true); n.has_value()) {
    if (*n < 1)
      r.errors()->Add(absl::StrFormat("%s must be >= 1", r.Path("input_dim")));
    ds.input_dim = static_cast<int>(*n);
  }
  if (ds.kind == DatasetKind::kGaussianMixture) {
    if (auto n = r.Integer("classes", true); n.has_value()) {
      if (*n < 2)
        r.errors()->Add(absl::StrFormat("%s must be >= 2", r.Path("classes")));
      ds.num_classes = static_cast<int>(*n);
    }
  } else {
    r.Forbid("classes", why);
    ds.num_classes = 0;
  }
  if (auto v = r.Number("separation", false); v.has_value()) {
    ds.separation = *v;
  }
  if (auto v = r.Number("noise", false); v.has_value()) {
    if (*v < 0)
      r.errors()->Add(absl::StrFormat("%s must be >= 0", r.Path("noise")));
    ds.noise = *v;
  }
}

void ParseLr(ObjectReader& r, LrSchedule& lr) {
  std::string schedule = "constant";
  if (auto s = r.String("schedule", false); s.has_value()) schedule = *s;
  absl::StatusOr<LrKind> kind = ParseLrKind(schedule);
  if (!kind.ok()) {
    r.errors()->Add(
        absl::StrFormat("%s: %s", r.Path("schedule"), kind.status().message()));
    return;
  }
  lr.kind = *kind;
  const std::string why = absl::StrFormat("by schedule \"%s\"", schedule);
  if (lr.kind == LrKind::kTheory) {
    r.Forbid("eta0", why);
  } else if (auto eta = r.Number("eta0", true); eta.has_value()) {
    if (!(*eta > 0)) {
      r.errors()->Add(absl::StrFormat("%s must be positive", r.Path("eta0")));
    }
    lr.eta0 = *eta;
  }
  if (lr.kind == LrKind::kStepDecay) {
    const json* ms = r.Get("milestones", true, "for schedule \"step-decay\"");
    if (ms != nullptr) {
      bool ok = ms->is_array();
      if (ok) {
        for (const json& e : *ms) {
          if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
              !e[1].is_number()) {
            ok = false;
            break;
          }
          lr.milestones.emplace_back(e[0].get<int64_t>(), e[1].get<double>());
        }
      }
      if (!ok) {
        r.errors()->Add(
            absl::StrFormat("%s must be an array of [round, divisor] pairs",
                            r.Path("milestones")));
      } else if (absl::Status s = lr.Validate(); !s.ok()) {
        r.errors()->Add(
            absl::StrFormat("%s: %s", r.Path("milestones"), s.message()));
      }
    }
  } else {
    r.Forbid("milestones", why);
  }
  if (lr.kind == LrKind::kMultiplicative) {
    if (auto g =
            r.Number("gamma", true, "for schedule \"multiplicative-decay\"");
        g.has_value()) {
      if (!(*g > 0)) {
        r.errors()->Add(
            absl::StrFormat("%s must be positive", r.Path("gamma")));
      }
      lr.gamma = *g;
    }
  } else {
    r.Forbid("gamma", why);
  }
}

void ParseB(ObjectReader& r, SimulationConfig& sim) {
  std::optional<std::string> mode = r.String("mode", true);
  if (!mode.has_value()) return;
  if (*mode == "fixed") {
    sim.b_mode = ScaleMode::kFixedScalar;
    if (auto v = r.Number("value", true, "for b.mode \"fixed\"");
        v.has_value()) {
      if (!(*v > 0)) {
        r.errors()->Add(
            absl::StrFormat("%s must be positive", r.Path("value")));
      }
      sim.b_value = *v;
    }
    return;
  }
  if (*mode == "oracle-max") {
    sim.b_mode = ScaleMode::kOracleMax;
  } else if (*mode == "theory") {
    sim.b_mode = ScaleMode::kTheorySchedule;
  } else {
    r.errors()->Add(absl::StrFormat(
        "%s must be \"fixed\", \"oracle-max\" or \"theory\"", r.Path("mode")));
    return;
  }
  r.Forbid("value", absl::StrFormat("by b.mode \"%s\"", *mode));
}

void ParseDp(ObjectReader& r, ExperimentConfig& cfg) {
  DpSettings& dp = cfg.sim.dp;
  const Algorithm alg = cfg.sim.algorithm;
  std::string mechanism = "gaussian";
  if (auto m = r.String("mechanism", false); m.has_value()) mechanism = *m;
  if (mechanism == "gaussian") {
    dp.mechanism = DpMechanism::kGaussian;
  } else if (mechanism == "laplace") {
    dp.mechanism = DpMechanism::kLaplace;
  } else {
    r.errors()->Add(absl::StrFormat("%s must be \"gaussian\" or \"laplace\"",
                                    r.Path("mechanism")));
    return;
  }
  const std::string for_alg = ForAlgorithm(alg);

  if (auto c = r.Number("clip", true, for_alg); c.has_value()) {
    if (!(*c > 0)) {
      r.errors()->Add(absl::StrFormat("%s must be positive", r.Path("clip")));
    }
    dp.clip = *c;
  }

  if (dp.mechanism == DpMechanism::kGaussian) {
    if (r.Has("sigma")) {
      if (auto s = r.Number("sigma", true); s.has_value()) {
        if (!(*s > 0)) {
          r.errors()->Add(
              absl::StrFormat("%s must be positive", r.Path("sigma")));
        }
        dp.sigma = *s;
      }
      r.Forbid("epsilon", "when dp.sigma is given");
      if (auto d = r.Number("delta", false); d.has_value()) {
        if (!(*d > 0 && *d < 1)) {
          r.errors()->Add(
              absl::StrFormat("%s must be in (0, 1)", r.Path("delta")));
        }
        cfg.report_delta = *d;
      }
    } else {
      if (auto e = r.Number("epsilon", true, for_alg); e.has_value()) {
        if (!(*e > 0 && *e < 1)) {
          r.errors()->Add(
              absl::StrFormat("%s must be in (0, 1)", r.Path("epsilon")));
        }
        dp.epsilon = *e;
      }
      if (auto d = r.Number("delta", true, for_alg); d.has_value()) {
        if (!(*d > 0 && *d < 1)) {
          r.errors()->Add(
              absl::StrFormat("%s must be in (0, 1)", r.Path("delta")));
        }
        dp.delta = *d;
        cfg.report_delta = *d;
      }
    }
    if (auto a = r.Integer("accounting_rounds", false); a.has_value()) {
      if (*a < 1) {
        r.errors()->Add(
            absl::StrFormat("%s must be >= 1", r.Path("accounting_rounds")));
      }
      cfg.accounting_rounds = *a;
    }
  } else {
    const char* why = "by the laplace mechanism";
    r.Forbid("sigma", why);
    r.Forbid("delta", why);
    r.Forbid("accounting_rounds", why);
    if (auto e = r.Number("epsilon", true, for_alg); e.has_value()) {
      if (!(*e > 0)) {
        r.errors()->Add(
            absl::StrFormat("%s must be positive", r.Path("epsilon")));
      }
      dp.epsilon = *e;
    }
  }

  if (alg == Algorithm::kDpTopk) {
    if (auto f = r.Number("topk_fraction", false); f.has_value()) {
      if (!(*f > 0 && *f <= 1)) {
        r.errors()->Add(
            absl::StrFormat("%s must be in (0, 1]", r.Path("topk_fraction")));
      }
      dp.topk_fraction = *f;
    }
    if (auto s = r.Bool("skip_untransmitted"); s.has_value()) {
      dp.skip_untransmitted = *s;
    }
  } else {
    r.Forbid("topk_fraction", for_alg);
    r.Forbid("skip_untransmitted", for_alg);
  }
}

}  // namespace

std::string DefaultOutputDir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    std::string_view json_text, const std::string& default_output_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrFormat("config is not valid JSON: %s", e.what()));
  }
  Errors errors;
  ObjectReader r(&root, "", &errors);
  if (!r.present()) return absl::InvalidArgumentError(errors.Joined());

  ExperimentConfig cfg;
  SimulationConfig& sim = cfg.sim;
  cfg.output.dir = default_output_dir;

  if (auto s = r.Integer("seed", true); s.has_value()) {
    if (*s < 0) errors.Add("seed must be >= 0");
    sim.seed = static_cast<uint64_t>(*s);
  }

  bool have_algorithm = false;
  if (auto a = r.String("algorithm", true); a.has_value()) {
    absl::StatusOr<Algorithm> alg = ParseAlgorithm(*a);
    if (alg.ok()) {
      sim.algorithm = *alg;
      have_algorithm = true;
    } else {
      errors.Add(absl::StrFormat("algorithm: %s", alg.status().message()));
    }
  }

  if (auto a = r.String("aggregator", false); a.has_value()) {
    if (*a == "majority") {
      sim.aggregator = Aggregator::kMajority;
    } else if (*a == "weighted") {
      sim.aggregator = Aggregator::kWeighted;
      if (have_algorithm && (UsesErrorFeedback(sim.algorithm) ||
                             sim.algorithm == Algorithm::kFullPrecision)) {
        errors.Add(
            absl::StrFormat("aggregator \"weighted\" is not available %s",
                            ForAlgorithm(sim.algorithm)));
      }
    } else {
      errors.Add("aggregator must be \"majority\" or \"weighted\"");
    }
  }

  if (auto m = r.Integer("M", true); m.has_value()) {
    if (*m < 1) errors.Add("M must be >= 1");
    cfg.num_workers = static_cast<int>(*m);
  }

  {
    ObjectReader byz = r.Child("byzantine", false);
    if (auto c = byz.Integer("count", false); c.has_value()) {
      if (*c < 0) errors.Add("byzantine.count must be >= 0");
      sim.byzantine_count = static_cast<int>(*c);
    }
    if (auto k = byz.String("knowledge", false); k.has_value()) {
      if (*k == "mean-of-normals") {
        sim.knowledge = ByzantineKnowledge::kMeanOfNormals;
      } else if (*k == "true-full-gradient") {
        sim.knowledge = ByzantineKnowledge::kTrueFullGradient;
      } else {
        errors.Add(
            "byzantine.knowledge must be \"mean-of-normals\" or "
            "\"true-full-gradient\"");
      }
    }
    byz.Finish();
  }

  std::optional<ModelKind> model_kind;
  {
    ObjectReader model = r.Child("model", true);
    if (model.present()) {
      if (auto k = model.String("kind", true); k.has_value()) {
        absl::StatusOr<ModelKind> kind = ParseModelKind(*k);
        if (kind.ok()) {
          model_kind = *kind;
          sim.model.kind = *kind;
        } else {
          errors.Add(
              absl::StrFormat("model.kind: %s", kind.status().message()));
        }
      }
      if (model_kind == ModelKind::kMlp) {
        if (auto h = model.Integer("hidden", true, "for mlp-1-hidden");
            h.has_value()) {
          if (*h < 1) errors.Add("model.hidden must be >= 1");
          sim.model.hidden = static_cast<int>(*h);
        }
      } else {
        model.Forbid("hidden", "by this model kind");
      }
      model.Finish();
    }
  }

  bool have_dataset = false;
  {
    ObjectReader ds = r.Child("dataset", true);
    if (ds.present()) {
      ParseDataset(ds, cfg);
      have_dataset = ds.Has("kind");
      ds.Finish();
    }
  }
  if (have_dataset && model_kind.has_value() &&
      !ModelFitsDataset(*model_kind, cfg.dataset.kind)) {
    errors.Add(absl::StrFormat("model.kind \"%s\" does not fit this dataset",
                               ModelKindName(*model_kind)));
  }

  if (have_dataset && cfg.dataset.kind == DatasetKind::kGaussianMixture) {
    if (auto n = r.Integer("labels_per_worker", false); n.has_value()) {
      if (*n < 0) errors.Add("labels_per_worker must be >= 0");
      cfg.labels_per_worker = static_cast<int>(*n);
    }
  } else {
    r.Forbid("labels_per_worker", "without class labels");
  }

  if (auto t = r.Integer("rounds", true); t.has_value()) {
    if (*t < 1) errors.Add("rounds must be >= 1");
    sim.rounds = *t;
  }

  {
    ObjectReader lr = r.Child("lr", true);
    if (lr.present()) {
      ParseLr(lr, sim.lr);
      lr.Finish();
    }
  }

  if (have_algorithm) {
    const std::string for_alg = ForAlgorithm(sim.algorithm);
    if (UsesStoScale(sim.algorithm)) {
      ObjectReader b = r.Child("b", true, for_alg);
      if (b.present()) {
        ParseB(b, sim);
        b.Finish();
      }
    } else {
      r.Forbid("b", for_alg);
    }
    if (UsesDp(sim.algorithm)) {
      ObjectReader dp = r.Child("dp", true, for_alg);
      if (dp.present()) {
        ParseDp(dp, cfg);
        dp.Finish();
      }
    } else {
      r.Forbid("dp", for_alg);
    }
    if (UsesErrorFeedback(sim.algorithm)) {
      const int64_t voters =
          static_cast<int64_t>(cfg.num_workers) + sim.byzantine_count;
      if (voters % 2 == 0) {
        errors.Add(absl::StrFormat(
            "M + byzantine.count must be odd %s (got %d)", for_alg, voters));
      }
    }
  } else {
    r.Get("b", false);
    r.Get("dp", false);
  }

  if (auto bs = r.Integer("batch_size", false); bs.has_value()) {
    if (*bs < 0) errors.Add("batch_size must be >= 0");
    sim.batch_size = *bs;
  }
  if (auto th = r.Integer("threads", false); th.has_value()) {
    if (*th < 0) errors.Add("threads must be >= 0");
    sim.threads = static_cast<int>(*th);
  }
  if (auto s = r.Number("init_scale", false); s.has_value()) {
    if (!(*s >= 0)) errors.Add("init_scale must be >= 0");
    sim.init_scale = *s;
  }

  {
    ObjectReader out = r.Child("output", false);
    if (auto d = out.String("dir", false); d.has_value()) cfg.output.dir = *d;
    if (auto c = out.String("csv", false); c.has_value()) cfg.output.csv = *c;
    if (auto s = out.String("summary", false); s.has_value()) {
      cfg.output.summary = *s;
    }
    out.Finish();
  }

  r.Finish();
  if (!errors.empty()) return absl::InvalidArgumentError(errors.Joined());
  return cfg;
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrFormat("cannot open config file %s", path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseExperimentConfig(buf.str(), DefaultOutputDir());
}

absl::StatusOr<BoundsSweep> ParseBoundsSweep(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sweep is not valid JSON: %s", e.what()));
  }
  Errors errors;
  ObjectReader r(&root, "", &errors);
  if (!r.present()) return absl::InvalidArgumentError(errors.Joined());
  BoundsSweep sweep;

  if (auto s = r.Integer("seed", true); s.has_value()) {
    if (*s < 0) errors.Add("seed must be >= 0");
    sweep.seed = static_cast<uint64_t>(*s);
  }
  if (auto n = r.Integer("mc_trials", false); n.has_value()) {
    if (*n < 0) errors.Add("mc_trials must be >= 0");
    sweep.mc_trials = *n;
  }
  if (auto c = r.Number("c", false); c.has_value()) {
    if (!(*c > 0 && *c < 1)) errors.Add("c must be in (0, 1)");
    sweep.c = *c;
  }
  if (auto b = r.Numbers("b", true); b.has_value()) {
    if (b->empty()) errors.Add("b must not be empty");
    for (double v : *b) {
      if (!(v > 0)) errors.Add("every b must be positive");
    }
    sweep.b = *b;
  }
  if (r.Has("fixed_u")) {
    if (auto u = r.Numbers("fixed_u", true); u.has_value()) {
      if (u->empty()) errors.Add("fixed_u must not be empty");
      sweep.fixed_u = *u;
    }
    const char* why = "when fixed_u is given";
    r.Forbid("M", why);
    r.Forbid("ensembles", why);
    r.Forbid("u_max", why);
  } else {
    if (auto ms = r.Numbers("M", true); ms.has_value()) {
      if (ms->empty()) errors.Add("M must not be empty");
      for (double v : *ms) {
        if (v < 1 || v != std::floor(v)) {
          errors.Add("every M must be an integer >= 1");
          break;
        }
        sweep.M.push_back(static_cast<int>(v));
      }
    }
    if (auto e = r.Integer("ensembles", false); e.has_value()) {
      if (*e < 1) errors.Add("ensembles must be >= 1");
      sweep.ensembles = static_cast<int>(*e);
    }
    if (auto u = r.Number("u_max", false); u.has_value()) {
      if (!(*u > 0)) errors.Add("u_max must be positive");
      sweep.u_max = *u;
    }
  }
  r.Finish();
  if (!errors.empty()) return absl::InvalidArgumentError(errors.Joined());
  return sweep;
}

}  // namespace stosign
