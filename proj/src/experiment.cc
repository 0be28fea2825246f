// Copyright 2026 The Clipgrain Authors
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

#include "clipgrain/experiment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "clipgrain/errors.h"
#include "clipgrain/numerics.h"
#include "clipgrain/parallel.h"

namespace clipgrain {
namespace {

using nlohmann::json;

[[noreturn]] void ConfigFail(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::kConfig, path + ": " + why);
}

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Rejects keys outside `allowed` so typos do not silently fall back to
// defaults.
void CheckKeys(const json& obj, const std::string& path,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) ConfigFail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) ConfigFail(Join(path, key), "unknown key");
  }
}

double GetReal(const json& obj, const std::string& path, const char* key,
               double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) ConfigFail(Join(path, key), "expected a number");
  return v.get<double>();
}

int64_t GetInt(const json& obj, const std::string& path, const char* key,
               int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) ConfigFail(Join(path, key), "expected an integer");
  return v.get<int64_t>();
}

size_t GetCount(const json& obj, const std::string& path, const char* key,
                size_t fallback) {
  const int64_t v = GetInt(obj, path, key, static_cast<int64_t>(fallback));
  if (v < 0) ConfigFail(Join(path, key), "must be >= 0");
  return static_cast<size_t>(v);
}

std::string GetString(const json& obj, const std::string& path, const char* key,
                      const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) ConfigFail(Join(path, key), "expected a string");
  return v.get<std::string>();
}

json RealToJson(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

SyntheticSpec ParseSynthetic(const json& obj, const std::string& path) {
  CheckKeys(obj, path,
            {"task", "dim", "classes", "train_size", "test_size", "separation",
             "noise", "label_noise", "outlier_fraction", "outlier_scale",
             "seed"});
  SyntheticSpec s;
  const std::string task = GetString(obj, path, "task", "classification");
  if (task == "classification") {
    s.task = TaskKind::kClassification;
  } else if (task == "regression") {
    s.task = TaskKind::kRegression;
  } else {
    ConfigFail(Join(path, "task"), "expected classification or regression");
  }
  s.dim = GetCount(obj, path, "dim", s.dim);
  s.classes = GetCount(obj, path, "classes", s.classes);
  s.train_size = GetCount(obj, path, "train_size", s.train_size);
  s.test_size = GetCount(obj, path, "test_size", s.test_size);
  s.separation = GetReal(obj, path, "separation", s.separation);
  s.noise = GetReal(obj, path, "noise", s.noise);
  s.label_noise = GetReal(obj, path, "label_noise", s.label_noise);
  s.outlier_fraction = GetReal(obj, path, "outlier_fraction", s.outlier_fraction);
  s.outlier_scale = GetReal(obj, path, "outlier_scale", s.outlier_scale);
  s.seed = static_cast<uint64_t>(GetInt(obj, path, "seed", 0));
  return s;
}

json SyntheticToJson(const SyntheticSpec& s) {
  return json{
      {"task", s.task == TaskKind::kClassification ? "classification"
                                                   : "regression"},
      {"dim", s.dim},
      {"classes", s.classes},
      {"train_size", s.train_size},
      {"test_size", s.test_size},
      {"separation", s.separation},
      {"noise", s.noise},
      {"label_noise", s.label_noise},
      {"outlier_fraction", s.outlier_fraction},
      {"outlier_scale", s.outlier_scale},
      {"seed", s.seed},
  };
}

std::vector<uint64_t> ParseSeedsJson(const json& v, const std::string& path) {
  if (!v.is_array()) ConfigFail(path, "expected an array of seeds");
  std::vector<uint64_t> seeds;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<int64_t>() >= 0)) {
      ConfigFail(path + "[" + std::to_string(i) + "]",
                 "expected a non-negative integer");
    }
    seeds.push_back(v[i].get<uint64_t>());
  }
  return seeds;
}

}  // namespace

Model BuildModel(const ModelSpec& spec, size_t dim) {
  switch (spec.kind) {
    case ModelKind::kLinearRegression:
      return Model::LinearRegression(dim);
    case ModelKind::kLogisticRegression:
      return Model::LogisticRegression(dim, spec.classes);
    case ModelKind::kMlp:
      return Model::Mlp(dim, spec.hidden, spec.classes);
  }
  throw Error(ErrorCode::kConfig, "model.kind: unsupported");
}

ClippingPolicy ParsePolicy(const json& doc, const std::string& path) {
  if (!doc.is_object()) ConfigFail(path, "expected an object");
  const std::string kind = GetString(doc, path, "kind", "");
  if (kind == "none") {
    CheckKeys(doc, path, {"kind"});
    return NoClipping{};
  }
  if (kind == "per_core") {
    CheckKeys(doc, path, {"kind", "bound"});
    if (!doc.contains("bound")) ConfigFail(Join(path, "bound"), "required");
    return PerCoreClipping{GetReal(doc, path, "bound", 0.0)};
  }
  if (kind == "adaptive_per_core") {
    CheckKeys(doc, path, {"kind"});
    return AdaptivePerCoreClipping{};
  }
  if (kind == "per_example") {
    CheckKeys(doc, path, {"kind", "bound"});
    if (!doc.contains("bound")) ConfigFail(Join(path, "bound"), "required");
    return PerExampleClipping{GetReal(doc, path, "bound", 0.0)};
  }
  if (kind == "micro_batch") {
    CheckKeys(doc, path, {"kind", "bound", "micro_size"});
    if (!doc.contains("bound")) ConfigFail(Join(path, "bound"), "required");
    if (!doc.contains("micro_size")) ConfigFail(Join(path, "micro_size"), "required");
    return MicroBatchClipping{GetReal(doc, path, "bound", 0.0),
                              GetCount(doc, path, "micro_size", 1)};
  }
  ConfigFail(Join(path, "kind"),
             "expected none, per_core, adaptive_per_core, per_example or "
             "micro_batch, got '" + kind + "'");
}

json PolicyToJson(const ClippingPolicy& policy) {
  if (std::holds_alternative<NoClipping>(policy)) return {{"kind", "none"}};
  if (const auto* p = std::get_if<PerCoreClipping>(&policy)) {
    return {{"kind", "per_core"}, {"bound", RealToJson(p->bound)}};
  }
  if (std::holds_alternative<AdaptivePerCoreClipping>(policy)) {
    return {{"kind", "adaptive_per_core"}};
  }
  if (const auto* p = std::get_if<PerExampleClipping>(&policy)) {
    return {{"kind", "per_example"}, {"bound", RealToJson(p->bound)}};
  }
  const auto& p = std::get<MicroBatchClipping>(policy);
  return {{"kind", "micro_batch"},
          {"bound", RealToJson(p.bound)},
          {"micro_size", p.micro_size}};
}

ExperimentConfig ParseExperimentConfig(const json& doc) {
  CheckKeys(doc, "",
            {"model", "data", "train", "policies", "secret_sharer", "sweep",
             "gradcheck", "seeds", "output_dir", "parallel"});
  ExperimentConfig c;

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    CheckKeys(m, "model", {"kind", "hidden", "classes"});
    c.model.kind = ParseModelKind(GetString(m, "model", "kind", "mlp"));
    c.model.hidden = GetCount(m, "model", "hidden", c.model.hidden);
    c.model.classes = GetCount(m, "model", "classes", c.model.classes);
  }

  if (doc.contains("data")) {
    const json& d = doc.at("data");
    CheckKeys(d, "data", {"train_path", "test_path", "synthetic"});
    c.data.train_path = GetString(d, "data", "train_path", "");
    c.data.test_path = GetString(d, "data", "test_path", "");
    if (d.contains("synthetic")) {
      c.data.synthetic = ParseSynthetic(d.at("synthetic"), "data.synthetic");
    }
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    CheckKeys(t, "train",
              {"iterations", "cores", "per_core_batch", "learning_rate",
               "eval_every", "sampling", "threads"});
    c.train.iterations = GetInt(t, "train", "iterations", c.train.iterations);
    c.train.cores = GetCount(t, "train", "cores", c.train.cores);
    c.train.per_core_batch =
        GetCount(t, "train", "per_core_batch", c.train.per_core_batch);
    c.train.learning_rate =
        GetReal(t, "train", "learning_rate", c.train.learning_rate);
    c.train.eval_every = GetInt(t, "train", "eval_every", c.train.eval_every);
    c.train.threads = GetCount(t, "train", "threads", c.train.threads);
    const std::string sampling =
        GetString(t, "train", "sampling", "with_replacement");
    if (sampling == "with_replacement") {
      c.train.sampling = SamplingMode::kWithReplacement;
    } else if (sampling == "full_batch") {
      c.train.sampling = SamplingMode::kFullBatch;
    } else {
      ConfigFail("train.sampling", "expected with_replacement or full_batch");
    }
  }

  if (doc.contains("policies")) {
    const json& p = doc.at("policies");
    if (!p.is_array()) ConfigFail("policies", "expected an array");
    c.policies.clear();
    for (size_t i = 0; i < p.size(); ++i) {
      c.policies.push_back(
          ParsePolicy(p[i], "policies[" + std::to_string(i) + "]"));
    }
  }

  if (doc.contains("secret_sharer")) {
    const json& s = doc.at("secret_sharer");
    CheckKeys(s, "secret_sharer",
              {"cohorts", "canaries_per_cohort", "holdout_size", "offset_sigmas"});
    if (s.contains("cohorts")) {
      const json& k = s.at("cohorts");
      if (!k.is_array()) ConfigFail("secret_sharer.cohorts", "expected an array");
      c.secret_sharer.cohorts.clear();
      for (size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_number_integer()) {
          ConfigFail("secret_sharer.cohorts[" + std::to_string(i) + "]",
                     "expected an integer");
        }
        c.secret_sharer.cohorts.push_back(k[i].get<int64_t>());
      }
    }
    c.secret_sharer.canaries_per_cohort = GetCount(
        s, "secret_sharer", "canaries_per_cohort", c.secret_sharer.canaries_per_cohort);
    c.secret_sharer.holdout_size =
        GetCount(s, "secret_sharer", "holdout_size", c.secret_sharer.holdout_size);
    c.secret_sharer.offset_sigmas =
        GetReal(s, "secret_sharer", "offset_sigmas", c.secret_sharer.offset_sigmas);
  }

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    CheckKeys(s, "sweep", {"bounds"});
    if (s.contains("bounds")) {
      const json& b = s.at("bounds");
      if (!b.is_array()) ConfigFail("sweep.bounds", "expected an array");
      c.sweep_bounds.clear();
      for (size_t i = 0; i < b.size(); ++i) {
        if (!b[i].is_number()) {
          ConfigFail("sweep.bounds[" + std::to_string(i) + "]", "expected a number");
        }
        c.sweep_bounds.push_back(b[i].get<double>());
      }
    }
  }

  if (doc.contains("gradcheck")) {
    const json& g = doc.at("gradcheck");
    CheckKeys(g, "gradcheck", {"draws", "tolerance", "eps", "max_batch"});
    c.gradcheck.draws = GetCount(g, "gradcheck", "draws", c.gradcheck.draws);
    c.gradcheck.tolerance = GetReal(g, "gradcheck", "tolerance", c.gradcheck.tolerance);
    c.gradcheck.eps = GetReal(g, "gradcheck", "eps", c.gradcheck.eps);
    c.gradcheck.max_batch = GetCount(g, "gradcheck", "max_batch", c.gradcheck.max_batch);
  }

  if (doc.contains("seeds")) c.seeds = ParseSeedsJson(doc.at("seeds"), "seeds");
  c.output_dir = GetString(doc, "", "output_dir", c.output_dir);
  c.parallel = GetCount(doc, "", "parallel", c.parallel);
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  return ParseExperimentConfig(doc);
}

json ConfigToJson(const ExperimentConfig& c) {
  json doc;
  doc["model"] = {{"kind", ModelKindName(c.model.kind)},
                  {"hidden", c.model.hidden},
                  {"classes", c.model.classes}};
  json data = json::object();
  if (!c.data.train_path.empty()) data["train_path"] = c.data.train_path;
  if (!c.data.test_path.empty()) data["test_path"] = c.data.test_path;
  if (c.data.synthetic) data["synthetic"] = SyntheticToJson(*c.data.synthetic);
  doc["data"] = data;
  doc["train"] = {
      {"iterations", c.train.iterations},
      {"cores", c.train.cores},
      {"per_core_batch", c.train.per_core_batch},
      {"learning_rate", c.train.learning_rate},
      {"eval_every", c.train.eval_every},
      {"sampling", c.train.sampling == SamplingMode::kFullBatch
                       ? "full_batch"
                       : "with_replacement"},
      {"threads", c.train.threads},
  };
  json policies = json::array();
  for (const ClippingPolicy& p : c.policies) policies.push_back(PolicyToJson(p));
  doc["policies"] = policies;
  doc["secret_sharer"] = {
      {"cohorts", c.secret_sharer.cohorts},
      {"canaries_per_cohort", c.secret_sharer.canaries_per_cohort},
      {"holdout_size", c.secret_sharer.holdout_size},
      {"offset_sigmas", c.secret_sharer.offset_sigmas},
  };
  doc["sweep"] = {{"bounds", c.sweep_bounds}};
  doc["gradcheck"] = {{"draws", c.gradcheck.draws},
                      {"tolerance", c.gradcheck.tolerance},
                      {"eps", c.gradcheck.eps},
                      {"max_batch", c.gradcheck.max_batch}};
  doc["seeds"] = c.seeds;
  doc["output_dir"] = c.output_dir;
  doc["parallel"] = c.parallel;
  return doc;
}

void ValidateExperimentConfig(const ExperimentConfig& c, bool needs_data) {
  if (c.model.kind != ModelKind::kLinearRegression && c.model.classes < 2) {
    ConfigFail("model.classes", "must be >= 2 for classifiers");
  }
  if (c.model.kind == ModelKind::kMlp && c.model.hidden == 0) {
    ConfigFail("model.hidden", "must be >= 1");
  }
  const bool have_paths = !c.data.train_path.empty() || !c.data.test_path.empty();
  if (have_paths && c.data.synthetic) {
    ConfigFail("data", "give either train_path/test_path or synthetic, not both");
  }
  if (have_paths && (c.data.train_path.empty() || c.data.test_path.empty())) {
    ConfigFail("data", "train_path and test_path must both be set");
  }
  if (needs_data && !have_paths && !c.data.synthetic) {
    ConfigFail("data", "no dataset: set train_path/test_path or synthetic");
  }
  if (c.data.synthetic) {
    const SyntheticSpec& s = *c.data.synthetic;
    const bool classifier = c.model.kind != ModelKind::kLinearRegression;
    if (classifier != (s.task == TaskKind::kClassification)) {
      ConfigFail("data.synthetic.task", "does not match model.kind");
    }
    if (classifier && s.classes != c.model.classes) {
      ConfigFail("data.synthetic.classes", "must equal model.classes");
    }
    if (s.dim == 0) ConfigFail("data.synthetic.dim", "must be >= 1");
    if (s.train_size == 0) ConfigFail("data.synthetic.train_size", "must be >= 1");
    if (s.test_size == 0) ConfigFail("data.synthetic.test_size", "must be >= 1");
    if (s.label_noise < 0 || s.outlier_fraction < 0 ||
        s.label_noise + s.outlier_fraction > 1) {
      ConfigFail("data.synthetic", "label_noise + outlier_fraction must lie in [0, 1]");
    }
  }
  ValidateTrainConfig(c.train);
  if (c.policies.empty()) ConfigFail("policies", "must be non-empty");
  for (size_t i = 0; i < c.policies.size(); ++i) {
    try {
      ValidatePolicy(c.policies[i], c.train.per_core_batch);
    } catch (const Error& e) {
      ConfigFail("policies[" + std::to_string(i) + "]", e.what());
    }
  }
  ValidateSecretSharerConfig(c.secret_sharer);
  for (size_t i = 0; i < c.sweep_bounds.size(); ++i) {
    if (!(c.sweep_bounds[i] > 0)) {
      ConfigFail("sweep.bounds[" + std::to_string(i) + "]", "must be > 0");
    }
  }
  if (c.gradcheck.draws == 0) ConfigFail("gradcheck.draws", "must be >= 1");
  if (!(c.gradcheck.tolerance > 0)) ConfigFail("gradcheck.tolerance", "must be > 0");
  if (!(c.gradcheck.eps > 0)) ConfigFail("gradcheck.eps", "must be > 0");
  if (c.gradcheck.max_batch == 0) ConfigFail("gradcheck.max_batch", "must be >= 1");
  if (c.seeds.empty()) ConfigFail("seeds", "must be non-empty");
  if (std::set<uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    ConfigFail("seeds", "must be distinct");
  }
  std::set<std::string> tags;
  for (const ClippingPolicy& p : c.policies) {
    if (!tags.insert(PolicyTag(p)).second) {
      ConfigFail("policies", "duplicate policy " + PolicyTag(p));
    }
  }
  if (c.output_dir.empty()) ConfigFail("output_dir", "must be non-empty");
  if (c.parallel == 0) ConfigFail("parallel", "must be >= 1");
}

TrainTestSplit LoadData(const ExperimentConfig& config) {
  TrainTestSplit split;
  if (config.data.synthetic) {
    split = GenerateSynthetic(*config.data.synthetic);
  } else {
    split.train = LoadDataset(config.data.train_path);
    split.test = LoadDataset(config.data.test_path);
  }
  if (split.train.empty()) ConfigFail("data", "training set is empty");
  if (split.test.empty()) ConfigFail("data", "test set is empty");
  if (split.train.dim != split.test.dim) {
    ConfigFail("data", "train and test feature dimensions differ");
  }
  const Model model = BuildModel(config.model, split.train.dim);
  for (const Dataset* d : {&split.train, &split.test}) {
    for (const Example& ex : d->examples) {
      if (ex.is_canary) {
        ConfigFail("data", "example " + std::to_string(ex.id) +
                               " is marked as a canary; canaries are generated "
                               "by the audit");
      }
      if (model.is_classifier()) {
        const double t = ex.target;
        if (t != std::floor(t) || t < 0 ||
            t >= static_cast<double>(model.classes())) {
          ConfigFail("data", "example " + std::to_string(ex.id) +
                                 " has a label outside [0, model.classes)");
        }
      }
    }
  }
  return split;
}

std::vector<uint64_t> ParseSeedList(const std::string& text) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    const auto end = item.find_last_not_of(" \t");
    if (begin == std::string::npos) ConfigFail("seeds", "empty entry in '" + text + "'");
    item = item.substr(begin, end - begin + 1);
    if (item.find_first_not_of("0123456789") != std::string::npos) {
      ConfigFail("seeds", "'" + item + "' is not a non-negative integer");
    }
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      ConfigFail("seeds", "'" + item + "' is out of range");
    }
  }
  if (seeds.empty()) ConfigFail("seeds", "empty seed list");
  return seeds;
}

SweepResult RunBoundSweep(const Model& model, const TrainTestSplit& data,
                          const TrainConfig& train, std::span<const double> bounds,
                          std::span<const uint64_t> seeds, size_t parallel) {
  if (bounds.empty()) ConfigFail("sweep.bounds", "must be non-empty");
  for (double b : bounds) {
    if (!(b > 0)) ConfigFail("sweep.bounds", "bounds must be > 0");
  }
  if (seeds.empty()) ConfigFail("seeds", "must be non-empty");

  std::vector<ClippingPolicy> policies = {NoClipping{}};
  for (double b : bounds) policies.push_back(PerCoreClipping{b});

  SweepResult result;
  result.runs.resize(seeds.size() * policies.size());
  ParallelFor(result.runs.size(), parallel, [&](size_t task) {
    const size_t s = task / policies.size();
    const size_t p = task % policies.size();
    TrainConfig cfg = train;
    cfg.policy = policies[p];
    cfg.seed = seeds[s];
    TrainTrajectory traj;
    try {
      traj = Train(model, data.train, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "policy " + PolicyTag(policies[p]) + ", seed " +
                                std::to_string(seeds[s]) + ": " + e.what());
    }
    SweepRun& run = result.runs[task];
    run.policy = PolicyTag(policies[p]);
    if (p > 0) run.bound = bounds[p - 1];
    run.seed = seeds[s];
    run.metrics = GeneralizationGap(model, traj.final_params, data.train, data.test);
  });

  for (size_t p = 0; p < policies.size(); ++p) {
    SweepSummary row;
    row.policy = PolicyTag(policies[p]);
    if (p > 0) row.bound = bounds[p - 1];
    std::vector<double> train_m, test_m, gap_m;
    for (size_t s = 0; s < seeds.size(); ++s) {
      const SweepRun& r = result.runs[s * policies.size() + p];
      train_m.push_back(r.metrics.train_metric);
      test_m.push_back(r.metrics.test_metric);
      gap_m.push_back(r.metrics.gap);
    }
    row.mean_train_metric = Mean(train_m);
    row.mean_test_metric = Mean(test_m);
    row.mean_gap = Mean(gap_m);
    result.summary.push_back(std::move(row));
  }

  std::vector<size_t> order(result.summary.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return result.summary[a].mean_test_metric < result.summary[b].mean_test_metric;
  });
  for (size_t r = 0; r < order.size(); ++r) result.summary[order[r]].rank = r + 1;

  size_t best = 0;
  for (size_t i = 1; i < result.summary.size(); ++i) {
    const SweepSummary& cand = result.summary[i];
    if (best == 0 || cand.mean_test_metric < result.summary[best].mean_test_metric ||
        (cand.mean_test_metric == result.summary[best].mean_test_metric &&
         *cand.bound < *result.summary[best].bound)) {
      best = i;
    }
  }
  result.summary[best].selected = true;
  result.selected_bound = *result.summary[best].bound;
  return result;
}

void WriteSweepRunsCsv(const SweepResult& result, std::ostream& out) {
  out << "policy,bound,seed,train_metric,test_metric,gap\n";
  for (const SweepRun& r : result.runs) {
    out << r.policy << ',' << (r.bound ? FormatReal(*r.bound) : "") << ','
        << r.seed << ',' << FormatReal(r.metrics.train_metric) << ','
        << FormatReal(r.metrics.test_metric) << ',' << FormatReal(r.metrics.gap)
        << '\n';
  }
}

void WriteSweepSummaryCsv(const SweepResult& result, std::ostream& out) {
  out << "policy,bound,mean_train_metric,mean_test_metric,mean_gap,rank,selected\n";
  for (const SweepSummary& r : result.summary) {
    out << r.policy << ',' << (r.bound ? FormatReal(*r.bound) : "") << ','
        << FormatReal(r.mean_train_metric) << ',' << FormatReal(r.mean_test_metric)
        << ',' << FormatReal(r.mean_gap) << ',' << r.rank << ','
        << (r.selected ? 1 : 0) << '\n';
  }
}

std::vector<GradcheckRow> RunGradcheck(const GradcheckSpec& spec, uint64_t seed,
                                       const GradientFunction& gradient) {
  constexpr size_t kDim = 5;
  constexpr size_t kHidden = 4;
  constexpr size_t kClasses = 3;
  const std::vector<Model> models = {
      Model::LinearRegression(kDim),
      Model::LogisticRegression(kDim, kClasses),
      Model::Mlp(kDim, kHidden, kClasses),
  };
  std::vector<GradcheckRow> rows;
  SeededRng root(seed);
  for (size_t m = 0; m < models.size(); ++m) {
    const Model& model = models[m];
    SeededRng rng = root.Split(m);
    GradcheckRow row;
    row.model = ModelKindName(model.kind());
    for (size_t draw = 0; draw < spec.draws; ++draw) {
      ParamVector w = model.InitParams(rng);
      for (double& v : w) v += 0.5 * rng.Normal();
      const size_t batch_size = 1 + rng.UniformInt(spec.max_batch);
      std::vector<Example> batch(batch_size);
      for (size_t i = 0; i < batch_size; ++i) {
        batch[i].id = static_cast<int64_t>(i);
        batch[i].features.resize(kDim);
        for (double& x : batch[i].features) x = 1.5 * rng.Normal();
        batch[i].target = model.is_classifier()
                              ? static_cast<double>(rng.UniformInt(kClasses))
                              : 2.0 * rng.Normal();
      }
      const RealVector analytic =
          gradient ? gradient(model, w, batch) : model.BatchGradient(w, batch);
      const RealVector numeric = FiniteDiffGradient(
          [&](std::span<const double> p) { return model.BatchLoss(p, batch); }, w,
          spec.eps);
      row.max_relative_error =
          std::max(row.max_relative_error, RelativeError(analytic, numeric));
      ++row.draws;
    }
    row.passed = row.max_relative_error <= spec.tolerance;
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteGradcheckCsv(std::span<const GradcheckRow> rows, std::ostream& out) {
  out << "model,draws,max_relative_error,passed\n";
  for (const GradcheckRow& r : rows) {
    out << r.model << ',' << r.draws << ',' << FormatReal(r.max_relative_error)
        << ',' << (r.passed ? 1 : 0) << '\n';
  }
}

}  // namespace clipgrain
