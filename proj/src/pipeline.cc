// src/pipeline.cc

// Copyright 2026  The adfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "adfuse/pipeline.h"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "adfuse/error.h"
#include "fmt/format.h"

namespace adfuse {

namespace fs = std::filesystem;

namespace {

std::string ReadFile(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

fs::path Resolve(const fs::path &root, const fs::path &p) {
  if (p.empty() || p.is_absolute() || root.empty()) return p;
  return root / p;
}

std::string Relative(const fs::path &p, const fs::path &base) {
  if (base.empty()) return p.generic_string();
  const fs::path r = p.lexically_relative(base);
  return r.empty() ? p.generic_string() : r.generic_string();
}

struct LoadedSubject {
  SubjectRecord record;
  EmbeddingBundle bundle;
};

LoadedSubject LoadSubject(const SubjectRecord &r,
                          const BundleExpectations &shapes,
                          const FeatureConfig &fc) {
  LoadedSubject s{r, {}};
  if (r.bundle.empty() || !fs::exists(r.bundle))
    throw DataError("subject " + r.id + ": bundle file missing: " +
                    r.bundle.string());
  try {
    s.bundle = ReadBundle(r.bundle);
  } catch (const Error &e) {
    throw DataError("subject " + r.id + ": " + e.what());
  }
  std::optional<Transcript> transcript;
  if (!r.transcript.empty()) {
    if (!fs::exists(r.transcript))
      throw DataError("subject " + r.id + ": transcript file missing: " +
                      r.transcript.string());
    try {
      transcript = LoadTranscript(r.transcript, r.id);
    } catch (const Error &e) {
      throw DataError("subject " + r.id + ": " + e.what());
    }
  }
  BundleExpectations expect = shapes;
  expect.subject_id = r.id;
  for (const SystemPart &p : fc.system) {
    if (p.kind == SystemPart::Kind::kAcoustic)
      expect.required_tags.push_back(p.tag);
    else
      expect.require_tensor = true;
  }
  const auto violations =
      ValidateBundle(s.bundle, expect, transcript ? &*transcript : nullptr);
  if (!violations.empty()) {
    std::string msg = "subject " + r.id + ": bundle does not conform:";
    for (const std::string &v : violations) msg += " [" + v + "]";
    throw DataError(msg);
  }
  return s;
}

// Per-subject loading and feature extraction runs on worker threads;
// results keep the record order.
DesignMatrix BuildMatrix(const std::vector<SubjectRecord> &records,
                         const BundleExpectations &shapes,
                         const FeatureConfig &fc) {
  std::vector<std::vector<FeatureRow>> rows(records.size());
  const std::size_t n_workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  std::vector<std::future<void>> workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < records.size(); i += n_workers) {
        const LoadedSubject s = LoadSubject(records[i], shapes, fc);
        rows[i] = SubjectFeatureRows(records[i].id, s.bundle, fc);
      }
    }));
  }
  // Surface the first failure in record order.
  std::exception_ptr first;
  for (auto &f : workers) {
    try {
      f.get();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);

  DesignMatrix m;
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const FeatureRow &row : rows[i])
      m.AddRow(row.values, records[i].label, row.id, records[i].id);
  return m;
}

nlohmann::json InputDigests(const fs::path &manifest_path,
                            const std::vector<SubjectRecord> &records) {
  const fs::path base = manifest_path.parent_path();
  nlohmann::json j = nlohmann::json::object();
  j[Relative(manifest_path, base)] = FileDigest(manifest_path);
  for (const SubjectRecord &r : records) {
    if (!r.bundle.empty()) j[Relative(r.bundle, base)] = FileDigest(r.bundle);
    if (!r.transcript.empty())
      j[Relative(r.transcript, base)] = FileDigest(r.transcript);
  }
  return j;
}

nlohmann::json RunRecord(const std::string &command, const PipelineConfig &c,
                         nlohmann::json inputs) {
  return {{"command", command},
          {"version", kVersion},
          {"config", c.ToJson()},
          {"seed", c.seed},
          {"inputs", std::move(inputs)}};
}

nlohmann::json FeatureJson(const FeatureConfig &fc) {
  return {{"system", SystemToString(fc.system)},
          {"pooling", ToString(fc.pooling)},
          {"layers", fc.layers.ToString()},
          {"num_layers", fc.layers.num_layers}};
}

FeatureConfig FeatureFromJson(const nlohmann::json &j) {
  FeatureConfig fc;
  fc.system = ParseSystem(j.at("system").get<std::string>());
  fc.pooling = ParsePooling(j.value("pooling", std::string("mean")));
  fc.layers = LayerRange::Parse(j.value("layers", std::string("2..12")),
                                j.value("num_layers", 13));
  return fc;
}

struct LoadedModel {
  LinearModel model;
  FeatureConfig features;
};

LoadedModel LoadModel(const fs::path &path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception &e) {
    throw DataError("model " + path.string() + ": " + e.what());
  }
  LoadedModel lm;
  lm.model = ModelFromJson(j);
  lm.features = FeatureFromJson(j.at("features"));
  if (!lm.model.scaler)
    throw DataError("model " + path.string() + " carries no scaler");
  return lm;
}

std::string PredictionsCsv(const std::vector<SubjectPrediction> &preds) {
  std::string out = "subject,truth,predicted,mean_score,rows\n";
  for (const SubjectPrediction &p : preds)
    out += fmt::format("{},{},{},{},{}\n", p.subject, ToString(p.truth),
                       ToString(p.predicted), p.mean_score, p.n_rows);
  return out;
}

struct Scored {
  LoadedModel lm;
  std::vector<SubjectRecord> records;
  std::vector<SubjectPrediction> predictions;
  nlohmann::json inputs;
};

Scored ScorePartition(const PipelineConfig &config, const fs::path &model_path,
                      Partition partition, bool need_labels) {
  Scored s;
  s.lm = LoadModel(model_path);
  const DatasetManifest manifest = LoadManifest(config.manifest);
  s.records = manifest.InPartition(partition);
  if (s.records.empty())
    throw DataError("manifest has no subjects in partition " +
                    ToString(partition));
  if (need_labels)
    for (const SubjectRecord &r : s.records)
      if (r.label == Label::kUnknown)
        throw DataError("subject " + r.id +
                        " has no label; use predict instead of evaluate");

  const DesignMatrix raw = BuildMatrix(s.records, manifest.shapes, s.lm.features);
  if (raw.Width() != s.lm.model.Width())
    throw DimensionError(fmt::format(
        "model width {} does not match feature width {} for system {}",
        s.lm.model.Width(), raw.Width(), SystemToString(s.lm.features.system)));
  const DesignMatrix m = ApplyScaler(*s.lm.model.scaler, raw);
  std::vector<std::string> subjects(m.NumRows());
  std::vector<double> scores(m.NumRows());
  for (std::size_t i = 0; i < m.NumRows(); ++i) {
    subjects[i] = m.subject(i);
    scores[i] = Decision(s.lm.model, m.Row(i));
  }
  s.predictions = VoteBySubject(subjects, m.labels(), scores);
  s.inputs = InputDigests(config.manifest, s.records);
  s.inputs[Relative(model_path, config.manifest.parent_path())] =
      FileDigest(model_path);
  return s;
}

}  // namespace

PipelineConfig PipelineConfig::FromJson(const nlohmann::json &j,
                                        const fs::path &root) {
  PipelineConfig c;
  if (j.contains("manifest"))
    c.manifest = Resolve(root, j.at("manifest").get<std::string>());
  c.system = j.value("system", c.system);
  if (j.contains("pooling"))
    c.pooling = ParsePooling(j.at("pooling").get<std::string>());
  if (j.contains("layers"))
    c.layers = LayerRange::Parse(j.at("layers").get<std::string>());
  c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
  c.seed = j.value("seed", c.seed);
  if (j.contains("c_grid")) c.c_grid = j.at("c_grid").get<std::vector<double>>();
  c.tolerance = j.value("tolerance", c.tolerance);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.bias_scale = j.value("bias_scale", c.bias_scale);
  if (j.contains("out")) c.out = Resolve(root, j.at("out").get<std::string>());
  else c.out = Resolve(root, c.out);
  return c;
}

nlohmann::json PipelineConfig::ToJson() const {
  return {{"manifest", manifest.generic_string()},
          {"system", system},
          {"pooling", adfuse::ToString(pooling)},
          {"layers", layers.ToString()},
          {"dev_fraction", dev_fraction},
          {"seed", seed},
          {"c_grid", c_grid},
          {"tolerance", tolerance},
          {"max_epochs", max_epochs},
          {"bias_scale", bias_scale},
          {"out", out.generic_string()}};
}

FeatureConfig PipelineConfig::Features() const {
  FeatureConfig fc;
  fc.system = ParseSystem(system);
  fc.pooling = pooling;
  fc.layers = layers;
  return fc;
}

TrainConfig PipelineConfig::Training() const {
  TrainConfig t;
  t.tolerance = tolerance;
  t.max_epochs = max_epochs;
  t.seed = seed;
  t.bias_scale = bias_scale;
  return t;
}

StagedOutput::StagedOutput(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  staging_ = dir_ / fmt::format(".staging-{}", static_cast<long>(::getpid()));
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

StagedOutput::~StagedOutput() {
  std::error_code ec;
  if (!committed_) fs::remove_all(staging_, ec);
}

fs::path StagedOutput::Path(const std::string &name) const {
  return staging_ / name;
}

void StagedOutput::WriteText(const std::string &name,
                             const std::string &text) const {
  std::ofstream out(Path(name), std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + Path(name).string());
  out << text;
  if (!out) throw Error("write failed for " + Path(name).string());
}

void StagedOutput::WriteJson(const std::string &name,
                             const nlohmann::json &j) const {
  WriteText(name, j.dump(2) + "\n");
}

void StagedOutput::Commit() {
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(staging_)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const fs::path &f : files) fs::rename(f, dir_ / f.filename());
  fs::remove_all(staging_);
  committed_ = true;
}

std::string FileDigest(const fs::path &path) {
  const std::string bytes = ReadFile(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) !=
      1)
    throw Error("SHA-256 failed for " + path.string());
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

Transcript LoadTranscript(const fs::path &path, const std::string &subject_id) {
  const std::string text = ReadFile(path);
  if (path.extension() == ".json") {
    Transcript t;
    try {
      t = TranscriptFromJson(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception &e) {
      throw DataError(path.string() + ": " + e.what());
    }
    if (t.subject_id != subject_id)
      throw DataError(path.string() + ": transcript belongs to " +
                      t.subject_id + ", expected " + subject_id);
    return t;
  }
  return ParseTranscript(text, subject_id);
}

NormalizeSummary RunNormalize(const fs::path &input_dir,
                              const fs::path &output_dir) {
  if (!fs::is_directory(input_dir))
    throw Error("input directory " + input_dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(input_dir))
    if (e.is_regular_file() && e.path().extension() == ".cha")
      files.push_back(e.path());
  if (files.empty())
    throw DataError("no .cha files in " + input_dir.string());
  std::sort(files.begin(), files.end());

  std::vector<Transcript> transcripts;
  std::map<std::string, std::string> partition_of;
  for (const fs::path &f : files) {
    const std::string id = f.stem().string();
    transcripts.push_back(ParseTranscript(ReadFile(f), id));
    partition_of[id] = "all";
  }

  NormalizeSummary summary;
  summary.files = files.size();
  summary.stats = ComputeCorpusStats(transcripts, partition_of);
  StagedOutput out(output_dir);
  for (const Transcript &t : transcripts) {
    summary.unknown_codes += t.unknown_codes;
    if (t.unknown_codes > 0)
      summary.unknown_by_file.emplace_back(t.subject_id + ".cha",
                                           t.unknown_codes);
    out.WriteJson(t.subject_id + ".json", ToJson(t));
  }
  out.WriteJson("stats.json", ToJson(summary.stats));
  out.Commit();
  return summary;
}

CorpusStats RunStats(const fs::path &manifest_path) {
  const DatasetManifest m = LoadManifest(manifest_path);
  std::vector<Transcript> transcripts;
  std::map<std::string, std::string> partition_of;
  for (const SubjectRecord &r : m.subjects) {
    if (r.transcript.empty())
      throw DataError("subject " + r.id + " has no transcript path");
    transcripts.push_back(LoadTranscript(r.transcript, r.id));
    std::string key = ToString(r.partition);
    if (r.label != Label::kUnknown) key += "-" + ToString(r.label);
    partition_of[r.id] = key;
  }
  return ComputeCorpusStats(transcripts, partition_of);
}

TrainSummary RunTrain(const PipelineConfig &config) {
  const FeatureConfig fc = config.Features();
  const DatasetManifest manifest = LoadManifest(config.manifest);

  std::vector<SubjectRecord> train = manifest.InPartition(Partition::kTrain);
  std::vector<SubjectRecord> dev = manifest.InPartition(Partition::kDev);
  if (train.empty()) throw DataError("manifest has no training subjects");
  if (dev.empty()) {
    TrainDevSplit split = SplitTrainDev(train, config.dev_fraction, config.seed);
    train = std::move(split.train);
    dev = std::move(split.dev);
  }

  const DesignMatrix train_raw = BuildMatrix(train, manifest.shapes, fc);
  const DesignMatrix dev_raw = BuildMatrix(dev, manifest.shapes, fc);
  const Scaler scaler = FitScaler(train_raw);
  const DesignMatrix train_m = ApplyScaler(scaler, train_raw);
  const DesignMatrix dev_m = ApplyScaler(scaler, dev_raw);

  GridSearchResult gs =
      GridSearchC(train_m, dev_m, config.c_grid, config.Training());
  LinearModel model = std::move(gs.model);
  model.scaler = scaler;

  nlohmann::json model_json = ToJson(model);
  model_json["features"] = FeatureJson(fc);
  model_json["version"] = kVersion;

  nlohmann::json grid = nlohmann::json::array();
  std::string table = fmt::format("system: {}\n{:>10}  {:>8}  {:>9}  {:>6}  "
                                  "{:>8}  {:>6}\n",
                                  SystemToString(fc.system), "C", "Accuracy",
                                  "Precision", "Recall", "F1 Score", "Epochs");
  double best_acc = 0.0;
  for (const GridPoint &p : gs.points) {
    grid.push_back({{"C", p.c},
                    {"epochs", p.epochs},
                    {"converged", p.converged},
                    {"metrics", ToJson(p.dev_metrics)}});
    table += fmt::format("{:>10g}  {:>8.4f}  {:>9.4f}  {:>6.4f}  {:>8.4f}  {:>6}{}\n",
                         p.c, RoundHalfUp(p.dev_metrics.accuracy),
                         RoundHalfUp(p.dev_metrics.macro.precision),
                         RoundHalfUp(p.dev_metrics.macro.recall),
                         RoundHalfUp(p.dev_metrics.macro.f1), p.epochs,
                         p.c == gs.best_c ? "  *" : "");
    if (p.c == gs.best_c) best_acc = p.dev_accuracy;
  }
  table += "precision/recall/F1 are macro averages over AD and non-AD\n";
  const nlohmann::json dev_report = {{"system", SystemToString(fc.system)},
                                     {"best_C", gs.best_c},
                                     {"dev_accuracy", RoundHalfUp(best_acc)},
                                     {"summary_average", "macro"},
                                     {"grid", std::move(grid)}};

  nlohmann::json split = {{"train", nlohmann::json::array()},
                          {"dev", nlohmann::json::array()}};
  for (const SubjectRecord &r : train) split["train"].push_back(r.id);
  for (const SubjectRecord &r : dev) split["dev"].push_back(r.id);

  std::vector<SubjectRecord> used = train;
  used.insert(used.end(), dev.begin(), dev.end());

  StagedOutput out(config.out);
  out.WriteJson("model.json", model_json);
  out.WriteJson("dev_report.json", dev_report);
  out.WriteText("dev_report.txt", table);
  out.WriteJson("split.json", split);
  out.WriteJson("run.json",
                RunRecord("train", config, InputDigests(config.manifest, used)));
  out.Commit();

  TrainSummary summary;
  summary.best_c = gs.best_c;
  summary.dev_accuracy = best_acc;
  summary.train_subjects = train.size();
  summary.dev_subjects = dev.size();
  summary.width = train_m.Width();
  summary.model_path = config.out / "model.json";
  return summary;
}

EvaluateSummary RunEvaluate(const PipelineConfig &config,
                            const fs::path &model_path, Partition partition) {
  Scored s = ScorePartition(config, model_path, partition, true);
  std::vector<Label> truth, pred;
  for (const SubjectPrediction &p : s.predictions) {
    truth.push_back(p.truth);
    pred.push_back(p.predicted);
  }
  EvaluateSummary summary;
  summary.metrics = ComputeMetrics(Confusion(truth, pred));
  summary.predictions = std::move(s.predictions);
  summary.out_dir = config.out / ("eval-" + ToString(partition));

  const std::string system = SystemToString(s.lm.features.system);
  StagedOutput out(summary.out_dir);
  out.WriteJson("report.json", {{"system", system},
                                {"partition", ToString(partition)},
                                {"subjects", summary.predictions.size()},
                                {"metrics", ToJson(summary.metrics)}});
  out.WriteText("report.txt", FormatMetricsTable({{system, summary.metrics}}));
  out.WriteText("predictions.csv", PredictionsCsv(summary.predictions));
  out.WriteJson("run.json", RunRecord("evaluate", config, std::move(s.inputs)));
  out.Commit();
  return summary;
}

std::vector<SubjectPrediction> RunPredict(const PipelineConfig &config,
                                          const fs::path &model_path,
                                          Partition partition) {
  Scored s = ScorePartition(config, model_path, partition, false);
  StagedOutput out(config.out / ("predict-" + ToString(partition)));
  out.WriteText("predictions.csv", PredictionsCsv(s.predictions));
  out.WriteJson("run.json", RunRecord("predict", config, std::move(s.inputs)));
  out.Commit();
  return std::move(s.predictions);
}

}  // namespace adfuse
