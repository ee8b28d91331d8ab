// include/adfuse/pipeline.h

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

#ifndef ADFUSE_PIPELINE_H_
#define ADFUSE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "adfuse/chat_normalizer.h"
#include "adfuse/evaluation.h"
#include "adfuse/features.h"
#include "adfuse/svm.h"
#include "json.hpp"

namespace adfuse {

inline constexpr const char *kVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path manifest;
  std::string system = "linguistic-document+acoustic:xvec_sre";
  Pooling pooling = Pooling::kMean;
  LayerRange layers;
  double dev_fraction = 0.2;
  std::uint64_t seed = 0;
  std::vector<double> c_grid = DefaultCGrid();
  double tolerance = 1e-4;
  int max_epochs = 1000;
  double bias_scale = 1.0;
  std::filesystem::path out = "out";

  /// Missing keys keep their defaults; relative paths resolve against root.
  static PipelineConfig FromJson(const nlohmann::json &j,
                                 const std::filesystem::path &root = {});
  nlohmann::json ToJson() const;
  FeatureConfig Features() const;
  TrainConfig Training() const;
};

/// Writes files into a hidden staging directory below `dir` and moves them
/// into place on Commit().  Uncommitted staging is removed on destruction.
class StagedOutput {
 public:
  explicit StagedOutput(std::filesystem::path dir);
  ~StagedOutput();
  StagedOutput(const StagedOutput &) = delete;
  StagedOutput &operator=(const StagedOutput &) = delete;

  std::filesystem::path Path(const std::string &name) const;
  void WriteText(const std::string &name, const std::string &text) const;
  void WriteJson(const std::string &name, const nlohmann::json &j) const;
  void Commit();

 private:
  std::filesystem::path dir_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

/// Hex SHA-256 of a file's bytes.
std::string FileDigest(const std::filesystem::path &path);

/// Loads a transcript from .json (normalized) or any other extension (CHAT).
Transcript LoadTranscript(const std::filesystem::path &path,
                          const std::string &subject_id);

struct NormalizeSummary {
  std::size_t files = 0;
  std::size_t unknown_codes = 0;
  // Files with at least one unknown annotation code, and their counts.
  std::vector<std::pair<std::string, std::size_t>> unknown_by_file;
  CorpusStats stats;
};

/// Normalizes every *.cha file of `input_dir` into <stem>.json and writes
/// stats.json (all subjects under partition "all").  Throws on an empty
/// directory or any parse error; nothing is promoted in that case.
NormalizeSummary RunNormalize(const std::filesystem::path &input_dir,
                              const std::filesystem::path &output_dir);

/// Corpus statistics of a manifest; partition keys are "train-AD",
/// "train-control", "dev-...", or "test" for unlabeled test subjects.
CorpusStats RunStats(const std::filesystem::path &manifest_path);

struct TrainSummary {
  double best_c = 0.0;
  double dev_accuracy = 0.0;
  std::size_t train_subjects = 0;
  std::size_t dev_subjects = 0;
  std::size_t width = 0;
  std::filesystem::path model_path;
};

/// Builds features for the train partition, holds out a stratified dev set
/// (or uses the manifest's dev partition when present), scales, grid-searches
/// C and writes model.json, dev_report.{json,txt}, split.json and run.json
/// into config.out.
TrainSummary RunTrain(const PipelineConfig &config);

struct EvaluateSummary {
  MetricsReport metrics;
  std::vector<SubjectPrediction> predictions;
  std::filesystem::path out_dir;
};

/// Scores one partition with a trained model and writes report.{json,txt},
/// predictions.csv and run.json into config.out/eval-<partition>.  Feature
/// settings come from the model file.
EvaluateSummary RunEvaluate(const PipelineConfig &config,
                            const std::filesystem::path &model_path,
                            Partition partition);

/// Like RunEvaluate but labels are not needed; writes predictions.csv and
/// run.json into config.out/predict-<partition>.
std::vector<SubjectPrediction> RunPredict(
    const PipelineConfig &config, const std::filesystem::path &model_path,
    Partition partition);

}  // namespace adfuse

#endif  // ADFUSE_PIPELINE_H_
