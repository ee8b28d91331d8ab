// include/adfuse/features.h

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

#ifndef ADFUSE_FEATURES_H_
#define ADFUSE_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adfuse/embedding_io.h"
#include "adfuse/linguistic_features.h"
#include "adfuse/types.h"
#include "json.hpp"

namespace adfuse {

struct SubjectRecord {
  std::string id;
  Label label = Label::kUnknown;
  Gender gender = Gender::kFemale;
  Partition partition = Partition::kTrain;
  std::filesystem::path transcript;  // .cha or normalized .json
  std::filesystem::path bundle;      // .emb
};

struct DatasetManifest {
  std::vector<SubjectRecord> subjects;
  // Shapes the bundles are validated against (subject_id left empty).
  BundleExpectations shapes;

  std::vector<SubjectRecord> InPartition(Partition p) const;
};

/// Accepts either a bare array of records or {"subjects": [...],
/// "shapes": {...}}.  Relative paths are resolved against `base_dir`.
/// Throws DataError on duplicate ids or unlabeled train/dev records.
DatasetManifest ManifestFromJson(const nlohmann::json &j,
                                 const std::filesystem::path &base_dir = {});
DatasetManifest LoadManifest(const std::filesystem::path &path);
/// Paths are written relative to `base_dir` when they live below it.
nlohmann::json ToJson(const DatasetManifest &m,
                      const std::filesystem::path &base_dir = {});

struct TrainDevSplit {
  std::vector<SubjectRecord> train;
  std::vector<SubjectRecord> dev;
};

/// Stratified hold-out: inside every (label, gender) cell,
/// round(dev_fraction * cell size) records go to dev, drawn without
/// replacement by a generator seeded with `seed`.  Both sides keep the
/// input order.  Throws DataError when a cell would end up with an empty
/// dev or train side.
TrainDevSplit SplitTrainDev(const std::vector<SubjectRecord> &records,
                            double dev_fraction, std::uint64_t seed);

/// Row-major feature rows with one label, instance id and subject (group)
/// per row.  Description-level rows have id == subject; sentence rows use
/// "subject:k".
class DesignMatrix {
 public:
  explicit DesignMatrix(std::size_t width = 0) : width_(width) {}

  void AddRow(std::span<const double> values, Label label, std::string id,
              std::string subject);

  std::size_t NumRows() const { return labels_.size(); }
  std::size_t Width() const { return width_; }
  std::span<const double> Row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * width_, width_);
  }
  std::span<double> MutableRow(std::size_t i) {
    return std::span<double>(data_).subspan(i * width_, width_);
  }
  Label label(std::size_t i) const { return labels_[i]; }
  void set_label(std::size_t i, Label l) { labels_[i] = l; }
  const std::string &id(std::size_t i) const { return ids_[i]; }
  const std::string &subject(std::size_t i) const { return subjects_[i]; }
  const std::vector<Label> &labels() const { return labels_; }

 private:
  std::size_t width_;
  std::vector<double> data_;
  std::vector<Label> labels_;
  std::vector<std::string> ids_;
  std::vector<std::string> subjects_;
};

/// Writes "id,subject,label,f0,...,f{n-1}" followed by one line per row.
void ExportCsv(const DesignMatrix &m, const std::filesystem::path &path);

/// Per-column z-scoring fitted on training rows only.
struct Scaler {
  static constexpr double kDefaultEpsilon = 1e-12;

  std::vector<double> means;
  std::vector<double> stds;  // population (divide-by-N)
  double epsilon = kDefaultEpsilon;

  bool IsConstant(std::size_t col) const { return stds[col] < epsilon; }
  std::size_t Width() const { return means.size(); }
};

/// Throws DataError when fewer than two rows are given.
Scaler FitScaler(const DesignMatrix &m);
/// Constant columns map to 0.  Throws DimensionError on width mismatch.
DesignMatrix ApplyScaler(const Scaler &s, const DesignMatrix &m);
std::vector<double> ApplyScaler(const Scaler &s, std::span<const double> row);

nlohmann::json ToJson(const Scaler &s);
Scaler ScalerFromJson(const nlohmann::json &j);

struct FusionPart {
  std::string name;
  std::optional<std::vector<double>> values;
};

/// Concatenates parts in the given order.  Throws DataError naming the
/// instance and the first missing part.
std::vector<double> EarlyFuse(const std::string &instance,
                              const std::vector<FusionPart> &parts);

/// One component of a system selection.
struct SystemPart {
  enum class Kind { kLinguisticSentence, kLinguisticDocument, kAcoustic };
  Kind kind = Kind::kLinguisticDocument;
  std::string tag;  // acoustic tag for kAcoustic

  std::string ToString() const;
  friend bool operator==(const SystemPart &, const SystemPart &) = default;
};

/// Parses "linguistic-sentence", "linguistic-document", "acoustic:TAG", or a
/// '+'-joined fusion of those such as
/// "linguistic-document+acoustic:xvec_sre".  An optional "fusion:" prefix is
/// accepted.
std::vector<SystemPart> ParseSystem(const std::string &s);
std::string SystemToString(const std::vector<SystemPart> &parts);

struct FeatureConfig {
  std::vector<SystemPart> system;
  LayerRange layers;
  Pooling pooling = Pooling::kMean;

  /// True when rows are per sentence (majority vote needed per subject).
  bool PerSentence() const;
};

struct FeatureRow {
  std::string id;
  std::vector<double> values;
};

/// Feature rows for one subject.  A system with a linguistic-sentence part
/// yields one row per sentence, with every description-level part repeated
/// on each row; otherwise a single row.
std::vector<FeatureRow> SubjectFeatureRows(const std::string &subject_id,
                                           const EmbeddingBundle &bundle,
                                           const FeatureConfig &config);

}  // namespace adfuse

#endif  // ADFUSE_FEATURES_H_
