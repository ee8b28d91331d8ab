// src/features.cc

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

#include "adfuse/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "adfuse/error.h"
#include "fmt/format.h"

namespace adfuse {

namespace fs = std::filesystem;

std::vector<SubjectRecord> DatasetManifest::InPartition(Partition p) const {
  std::vector<SubjectRecord> out;
  for (const SubjectRecord &r : subjects)
    if (r.partition == p) out.push_back(r);
  return out;
}

DatasetManifest ManifestFromJson(const nlohmann::json &j,
                                 const fs::path &base_dir) {
  DatasetManifest m;
  const nlohmann::json *records = &j;
  if (j.is_object()) {
    records = &j.at("subjects");
    if (j.contains("shapes")) {
      const nlohmann::json &s = j.at("shapes");
      m.shapes.n_layers = s.value("n_layers", m.shapes.n_layers);
      m.shapes.text_dim = s.value("text_dim", m.shapes.text_dim);
      m.shapes.xvector_dim = s.value("xvector_dim", m.shapes.xvector_dim);
      m.shapes.ivector_dim = s.value("ivector_dim", m.shapes.ivector_dim);
      if (s.contains("acoustic"))
        m.shapes.acoustic_dims =
            s.at("acoustic").get<std::map<std::string, std::size_t>>();
    }
  }
  if (!records->is_array())
    throw DataError("manifest must hold a list of subject records");

  auto resolve = [&](const std::string &p) -> fs::path {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  std::set<std::string> seen;
  for (const nlohmann::json &jr : *records) {
    SubjectRecord r;
    r.id = jr.at("id").get<std::string>();
    if (r.id.empty()) throw DataError("manifest record with empty id");
    if (!seen.insert(r.id).second)
      throw DataError("subject " + r.id + " appears twice in the manifest");
    r.label = ParseLabel(jr.value("label", std::string("unknown")));
    r.gender = ParseGender(jr.at("gender").get<std::string>());
    r.partition = ParsePartition(jr.at("partition").get<std::string>());
    r.transcript = resolve(jr.value("transcript", std::string()));
    r.bundle = resolve(jr.value("bundle", std::string()));
    if (r.label == Label::kUnknown && r.partition != Partition::kTest)
      throw DataError("subject " + r.id + " in partition " +
                      ToString(r.partition) + " has no label");
    m.subjects.push_back(std::move(r));
  }
  return m;
}

DatasetManifest LoadManifest(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  return ManifestFromJson(j, path.parent_path());
}

nlohmann::json ToJson(const DatasetManifest &m, const fs::path &base_dir) {
  auto rel = [&](const fs::path &p) -> std::string {
    if (p.empty() || base_dir.empty()) return p.generic_string();
    const fs::path r = p.lexically_relative(base_dir);
    if (r.empty() || *r.begin() == "..") return p.generic_string();
    return r.generic_string();
  };
  nlohmann::json subjects = nlohmann::json::array();
  for (const SubjectRecord &r : m.subjects) {
    subjects.push_back({{"id", r.id},
                        {"label", ToString(r.label)},
                        {"gender", ToString(r.gender)},
                        {"partition", ToString(r.partition)},
                        {"transcript", rel(r.transcript)},
                        {"bundle", rel(r.bundle)}});
  }
  nlohmann::json shapes = {{"n_layers", m.shapes.n_layers},
                           {"text_dim", m.shapes.text_dim},
                           {"xvector_dim", m.shapes.xvector_dim},
                           {"ivector_dim", m.shapes.ivector_dim}};
  if (!m.shapes.acoustic_dims.empty())
    shapes["acoustic"] = m.shapes.acoustic_dims;
  return {{"shapes", std::move(shapes)}, {"subjects", std::move(subjects)}};
}

TrainDevSplit SplitTrainDev(const std::vector<SubjectRecord> &records,
                            double dev_fraction, std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw DataError(fmt::format("dev fraction must lie in (0, 1), got {}",
                                dev_fraction));
  for (const SubjectRecord &r : records)
    if (r.label == Label::kUnknown)
      throw DataError("subject " + r.id + " has no label and cannot be split");

  std::mt19937_64 rng(seed);
  std::vector<bool> to_dev(records.size(), false);
  for (Label label : {Label::kAD, Label::kControl}) {
    for (Gender gender : {Gender::kMale, Gender::kFemale}) {
      std::vector<std::size_t> cell;
      for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].label == label && records[i].gender == gender)
          cell.push_back(i);
      if (cell.empty()) continue;
      const long n_dev = std::lround(dev_fraction * cell.size());
      if (n_dev == 0 || n_dev == static_cast<long>(cell.size()))
        throw DataError(fmt::format(
            "cell ({}, {}) of size {} cannot be split with dev fraction {}: "
            "{} would go to dev",
            ToString(label), ToString(gender), cell.size(), dev_fraction,
            n_dev));
      std::shuffle(cell.begin(), cell.end(), rng);
      for (long k = 0; k < n_dev; ++k) to_dev[cell[k]] = true;
    }
  }
  TrainDevSplit split;
  for (std::size_t i = 0; i < records.size(); ++i)
    (to_dev[i] ? split.dev : split.train).push_back(records[i]);
  return split;
}

void DesignMatrix::AddRow(std::span<const double> values, Label label,
                          std::string id, std::string subject) {
  if (labels_.empty() && width_ == 0) width_ = values.size();
  if (values.size() != width_)
    throw DimensionError(fmt::format("row {} has width {}, matrix width is {}",
                                     id, values.size(), width_));
  data_.insert(data_.end(), values.begin(), values.end());
  labels_.push_back(label);
  ids_.push_back(std::move(id));
  subjects_.push_back(std::move(subject));
}

void ExportCsv(const DesignMatrix &m, const fs::path &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "id,subject,label";
  for (std::size_t j = 0; j < m.Width(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < m.NumRows(); ++i) {
    out << m.id(i) << ',' << m.subject(i) << ',' << ToString(m.label(i));
    for (double v : m.Row(i)) out << ',' << fmt::format("{}", v);
    out << '\n';
  }
}

Scaler FitScaler(const DesignMatrix &m) {
  const std::size_t n = m.NumRows();
  if (n < 2)
    throw DataError(fmt::format("scaler needs at least 2 rows, got {}", n));
  Scaler s;
  s.means.resize(m.Width());
  s.stds.resize(m.Width());
  std::vector<double> col(n);
  for (std::size_t j = 0; j < m.Width(); ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = m.Row(i)[j];
    // Sorted summation makes the result independent of row order.
    std::sort(col.begin(), col.end());
    double sum = 0.0;
    for (double v : col) sum += v;
    const double mean = sum / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (col[i] - mean) * (col[i] - mean);
    std::sort(sq.begin(), sq.end());
    double ss = 0.0;
    for (double v : sq) ss += v;
    s.means[j] = mean;
    s.stds[j] = std::sqrt(ss / static_cast<double>(n));
  }
  return s;
}

std::vector<double> ApplyScaler(const Scaler &s, std::span<const double> row) {
  if (row.size() != s.Width())
    throw DimensionError(fmt::format(
        "scaler width {} does not match feature width {}", s.Width(),
        row.size()));
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j)
    out[j] = s.IsConstant(j) ? 0.0 : (row[j] - s.means[j]) / s.stds[j];
  return out;
}

DesignMatrix ApplyScaler(const Scaler &s, const DesignMatrix &m) {
  if (m.Width() != s.Width())
    throw DimensionError(fmt::format(
        "scaler width {} does not match matrix width {}", s.Width(),
        m.Width()));
  DesignMatrix out(m.Width());
  for (std::size_t i = 0; i < m.NumRows(); ++i)
    out.AddRow(ApplyScaler(s, m.Row(i)), m.label(i), m.id(i), m.subject(i));
  return out;
}

nlohmann::json ToJson(const Scaler &s) {
  return {{"means", s.means}, {"stds", s.stds}, {"epsilon", s.epsilon}};
}

Scaler ScalerFromJson(const nlohmann::json &j) {
  Scaler s;
  s.means = j.at("means").get<std::vector<double>>();
  s.stds = j.at("stds").get<std::vector<double>>();
  s.epsilon = j.value("epsilon", Scaler::kDefaultEpsilon);
  if (s.means.size() != s.stds.size())
    throw DataError("scaler means and stds differ in length");
  for (double v : s.stds)
    if (!(v >= 0.0)) throw DataError("scaler has a negative std");
  return s;
}

std::vector<double> EarlyFuse(const std::string &instance,
                              const std::vector<FusionPart> &parts) {
  std::vector<double> out;
  for (const FusionPart &p : parts) {
    if (!p.values)
      throw DataError("instance " + instance + ": missing part " + p.name);
    out.insert(out.end(), p.values->begin(), p.values->end());
  }
  return out;
}

std::string SystemPart::ToString() const {
  switch (kind) {
    case Kind::kLinguisticSentence: return "linguistic-sentence";
    case Kind::kLinguisticDocument: return "linguistic-document";
    case Kind::kAcoustic: return "acoustic:" + tag;
  }
  return {};
}

std::vector<SystemPart> ParseSystem(const std::string &spec) {
  std::string s = spec;
  if (s.rfind("fusion:", 0) == 0) s = s.substr(7);
  std::vector<SystemPart> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find_first_of("+,", pos);
    if (end == std::string::npos) end = s.size();
    const std::string item = s.substr(pos, end - pos);
    SystemPart p;
    if (item == "linguistic-sentence") {
      p.kind = SystemPart::Kind::kLinguisticSentence;
    } else if (item == "linguistic-document") {
      p.kind = SystemPart::Kind::kLinguisticDocument;
    } else if (item.rfind("acoustic:", 0) == 0 && item.size() > 9) {
      p.kind = SystemPart::Kind::kAcoustic;
      p.tag = item.substr(9);
    } else {
      throw DataError("unknown system component '" + item + "' in '" + spec +
                      "'");
    }
    if (std::find(parts.begin(), parts.end(), p) != parts.end())
      throw DataError("system component " + item + " listed twice");
    parts.push_back(std::move(p));
    pos = end + 1;
  }
  const auto n_sentence = std::count_if(parts.begin(), parts.end(), [](auto &p) {
    return p.kind == SystemPart::Kind::kLinguisticSentence;
  });
  if (n_sentence > 0 && std::any_of(parts.begin(), parts.end(), [](auto &p) {
        return p.kind == SystemPart::Kind::kLinguisticDocument;
      }))
    throw DataError("a system cannot mix linguistic-sentence and "
                    "linguistic-document");
  return parts;
}

std::string SystemToString(const std::vector<SystemPart> &parts) {
  std::string out;
  for (const SystemPart &p : parts) {
    if (!out.empty()) out += '+';
    out += p.ToString();
  }
  return out;
}

bool FeatureConfig::PerSentence() const {
  return std::any_of(system.begin(), system.end(), [](const SystemPart &p) {
    return p.kind == SystemPart::Kind::kLinguisticSentence;
  });
}

std::vector<FeatureRow> SubjectFeatureRows(const std::string &subject_id,
                                           const EmbeddingBundle &bundle,
                                           const FeatureConfig &config) {
  if (config.system.empty()) throw DataError("empty system selection");
  std::optional<DescriptionFeatures> text;
  auto need_text = [&]() -> const DescriptionFeatures * {
    if (!bundle.tensor) return nullptr;
    if (!text)
      text = ComputeDescriptionFeatures(*bundle.tensor, config.layers,
                                        config.pooling);
    return text->per_sentence.empty() ? nullptr : &*text;
  };

  // Description-level parts, in declared order; the sentence part is a
  // placeholder filled per row.
  std::vector<FusionPart> parts;
  std::size_t sentence_slot = config.system.size();
  for (std::size_t k = 0; k < config.system.size(); ++k) {
    const SystemPart &sp = config.system[k];
    FusionPart fp{sp.ToString(), std::nullopt};
    switch (sp.kind) {
      case SystemPart::Kind::kLinguisticSentence:
        sentence_slot = k;
        if (need_text()) fp.values = std::vector<double>{};
        break;
      case SystemPart::Kind::kLinguisticDocument:
        if (const DescriptionFeatures *f = need_text()) fp.values = f->document;
        break;
      case SystemPart::Kind::kAcoustic:
        if (auto it = bundle.acoustic.find(sp.tag); it != bundle.acoustic.end())
          fp.values = std::vector<double>(it->second.begin(), it->second.end());
        break;
    }
    parts.push_back(std::move(fp));
  }

  std::vector<FeatureRow> rows;
  if (sentence_slot == config.system.size()) {
    rows.push_back({subject_id, EarlyFuse(subject_id, parts)});
    return rows;
  }
  // Missing parts are reported before iterating sentences.
  EarlyFuse(subject_id, parts);
  const DescriptionFeatures &f = *text;
  for (std::size_t s = 0; s < f.per_sentence.size(); ++s) {
    parts[sentence_slot].values = f.per_sentence[s];
    const std::string id = subject_id + ":" + std::to_string(s);
    rows.push_back({id, EarlyFuse(id, parts)});
  }
  return rows;
}

}  // namespace adfuse
