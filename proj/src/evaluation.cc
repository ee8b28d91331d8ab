// src/evaluation.cc

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

#include "adfuse/evaluation.h"

#include <cmath>
#include <map>

#include "adfuse/error.h"
#include "fmt/format.h"

namespace adfuse {

Label MajorityVote(std::span<const SentencePrediction> predictions) {
  if (predictions.empty())
    throw DataError("majority vote over an empty prediction list");
  std::size_t ad = 0;
  double score_sum = 0.0;
  for (const SentencePrediction &p : predictions) {
    if (p.label == Label::kAD) ++ad;
    score_sum += p.score;
  }
  const std::size_t control = predictions.size() - ad;
  if (ad != control) return ad > control ? Label::kAD : Label::kControl;
  return score_sum >= 0.0 ? Label::kAD : Label::kControl;
}

ConfusionMatrix Confusion(std::span<const Label> truth,
                          std::span<const Label> predicted) {
  if (truth.size() != predicted.size())
    throw DataError(fmt::format("{} truth labels vs {} predictions",
                                truth.size(), predicted.size()));
  if (truth.empty()) throw DataError("confusion matrix over zero instances");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::kUnknown || predicted[i] == Label::kUnknown)
      throw DataError(fmt::format("instance {} has an unknown label", i));
    const bool t = truth[i] == Label::kAD;
    const bool p = predicted[i] == Label::kAD;
    if (t && p) ++cm.tp;
    else if (!t && p) ++cm.fp;
    else if (t && !p) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

ClassMetrics ForClass(std::size_t hit, std::size_t false_pos,
                      std::size_t miss) {
  ClassMetrics m;
  if (hit + false_pos == 0) m.precision_undefined = true;
  else m.precision = static_cast<double>(hit) / (hit + false_pos);
  if (hit + miss == 0) m.recall_undefined = true;
  else m.recall = static_cast<double>(hit) / (hit + miss);
  if (m.precision + m.recall == 0.0) m.f1_undefined = true;
  else m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

nlohmann::json ClassJson(const ClassMetrics &m) {
  nlohmann::json j = {{"precision", RoundHalfUp(m.precision)},
                      {"recall", RoundHalfUp(m.recall)},
                      {"f1", RoundHalfUp(m.f1)}};
  nlohmann::json undefined = nlohmann::json::array();
  if (m.precision_undefined) undefined.push_back("precision");
  if (m.recall_undefined) undefined.push_back("recall");
  if (m.f1_undefined) undefined.push_back("f1");
  if (!undefined.empty()) j["undefined"] = std::move(undefined);
  return j;
}

}  // namespace

MetricsReport ComputeMetrics(const ConfusionMatrix &cm) {
  if (cm.Total() == 0) throw DataError("metrics of an empty confusion matrix");
  MetricsReport r;
  r.cm = cm;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / cm.Total();
  r.ad = ForClass(cm.tp, cm.fp, cm.fn);
  r.non_ad = ForClass(cm.tn, cm.fn, cm.fp);
  r.macro.precision = 0.5 * (r.ad.precision + r.non_ad.precision);
  r.macro.recall = 0.5 * (r.ad.recall + r.non_ad.recall);
  r.macro.f1 = 0.5 * (r.ad.f1 + r.non_ad.f1);
  r.macro.precision_undefined =
      r.ad.precision_undefined || r.non_ad.precision_undefined;
  r.macro.recall_undefined = r.ad.recall_undefined || r.non_ad.recall_undefined;
  r.macro.f1_undefined = r.ad.f1_undefined || r.non_ad.f1_undefined;
  return r;
}

double RoundHalfUp(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The nudge absorbs binary representation error at exact ties
  // (0.72725 is stored as 0.727249999...).
  return std::floor(x * scale + 0.5 + 1e-9) / scale;
}

nlohmann::json ToJson(const MetricsReport &r) {
  return {{"confusion",
           {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"fn", r.cm.fn}, {"tn", r.cm.tn}}},
          {"accuracy", RoundHalfUp(r.accuracy)},
          {"AD", ClassJson(r.ad)},
          {"non-AD", ClassJson(r.non_ad)},
          {"macro", ClassJson(r.macro)},
          {"summary_average", "macro"}};
}

std::string FormatMetricsTable(
    const std::vector<std::pair<std::string, MetricsReport>> &systems) {
  std::size_t name_w = 6;
  for (const auto &[name, r] : systems) name_w = std::max(name_w, name.size());
  std::string out = fmt::format("{:<{}}  {:<6}  {:>8}  {:>9}  {:>6}  {:>8}\n",
                                "System", name_w, "Class", "Accuracy",
                                "Precision", "Recall", "F1 Score");
  out += std::string(name_w + 50, '-') + "\n";
  for (const auto &[name, r] : systems) {
    out += fmt::format("{:<{}}  {:<6}  {:>8.4f}  {:>9.4f}  {:>6.4f}  {:>8.4f}\n",
                       name, name_w, "AD", RoundHalfUp(r.accuracy),
                       RoundHalfUp(r.ad.precision), RoundHalfUp(r.ad.recall),
                       RoundHalfUp(r.ad.f1));
    out += fmt::format("{:<{}}  {:<6}  {:>8}  {:>9.4f}  {:>6.4f}  {:>8.4f}\n",
                       "", name_w, "non-AD", "", RoundHalfUp(r.non_ad.precision),
                       RoundHalfUp(r.non_ad.recall), RoundHalfUp(r.non_ad.f1));
  }
  return out;
}

std::vector<SubjectPrediction> VoteBySubject(
    const std::vector<std::string> &subjects, std::span<const Label> truth,
    std::span<const double> scores) {
  if (subjects.size() != truth.size() || subjects.size() != scores.size())
    throw DataError("subjects, labels and scores differ in length");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    auto [it, inserted] = rows.try_emplace(subjects[i]);
    if (inserted) order.push_back(subjects[i]);
    it->second.push_back(i);
  }
  std::vector<SubjectPrediction> out;
  out.reserve(order.size());
  for (const std::string &s : order) {
    const std::vector<std::size_t> &idx = rows[s];
    std::vector<SentencePrediction> votes;
    SubjectPrediction p;
    p.subject = s;
    p.truth = truth[idx.front()];
    p.n_rows = idx.size();
    for (std::size_t i : idx) {
      if (truth[i] != p.truth)
        throw DataError("subject " + s + " has rows with different labels");
      votes.push_back({scores[i] >= 0.0 ? Label::kAD : Label::kControl,
                       scores[i]});
      p.mean_score += scores[i];
    }
    p.mean_score /= static_cast<double>(idx.size());
    p.predicted = MajorityVote(votes);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace adfuse
