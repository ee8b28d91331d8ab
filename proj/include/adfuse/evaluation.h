// include/adfuse/evaluation.h

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

#ifndef ADFUSE_EVALUATION_H_
#define ADFUSE_EVALUATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adfuse/types.h"
#include "json.hpp"

namespace adfuse {

struct SentencePrediction {
  Label label = Label::kAD;
  double score = 0.0;
};

/// Strict majority wins.  A tie goes to the sign of the mean score, with a
/// mean of exactly 0 resolving to AD.  Throws DataError on an empty list.
Label MajorityVote(std::span<const SentencePrediction> predictions);

/// AD is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t Total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix &,
                         const ConfusionMatrix &) = default;
};

/// Throws DataError on length mismatch, empty input or unknown labels.
ConfusionMatrix Confusion(std::span<const Label> truth,
                          std::span<const Label> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the denominator was zero and 0 was reported instead.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct MetricsReport {
  ConfusionMatrix cm;
  double accuracy = 0.0;
  ClassMetrics ad;
  ClassMetrics non_ad;
  // Unweighted mean of the two classes; the single-row summary form.
  ClassMetrics macro;
};

/// Throws DataError when the matrix is empty.
MetricsReport ComputeMetrics(const ConfusionMatrix &cm);

/// Half-up rounding for display, e.g. 0.72725 -> 0.7273 at 4 decimals.
double RoundHalfUp(double x, int decimals = 4);

/// Values are rounded half-up to 4 decimals; raw counts are kept.
nlohmann::json ToJson(const MetricsReport &r);

/// Aligned text table, one block per system with an AD and a non-AD line.
std::string FormatMetricsTable(
    const std::vector<std::pair<std::string, MetricsReport>> &systems);

struct SubjectPrediction {
  std::string subject;
  Label truth = Label::kUnknown;
  Label predicted = Label::kAD;
  double mean_score = 0.0;
  std::size_t n_rows = 0;
};

/// Groups rows by subject (first-seen order), turns each row score into a
/// label with the zero-goes-to-AD rule and majority-votes per subject.
std::vector<SubjectPrediction> VoteBySubject(
    const std::vector<std::string> &subjects, std::span<const Label> truth,
    std::span<const double> scores);

}  // namespace adfuse

#endif  // ADFUSE_EVALUATION_H_
