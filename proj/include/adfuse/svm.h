// include/adfuse/svm.h

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

#ifndef ADFUSE_SVM_H_
#define ADFUSE_SVM_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "adfuse/evaluation.h"
#include "adfuse/features.h"
#include "json.hpp"

namespace adfuse {

struct TrainConfig {
  double c = 1.0;
  double tolerance = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 0;
  // Value of the constant feature appended to every row to realize the bias.
  double bias_scale = 1.0;

  void Validate() const;
};

/// Decade grid 1e-4 .. 1e2.
std::vector<double> DefaultCGrid();

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  double tolerance = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 0;
  double bias_scale = 1.0;
  int epochs = 0;
  bool converged = false;
  double dual_objective = 0.0;
  // Present when the model expects z-scored inputs.
  std::optional<Scaler> scaler;

  std::size_t Width() const { return weights.size(); }
};

/// Optional instrumentation filled by Train.
struct TrainDiagnostics {
  // Dual objective after each epoch.
  std::vector<double> dual_objective;
  std::vector<double> alpha;
  // Largest projected-gradient magnitude seen in each epoch.
  std::vector<double> max_violation;
  // Set if any alpha ever left [0, C] after an update.
  bool box_violated = false;
};

/// L2-regularized hinge-loss SVM trained on the dual
///   max  sum(a) - 1/2 |sum a_i y_i x_i|^2   s.t. 0 <= a_i <= C
/// by coordinate descent.  Rows are augmented with `bias_scale` to carry the
/// bias.  Each epoch visits coordinates in a fresh permutation drawn from the
/// seeded generator.  Training stops once an epoch's largest projected
/// gradient and a check pass at the final w both fall below `tolerance`, so
/// on convergence every KKT residual is bounded by the tolerance itself.
/// Throws DataError on single-class input, unknown labels or non-finite
/// features.
LinearModel Train(const DesignMatrix &m, const TrainConfig &config,
                  TrainDiagnostics *diagnostics = nullptr);

/// w.x + bias on already scaled features.  Throws DimensionError.
double Decision(const LinearModel &model, std::span<const double> x);

/// Sign of the decision value; exactly 0 goes to AD.
Label Predict(const LinearModel &model, std::span<const double> x);

struct GridPoint {
  double c = 0.0;
  double dev_accuracy = 0.0;
  MetricsReport dev_metrics;
  int epochs = 0;
  bool converged = false;
};

struct GridSearchResult {
  double best_c = 0.0;
  LinearModel model;
  std::vector<GridPoint> points;  // ascending C
};

/// Trains one model per C (in parallel), scores subject-level accuracy on the
/// dev matrix (majority vote when rows are per sentence) and keeps the best.
/// Ties go to the smallest C.  Training errors are rethrown with the C.
GridSearchResult GridSearchC(const DesignMatrix &train, const DesignMatrix &dev,
                             std::vector<double> grid,
                             const TrainConfig &config_template);

nlohmann::json ToJson(const LinearModel &m);
LinearModel ModelFromJson(const nlohmann::json &j);

}  // namespace adfuse

#endif  // ADFUSE_SVM_H_
