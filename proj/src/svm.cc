// src/svm.cc

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

#include "adfuse/svm.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "adfuse/error.h"
#include "fmt/format.h"

namespace adfuse {

void TrainConfig::Validate() const {
  if (!(c > 0.0) || !std::isfinite(c))
    throw DataError(fmt::format("C must be positive, got {}", c));
  if (!(tolerance > 0.0))
    throw DataError(fmt::format("tolerance must be positive, got {}",
                                tolerance));
  if (max_epochs < 1)
    throw DataError(fmt::format("max_epochs must be >= 1, got {}", max_epochs));
  if (!std::isfinite(bias_scale))
    throw DataError("bias_scale must be finite");
}

std::vector<double> DefaultCGrid() {
  return {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
}

namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Projected gradient of coordinate i for the box [0, c].
double Projected(double g, double alpha, double c) {
  if (alpha <= 0.0) return std::min(g, 0.0);
  if (alpha >= c) return std::max(g, 0.0);
  return g;
}

}  // namespace

LinearModel Train(const DesignMatrix &m, const TrainConfig &config,
                  TrainDiagnostics *diagnostics) {
  config.Validate();
  const std::size_t n = m.NumRows();
  const std::size_t d = m.Width();
  if (n == 0) throw DataError("cannot train on an empty matrix");

  std::vector<double> y(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Label l = m.label(i);
    if (l == Label::kUnknown)
      throw DataError("training row " + m.id(i) + " has no label");
    y[i] = ToSign(l);
    (l == Label::kAD ? has_pos : has_neg) = true;
    for (double v : m.Row(i))
      if (!std::isfinite(v))
        throw DataError("training row " + m.id(i) + " has a non-finite value");
  }
  if (!has_pos || !has_neg)
    throw DataError("training data contains a single class");

  const double c = config.c;
  const double bs = config.bias_scale;
  std::vector<double> w(d, 0.0);
  double w_bias = 0.0;  // weight of the augmented coordinate
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = m.Row(i);
    qd[i] = Dot(x, x) + bs * bs;
  }

  auto gradient = [&](std::size_t i) {
    return y[i] * (Dot(w, m.Row(i)) + w_bias * bs) - 1.0;
  };
  // D(alpha) rebuilt from alpha in extended precision, so the per-epoch
  // trace is not polluted by rounding drift in the running w.
  auto dual = [&]() {
    long double sum_alpha = 0.0L, wb = 0.0L;
    std::vector<long double> v(d, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0.0) continue;
      sum_alpha += alpha[i];
      const long double ay = static_cast<long double>(alpha[i]) * y[i];
      const auto x = m.Row(i);
      for (std::size_t k = 0; k < d; ++k) v[k] += ay * x[k];
      wb += ay * bs;
    }
    long double norm2 = wb * wb;
    for (long double e : v) norm2 += e * e;
    return static_cast<double>(sum_alpha - 0.5L * norm2);
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);

  LinearModel model;
  bool converged = false;
  int epoch = 0;
  while (epoch < config.max_epochs) {
    ++epoch;
    std::shuffle(order.begin(), order.end(), rng);
    double max_pg = 0.0;
    for (std::size_t i : order) {
      const double g = gradient(i);
      const double pg = Projected(g, alpha[i], c);
      max_pg = std::max(max_pg, std::fabs(pg));
      if (std::fabs(pg) <= 1e-12) continue;
      const double old = alpha[i];
      // qd > 0 unless the row is all zeros and bias_scale is 0; then the
      // objective is linear in alpha_i and the optimum sits on a bound.
      alpha[i] = qd[i] > 0.0 ? std::clamp(old - g / qd[i], 0.0, c)
                             : (g < 0.0 ? c : 0.0);
      if (diagnostics && (alpha[i] < 0.0 || alpha[i] > c))
        diagnostics->box_violated = true;
      const double step = (alpha[i] - old) * y[i];
      if (step != 0.0) {
        const auto x = m.Row(i);
        for (std::size_t k = 0; k < d; ++k) w[k] += step * x[k];
        w_bias += step * bs;
      }
    }
    if (diagnostics) {
      diagnostics->dual_objective.push_back(dual());
      diagnostics->max_violation.push_back(max_pg);
    }
    if (max_pg < config.tolerance) {
      double check = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        check = std::max(check, std::fabs(Projected(gradient(i), alpha[i], c)));
      if (check < config.tolerance) {
        converged = true;
        break;
      }
    }
  }

  model.weights = std::move(w);
  model.bias = w_bias * bs;
  model.c = c;
  model.tolerance = config.tolerance;
  model.max_epochs = config.max_epochs;
  model.seed = config.seed;
  model.bias_scale = bs;
  model.epochs = epoch;
  model.converged = converged;
  {
    double sum_alpha = 0.0;
    for (double a : alpha) sum_alpha += a;
    model.dual_objective =
        sum_alpha - 0.5 * (Dot(model.weights, model.weights) + w_bias * w_bias);
  }
  if (diagnostics) diagnostics->alpha = std::move(alpha);
  return model;
}

double Decision(const LinearModel &model, std::span<const double> x) {
  if (x.size() != model.Width())
    throw DimensionError(fmt::format(
        "model expects {} features, got {}", model.Width(), x.size()));
  return Dot(model.weights, x) + model.bias;
}

Label Predict(const LinearModel &model, std::span<const double> x) {
  return Decision(model, x) >= 0.0 ? Label::kAD : Label::kControl;
}

GridSearchResult GridSearchC(const DesignMatrix &train, const DesignMatrix &dev,
                             std::vector<double> grid,
                             const TrainConfig &config_template) {
  if (grid.empty()) throw DataError("C grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (dev.NumRows() == 0) throw DataError("dev matrix is empty");
  if (dev.Width() != train.Width())
    throw DimensionError(fmt::format("train width {} vs dev width {}",
                                     train.Width(), dev.Width()));

  std::vector<std::future<LinearModel>> jobs;
  jobs.reserve(grid.size());
  for (double c : grid) {
    TrainConfig cfg = config_template;
    cfg.c = c;
    jobs.push_back(std::async(std::launch::async,
                              [&train, cfg] { return Train(train, cfg); }));
  }

  std::vector<std::string> subjects(dev.NumRows());
  for (std::size_t i = 0; i < dev.NumRows(); ++i) subjects[i] = dev.subject(i);

  GridSearchResult result;
  std::optional<LinearModel> best;
  double best_acc = -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    LinearModel model;
    try {
      model = jobs[k].get();
    } catch (const Error &e) {
      // Drain the remaining futures before propagating.
      for (std::size_t r = k + 1; r < jobs.size(); ++r) {
        try {
          jobs[r].get();
        } catch (const Error &) {
        }
      }
      throw DataError(fmt::format("training with C={} failed: {}", grid[k],
                                  e.what()));
    }
    std::vector<double> scores(dev.NumRows());
    for (std::size_t i = 0; i < dev.NumRows(); ++i)
      scores[i] = Decision(model, dev.Row(i));
    const auto votes = VoteBySubject(subjects, dev.labels(), scores);
    std::vector<Label> truth, pred;
    for (const SubjectPrediction &p : votes) {
      truth.push_back(p.truth);
      pred.push_back(p.predicted);
    }
    GridPoint point;
    point.c = grid[k];
    point.dev_metrics = ComputeMetrics(Confusion(truth, pred));
    point.dev_accuracy = point.dev_metrics.accuracy;
    point.epochs = model.epochs;
    point.converged = model.converged;
    result.points.push_back(point);
    // Strict improvement keeps the smallest C among ties.
    if (point.dev_accuracy > best_acc) {
      best_acc = point.dev_accuracy;
      best = std::move(model);
      result.best_c = grid[k];
    }
  }
  result.model = std::move(*best);
  return result;
}

nlohmann::json ToJson(const LinearModel &m) {
  nlohmann::json j = {{"weights", m.weights},
                      {"bias", m.bias},
                      {"C", m.c},
                      {"tolerance", m.tolerance},
                      {"max_epochs", m.max_epochs},
                      {"epochs", m.epochs},
                      {"seed", m.seed},
                      {"bias_scale", m.bias_scale},
                      {"converged", m.converged},
                      {"dual_objective", m.dual_objective}};
  if (m.scaler) j["scaler"] = ToJson(*m.scaler);
  return j;
}

LinearModel ModelFromJson(const nlohmann::json &j) {
  LinearModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.c = j.at("C").get<double>();
  m.tolerance = j.value("tolerance", m.tolerance);
  m.max_epochs = j.value("max_epochs", m.max_epochs);
  m.epochs = j.value("epochs", 0);
  m.seed = j.value("seed", std::uint64_t{0});
  m.bias_scale = j.value("bias_scale", 1.0);
  m.converged = j.value("converged", false);
  m.dual_objective = j.value("dual_objective", 0.0);
  if (j.contains("scaler")) {
    m.scaler = ScalerFromJson(j.at("scaler"));
    if (m.scaler->Width() != m.weights.size())
      throw DataError(fmt::format("model has {} weights but scaler width {}",
                                  m.weights.size(), m.scaler->Width()));
  }
  for (double v : m.weights)
    if (!std::isfinite(v)) throw DataError("model has a non-finite weight");
  return m;
}

}  // namespace adfuse
