// tools/adfuse.cc

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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "adfuse/error.h"
#include "adfuse/fixtures.h"
#include "adfuse/pipeline.h"
#include "fmt/format.h"

namespace fs = std::filesystem;

namespace {

// Flags that override the JSON config file.
struct ConfigFlags {
  std::string config_file;
  std::optional<std::string> manifest, system, pooling, layers, c_grid, out;
  std::optional<double> dev_fraction, tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_epochs;

  void Register(CLI::App *app) {
    app->add_option("--config", config_file, "JSON pipeline configuration");
    app->add_option("--manifest", manifest, "dataset manifest JSON");
    app->add_option("--system", system,
                    "linguistic-sentence | linguistic-document | acoustic:TAG, "
                    "'+'-joined for fusion");
    app->add_option("--pooling", pooling, "document pooling: mean | max");
    app->add_option("--layers", layers, "hidden-layer range A..B");
    app->add_option("--dev-fraction", dev_fraction, "held-out dev fraction");
    app->add_option("--seed", seed, "split and solver seed");
    app->add_option("--c-grid", c_grid, "comma-separated C values");
    app->add_option("--tolerance", tolerance, "solver stopping tolerance");
    app->add_option("--max-epochs", max_epochs, "solver epoch cap");
    app->add_option("--out", out, "output directory");
  }

  adfuse::PipelineConfig Build(const fs::path &root) const {
    nlohmann::json j = nlohmann::json::object();
    if (!config_file.empty()) {
      const fs::path p = root.empty() ? fs::path(config_file)
                                      : root / config_file;
      std::ifstream in(p);
      if (!in) throw adfuse::Error("cannot open config " + p.string());
      j = nlohmann::json::parse(in);
    }
    if (manifest) j["manifest"] = *manifest;
    if (system) j["system"] = *system;
    if (pooling) j["pooling"] = *pooling;
    if (layers) j["layers"] = *layers;
    if (dev_fraction) j["dev_fraction"] = *dev_fraction;
    if (seed) j["seed"] = *seed;
    if (tolerance) j["tolerance"] = *tolerance;
    if (max_epochs) j["max_epochs"] = *max_epochs;
    if (out) j["out"] = *out;
    if (c_grid) {
      std::vector<double> grid;
      std::stringstream ss(*c_grid);
      std::string item;
      while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
      j["c_grid"] = grid;
    }
    adfuse::PipelineConfig c = adfuse::PipelineConfig::FromJson(j, root);
    if (c.manifest.empty()) throw adfuse::Error("--manifest is required");
    if (!fs::exists(c.manifest))
      throw adfuse::Error("manifest " + c.manifest.string() + " does not exist");
    return c;
  }
};

fs::path Under(const fs::path &root, const std::string &p) {
  return root.empty() || fs::path(p).is_absolute() ? fs::path(p) : root / p;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Speech and language embedding classification pipeline"};
  app.require_subcommand(1);
  std::string root;
  app.add_option("--root", root, "base directory for relative paths");

  auto *normalize = app.add_subcommand("normalize", "normalize CHAT transcripts");
  std::string norm_in, norm_out;
  normalize->add_option("--input", norm_in, "directory of .cha files")->required();
  normalize->add_option("--output", norm_out, "output directory")->required();

  auto *stats = app.add_subcommand("stats", "corpus word statistics");
  std::string stats_manifest, stats_out;
  stats->add_option("--manifest", stats_manifest, "dataset manifest")->required();
  stats->add_option("--out", stats_out, "write stats JSON here");

  auto *fixtures = app.add_subcommand("fixtures", "synthetic datasets");
  fixtures->require_subcommand(1);
  auto *generate = fixtures->add_subcommand("generate", "write a fixture dataset");
  adfuse::FixtureConfig fx;
  std::string fx_out;
  generate->add_option("--out", fx_out, "output directory")->required();
  generate->add_option("--seed", fx.seed, "generator seed");
  generate->add_option("--n-train", fx.n_train, "training subjects");
  generate->add_option("--n-test", fx.n_test, "test subjects");
  generate->add_option("--separation", fx.separation,
                       "class mean distance per coordinate, in noise stds");
  generate->add_option("--text-dim", fx.text_dim, "contextual vector width");
  generate->add_flag("--shuffle-labels", fx.shuffle_train_labels,
                     "permute training labels");

  ConfigFlags train_flags, eval_flags, predict_flags;
  auto *train = app.add_subcommand("train", "grid-search C and train a model");
  train_flags.Register(train);

  auto *evaluate = app.add_subcommand("evaluate", "score a labeled partition");
  eval_flags.Register(evaluate);
  std::string eval_model, eval_partition = "test";
  evaluate->add_option("--model", eval_model, "model.json")->required();
  evaluate->add_option("--partition", eval_partition, "train | dev | test");

  auto *predict = app.add_subcommand("predict", "predict labels for a partition");
  predict_flags.Register(predict);
  std::string predict_model, predict_partition = "test";
  predict->add_option("--model", predict_model, "model.json")->required();
  predict->add_option("--partition", predict_partition, "train | dev | test");

  CLI11_PARSE(app, argc, argv);
  const fs::path root_dir(root);

  try {
    if (*normalize) {
      const auto s = adfuse::RunNormalize(Under(root_dir, norm_in),
                                          Under(root_dir, norm_out));
      for (const auto &[file, n] : s.unknown_by_file)
        std::cerr << fmt::format("adfuse: warning: {}: {} unknown annotation "
                                 "code(s) deleted\n", file, n);
      std::cout << fmt::format(
          "normalized {} files: {} words, {} unique, {} unknown codes\n",
          s.files, s.stats.total_words, s.stats.unique_words, s.unknown_codes);
    } else if (*stats) {
      const auto s = adfuse::RunStats(Under(root_dir, stats_manifest));
      const std::string text = adfuse::ToJson(s).dump(2) + "\n";
      if (stats_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(Under(root_dir, stats_out));
        out << text;
        if (!out) throw adfuse::Error("cannot write " + stats_out);
      }
    } else if (*generate) {
      const auto m = adfuse::GenerateFixtures(fx, Under(root_dir, fx_out));
      std::cout << fmt::format("wrote {} subjects to {}\n", m.subjects.size(),
                               Under(root_dir, fx_out).string());
    } else if (*train) {
      const auto s = adfuse::RunTrain(train_flags.Build(root_dir));
      std::cout << fmt::format(
          "train {} / dev {} subjects, width {}: best C={} dev accuracy {:.4f}\n"
          "model written to {}\n",
          s.train_subjects, s.dev_subjects, s.width, s.best_c,
          adfuse::RoundHalfUp(s.dev_accuracy), s.model_path.string());
    } else if (*evaluate) {
      const auto config = eval_flags.Build(root_dir);
      const auto s = adfuse::RunEvaluate(config, Under(root_dir, eval_model),
                                         adfuse::ParsePartition(eval_partition));
      std::cout << adfuse::FormatMetricsTable({{eval_partition, s.metrics}});
      std::cout << "report written to " << s.out_dir.string() << "\n";
    } else if (*predict) {
      const auto config = predict_flags.Build(root_dir);
      const auto preds = adfuse::RunPredict(
          config, Under(root_dir, predict_model),
          adfuse::ParsePartition(predict_partition));
      for (const auto &p : preds)
        std::cout << p.subject << '\t' << adfuse::ToString(p.predicted) << '\t'
                  << p.mean_score << '\n';
    }
  } catch (const std::exception &e) {
    std::cerr << "adfuse: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
