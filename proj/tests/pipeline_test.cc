// tests/pipeline_test.cc

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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adfuse/error.h"
#include "adfuse/fixtures.h"
#include "adfuse/pipeline.h"
#include "doctest.h"

using namespace adfuse;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch directory removed when the test case ends.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &tag)
      : path(fs::temp_directory_path() /
             ("adfuse_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

FixtureConfig SmallFixtures() {
  FixtureConfig f;
  f.text_dim = 16;
  f.xvector_dim = 32;
  f.ivector_dim = 24;
  return f;
}

PipelineConfig ConfigFor(const fs::path &root, const std::string &out) {
  PipelineConfig c;
  c.manifest = root / "data" / "manifest.json";
  c.out = root / out;
  return c;
}

}  // namespace

TEST_CASE("normalize a directory") {
  TempDir tmp("normalize");
  const fs::path in = fs::path(ADFUSE_TEST_DATA_DIR) / "chat";
  const NormalizeSummary s = RunNormalize(in, tmp.path / "a");
  CHECK(s.files == 3);
  for (const char *name : {"s01.json", "s02.json", "s03.json", "stats.json"})
    CHECK(fs::exists(tmp.path / "a" / name));
  RunNormalize(in, tmp.path / "b");
  CHECK(Slurp(tmp.path / "a" / "s02.json") == Slurp(tmp.path / "b" / "s02.json"));
  CHECK(Slurp(tmp.path / "a" / "stats.json") ==
        Slurp(tmp.path / "b" / "stats.json"));

  // A normalized transcript loads back to the same tokens.
  const Transcript direct = LoadTranscript(in / "s01.cha", "s01");
  const Transcript stored = LoadTranscript(tmp.path / "a" / "s01.json", "s01");
  REQUIRE(direct.utterances.size() == stored.utterances.size());
  for (std::size_t i = 0; i < direct.utterances.size(); ++i)
    CHECK(direct.utterances[i].tokens == stored.utterances[i].tokens);

  CHECK(s.unknown_by_file.empty());

  fs::create_directories(tmp.path / "odd");
  std::ofstream(tmp.path / "odd" / "x.cha") << "*PAR:\tthe [~ foo] boy .\n";
  const NormalizeSummary odd = RunNormalize(tmp.path / "odd", tmp.path / "d");
  REQUIRE(odd.unknown_by_file.size() == 1);
  CHECK(odd.unknown_by_file[0].first == "x.cha");
  CHECK(odd.unknown_by_file[0].second == 1);

  fs::create_directories(tmp.path / "empty");
  CHECK_THROWS_AS(RunNormalize(tmp.path / "empty", tmp.path / "c"), Error);
  CHECK(!fs::exists(tmp.path / "c" / "stats.json"));
}

TEST_CASE("fixtures are reproducible") {
  TempDir tmp("fixtures");
  FixtureConfig f = SmallFixtures();
  f.n_train = 36;
  f.n_test = 9;
  const DatasetManifest m = GenerateFixtures(f, tmp.path / "a");
  GenerateFixtures(f, tmp.path / "b");
  CHECK(m.subjects.size() == 45);
  for (const char *p : {"manifest.json", "bundles/S001.emb", "transcripts/S044.cha"})
    CHECK(Slurp(tmp.path / "a" / p) == Slurp(tmp.path / "b" / p));

  // Every bundle validates against its own transcript.
  for (const SubjectRecord &r : m.subjects) {
    BundleExpectations e = m.shapes;
    e.subject_id = r.id;
    const Transcript t = LoadTranscript(r.transcript, r.id);
    CHECK(ValidateBundle(ReadBundle(r.bundle), e, &t).empty());
  }
}

TEST_CASE("train, evaluate and predict") {
  TempDir tmp("train");
  GenerateFixtures(SmallFixtures(), tmp.path / "data");

  PipelineConfig c = ConfigFor(tmp.path, "run1");
  c.c_grid = {0.01};
  const TrainSummary t = RunTrain(c);
  CHECK(t.train_subjects == 86);
  CHECK(t.dev_subjects == 22);
  CHECK(t.width == 16 + 32);
  CHECK(t.best_c == 0.01);
  const auto report = nlohmann::json::parse(Slurp(c.out / "dev_report.json"));
  CHECK(report["grid"].size() == 1);
  for (const char *f : {"model.json", "dev_report.txt", "split.json", "run.json"})
    CHECK(fs::exists(c.out / f));
  const auto run = nlohmann::json::parse(Slurp(c.out / "run.json"));
  CHECK(run["command"] == "train");
  CHECK(run["inputs"].size() > 0);

  PipelineConfig c2 = ConfigFor(tmp.path, "run2");
  c2.c_grid = {0.01};
  RunTrain(c2);
  CHECK(Slurp(c.out / "model.json") == Slurp(c2.out / "model.json"));
  CHECK(Slurp(c.out / "split.json") == Slurp(c2.out / "split.json"));

  const EvaluateSummary e1 = RunEvaluate(c, t.model_path, Partition::kTest);
  CHECK(e1.predictions.size() == 48);
  CHECK(e1.metrics.accuracy >= 0.95);
  const std::string first = Slurp(e1.out_dir / "report.json");
  RunEvaluate(c, t.model_path, Partition::kTest);
  CHECK(Slurp(e1.out_dir / "report.json") == first);
  CHECK(Slurp(e1.out_dir / "predictions.csv").rfind("subject,", 0) == 0);

  const auto p = RunPredict(c, t.model_path, Partition::kTest);
  CHECK(p.size() == 48);
  CHECK(fs::exists(c.out / "predict-test" / "predictions.csv"));

  // Sentence-level system with majority voting.
  PipelineConfig s = ConfigFor(tmp.path, "sentence");
  s.system = "linguistic-sentence+acoustic:ivec_vox";
  s.c_grid = {0.1, 1.0};
  const TrainSummary ts = RunTrain(s);
  CHECK(ts.width == 16 + 24);
  CHECK(RunEvaluate(s, ts.model_path, Partition::kTest).predictions.size() == 48);
}

TEST_CASE("pipeline errors") {
  TempDir tmp("errors");
  GenerateFixtures(SmallFixtures(), tmp.path / "data");
  PipelineConfig c = ConfigFor(tmp.path, "run");
  c.c_grid = {1.0};
  const TrainSummary t = RunTrain(c);

  // Same manifest layout, different text width.
  FixtureConfig wide = SmallFixtures();
  wide.text_dim = 20;
  GenerateFixtures(wide, tmp.path / "wide");
  PipelineConfig w = c;
  w.manifest = tmp.path / "wide" / "manifest.json";
  try {
    RunEvaluate(w, t.model_path, Partition::kTest);
    FAIL("expected a width error");
  } catch (const DimensionError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("48") != std::string::npos);
    CHECK(msg.find("52") != std::string::npos);
  }

  fs::remove(tmp.path / "data" / "bundles" / "S003.emb");
  PipelineConfig again = ConfigFor(tmp.path, "run-missing");
  try {
    RunTrain(again);
    FAIL("expected a missing bundle error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("S003") != std::string::npos);
  }
  CHECK(!fs::exists(tmp.path / "run-missing" / "model.json"));
}

TEST_CASE("config json") {
  const nlohmann::json j = {{"manifest", "m.json"},
                            {"system", "acoustic:xvec_sre"},
                            {"c_grid", {0.1, 1}},
                            {"layers", "1..11"},
                            {"pooling", "max"}};
  const PipelineConfig c = PipelineConfig::FromJson(j, "/r");
  CHECK(c.manifest == fs::path("/r/m.json"));
  CHECK(c.layers.first == 1);
  CHECK(c.pooling == Pooling::kMax);
  CHECK(c.c_grid.size() == 2);
  CHECK(c.tolerance == 1e-4);
  const PipelineConfig back = PipelineConfig::FromJson(c.ToJson());
  CHECK(back.system == c.system);
  CHECK(back.c_grid == c.c_grid);
}
