// tests/features_test.cc

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "adfuse/error.h"
#include "adfuse/features.h"
#include "doctest.h"

using namespace adfuse;
namespace fs = std::filesystem;

namespace {

// 54 AD and 54 control records, 24 male and 30 female in each class.
std::vector<SubjectRecord> TrainingRecords() {
  std::vector<SubjectRecord> out;
  for (int i = 0; i < 108; ++i) {
    SubjectRecord r;
    r.id = "S" + std::to_string(i);
    r.label = i % 2 == 0 ? Label::kAD : Label::kControl;
    r.gender = (i / 2) < 24 ? Gender::kMale : Gender::kFemale;
    out.push_back(r);
  }
  return out;
}

int Count(const std::vector<SubjectRecord> &v, Label l) {
  return std::count_if(v.begin(), v.end(),
                       [&](const SubjectRecord &r) { return r.label == l; });
}

DesignMatrix Matrix(const std::vector<std::vector<double>> &rows) {
  DesignMatrix m(rows.at(0).size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.AddRow(rows[i], i % 2 ? Label::kAD : Label::kControl,
             "r" + std::to_string(i), "r" + std::to_string(i));
  return m;
}

}  // namespace

TEST_CASE("split sizes and balance") {
  const auto records = TrainingRecords();
  const TrainDevSplit s = SplitTrainDev(records, 0.2, 0);
  CHECK(s.train.size() == 86);
  CHECK(s.dev.size() == 22);
  CHECK(std::abs(Count(s.dev, Label::kAD) - Count(s.dev, Label::kControl)) <= 1);
  CHECK(std::abs(Count(s.train, Label::kAD) - Count(s.train, Label::kControl)) <= 1);

  std::vector<SubjectRecord> four;
  for (int i = 0; i < 4; ++i) {
    SubjectRecord r;
    r.id = std::to_string(i);
    r.label = i < 2 ? Label::kAD : Label::kControl;
    r.gender = Gender::kMale;
    four.push_back(r);
  }
  const TrainDevSplit f = SplitTrainDev(four, 0.5, 1);
  CHECK(f.train.size() == 2);
  CHECK(Count(f.dev, Label::kAD) == 1);
  CHECK(Count(f.dev, Label::kControl) == 1);

  CHECK_THROWS_AS(SplitTrainDev(records, 0.999, 0), DataError);
  CHECK_THROWS_AS(SplitTrainDev(records, 0.0, 0), DataError);
  CHECK_THROWS_AS(SplitTrainDev(four, 0.1, 0), DataError);
}

TEST_CASE("split is deterministic, disjoint and exhaustive") {
  const auto records = TrainingRecords();
  auto ids = [](const std::vector<SubjectRecord> &v) {
    std::vector<std::string> out;
    for (const auto &r : v) out.push_back(r.id);
    return out;
  };
  const TrainDevSplit a = SplitTrainDev(records, 0.2, 42);
  const TrainDevSplit b = SplitTrainDev(records, 0.2, 42);
  CHECK(ids(a.dev) == ids(b.dev));
  bool any_differs = false;
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    any_differs |= ids(SplitTrainDev(records, 0.2, seed).dev) != ids(a.dev);
  CHECK(any_differs);

  std::set<std::string> all;
  for (const auto &r : a.train) all.insert(r.id);
  for (const auto &r : a.dev) CHECK(all.insert(r.id).second);
  CHECK(all.size() == records.size());
  // Input order is kept on both sides.
  const auto dev_ids = ids(a.dev);
  auto pos = [&](const std::string &id) { return std::stoi(id.substr(1)); };
  CHECK(std::is_sorted(dev_ids.begin(), dev_ids.end(),
                       [&](auto &x, auto &y) { return pos(x) < pos(y); }));
}

TEST_CASE("scaler examples") {
  const DesignMatrix m = Matrix({{1, 5}, {2, 5}, {3, 5}});
  const Scaler s = FitScaler(m);
  CHECK(s.means[0] == doctest::Approx(2.0));
  CHECK(s.stds[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(s.IsConstant(1));
  CHECK(!s.IsConstant(0));
  const DesignMatrix z = ApplyScaler(s, m);
  CHECK(z.Row(0)[0] == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(z.Row(1)[0] == doctest::Approx(0.0));
  CHECK(z.Row(2)[0] == doctest::Approx(1.2247).epsilon(1e-4));
  for (std::size_t i = 0; i < 3; ++i) CHECK(z.Row(i)[1] == 0.0);
  CHECK(z.id(2) == "r2");
  CHECK(z.label(1) == Label::kAD);

  // Fitting again on scaled data gives mean 0, std 1.
  const Scaler again = FitScaler(z);
  CHECK(std::abs(again.means[0]) < 1e-9);
  CHECK(std::abs(again.stds[0] - 1.0) < 1e-9);

  CHECK_THROWS_AS(FitScaler(Matrix({{1, 2}})), DataError);
  const std::vector<double> wide = {1, 2, 3};
  CHECK_THROWS_AS(ApplyScaler(s, wide), DimensionError);
  CHECK_THROWS_AS(ApplyScaler(s, Matrix({{1, 2, 3}, {1, 2, 3}})), DimensionError);
}

TEST_CASE("scaler properties") {
  std::mt19937 rng(9);
  std::normal_distribution<double> normal(3.0, 100.0);
  std::vector<std::vector<double>> rows(40, std::vector<double>(6));
  for (auto &r : rows) {
    for (double &x : r) x = normal(rng);
    r[5] = 1e-3;
  }
  const Scaler base = FitScaler(Matrix(rows));
  for (int t = 0; t < 5; ++t) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const Scaler perm = FitScaler(Matrix(rows));
    CHECK(perm.means == base.means);
    CHECK(perm.stds == base.stds);
  }
  // Held-out rows with extreme values never yield NaN.
  const std::vector<double> far = {1e300, -1e300, 0, 0, 0, 7};
  for (double v : ApplyScaler(base, far)) CHECK(!std::isnan(v));

  const Scaler back = ScalerFromJson(ToJson(base));
  CHECK(back.means == base.means);
  CHECK(back.stds == base.stds);
}

TEST_CASE("early fusion") {
  const std::vector<double> text(768, 0.25), xvec(512, -1.0), ivec(400, 2.0);
  const auto f1 = EarlyFuse("S1", {{"text", text}, {"xvec", xvec}});
  CHECK(f1.size() == 1280);
  CHECK(std::equal(text.begin(), text.end(), f1.begin()));
  CHECK(std::equal(xvec.begin(), xvec.end(), f1.begin() + 768));
  CHECK(EarlyFuse("S1", {{"ivec", ivec}, {"xvec", xvec}}).size() == 912);
  CHECK(EarlyFuse("S1", {{"xvec", xvec}}) == xvec);
  try {
    EarlyFuse("S7", {{"text", text}, {"ivec", std::nullopt}});
    FAIL("expected missing part");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()) == "instance S7: missing part ivec");
  }
}

TEST_CASE("system parsing") {
  const auto p = ParseSystem("fusion:linguistic-document+acoustic:xvec_sre");
  REQUIRE(p.size() == 2);
  CHECK(p[0].kind == SystemPart::Kind::kLinguisticDocument);
  CHECK(p[1].tag == "xvec_sre");
  CHECK(SystemToString(p) == "linguistic-document+acoustic:xvec_sre");
  CHECK(ParseSystem("acoustic:a,acoustic:b").size() == 2);
  CHECK_THROWS_AS(ParseSystem("acoustic:a+acoustic:a"), DataError);
  CHECK_THROWS_AS(ParseSystem("linguistic-sentence+linguistic-document"),
                  DataError);
  CHECK_THROWS_AS(ParseSystem("prosody"), DataError);
  CHECK_THROWS_AS(ParseSystem("acoustic:"), DataError);
}

TEST_CASE("subject feature rows") {
  EmbeddingBundle b;
  b.subject_id = "S1";
  TokenLayerTensor t{13, 2, {}};
  // Sentence k has a single token whose every value is k.
  for (int k = 0; k < 3; ++k)
    t.sentences.push_back({1, std::vector<float>(26, static_cast<float>(k))});
  b.tensor = t;
  b.acoustic["xvec_sre"] = {9.0f, 8.0f, 7.0f};

  FeatureConfig doc{ParseSystem("linguistic-document+acoustic:xvec_sre"), {},
                    Pooling::kMax};
  const auto d = SubjectFeatureRows("S1", b, doc);
  REQUIRE(d.size() == 1);
  CHECK(d[0].id == "S1");
  CHECK(d[0].values == std::vector<double>{2, 2, 9, 8, 7});
  CHECK(!doc.PerSentence());

  FeatureConfig sent{ParseSystem("acoustic:xvec_sre+linguistic-sentence"), {},
                     Pooling::kMean};
  CHECK(sent.PerSentence());
  const auto s = SubjectFeatureRows("S1", b, sent);
  REQUIRE(s.size() == 3);
  CHECK(s[2].id == "S1:2");
  CHECK(s[1].values == std::vector<double>{9, 8, 7, 1, 1});

  FeatureConfig missing{ParseSystem("acoustic:ivec_vox"), {}, Pooling::kMean};
  CHECK_THROWS_AS(SubjectFeatureRows("S1", b, missing), DataError);
}

TEST_CASE("manifest json") {
  const nlohmann::json j = {
      {"shapes", {{"text_dim", 64}, {"acoustic", {{"custom", 3}}}}},
      {"subjects",
       {{{"id", "A"}, {"label", "AD"}, {"gender", "male"},
         {"partition", "train"}, {"transcript", "t/A.cha"},
         {"bundle", "b/A.emb"}},
        {{"id", "B"}, {"gender", "female"}, {"partition", "test"},
         {"transcript", "t/B.cha"}, {"bundle", "b/B.emb"}}}}};
  const DatasetManifest m = ManifestFromJson(j, "/data");
  REQUIRE(m.subjects.size() == 2);
  CHECK(m.subjects[0].bundle == fs::path("/data/b/A.emb"));
  CHECK(m.subjects[1].label == Label::kUnknown);
  CHECK(m.shapes.text_dim == 64);
  CHECK(m.shapes.ExpectedDim("custom") == 3);
  CHECK(m.InPartition(Partition::kTest).size() == 1);
  const nlohmann::json back = ToJson(m, "/data");
  CHECK(back["subjects"][0]["bundle"] == "b/A.emb");
  CHECK(ManifestFromJson(back, "/data").subjects[1].id == "B");

  nlohmann::json dup = j;
  dup["subjects"][1]["id"] = "A";
  CHECK_THROWS_AS(ManifestFromJson(dup), DataError);
  nlohmann::json unlabeled = j;
  unlabeled["subjects"][1]["partition"] = "dev";
  CHECK_THROWS_AS(ManifestFromJson(unlabeled), DataError);
  CHECK_THROWS_AS(ManifestFromJson(nlohmann::json(3)), DataError);
}

TEST_CASE("csv export") {
  const fs::path p = fs::temp_directory_path() /
                     ("adfuse_csv_" + std::to_string(::getpid()) + ".csv");
  ExportCsv(Matrix({{1.5, -2}, {0, 3}}), p);
  std::ifstream in(p);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "id,subject,label,f0,f1");
  CHECK(row == "r0,r0,control,1.5,-2");
  fs::remove(p);
}
