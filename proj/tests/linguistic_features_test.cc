// tests/linguistic_features_test.cc

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

#include <algorithm>
#include <random>

#include "adfuse/error.h"
#include "adfuse/linguistic_features.h"
#include "doctest.h"
#include "oracles/pooling_oracle.h"

using namespace adfuse;

namespace {

// Flattens [layer][dim] into the layout TokenEmbedding expects.
std::vector<float> Flatten(const oracle::Stack &s) {
  std::vector<float> out;
  for (const auto &layer : s)
    for (double v : layer) out.push_back(static_cast<float>(v));
  return out;
}

oracle::Stack RandomStack(std::mt19937 &rng, int n_layers, int dim) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  oracle::Stack s(n_layers, std::vector<double>(dim));
  for (auto &layer : s)
    for (double &v : layer) v = normal(rng);
  return s;
}

}  // namespace

TEST_CASE("token embedding examples") {
  // Constant stack comes back unchanged.
  std::vector<float> constant(13 * 4, 2.5f);
  for (double v : TokenEmbedding(constant, 13, 4)) CHECK(v == 2.5);

  // Layer l holds the value l: mean over 2..12 is exactly 7.
  std::vector<float> ramp;
  for (int l = 0; l < 13; ++l) ramp.insert(ramp.end(), 3, static_cast<float>(l));
  for (double v : TokenEmbedding(ramp, 13, 3)) CHECK(v == 7.0);

  LayerRange alt{1, 11, 13};
  for (double v : TokenEmbedding(ramp, 13, 3, alt)) CHECK(v == 6.0);

  std::vector<float> twelve(12 * 3, 0.0f);
  CHECK_THROWS_AS(TokenEmbedding(twelve, 12, 3), DimensionError);
  CHECK_THROWS_AS(TokenEmbedding(ramp, 13, 4), DimensionError);
}

TEST_CASE("token embedding matches oracle") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + trial % 7;
    const oracle::Stack s = RandomStack(rng, 13, dim);
    const auto want = oracle::TokenMean(s, 2, 12);
    const auto got = TokenEmbedding(Flatten(s), 13, dim);
    REQUIRE(got.size() == want.size());
    for (int k = 0; k < dim; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-6));
  }
}

TEST_CASE("sentence embedding") {
  const auto v = SentenceEmbedding({{0, 2}, {2, 0}});
  CHECK(v == std::vector<double>{1, 1});
  CHECK(SentenceEmbedding({{2, 0}, {0, 2}}) == v);
  CHECK_THROWS_AS(SentenceEmbedding({}), DataError);

  // Permutation invariance on random tokens.
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> tokens(9, std::vector<double>(4));
  for (auto &t : tokens)
    for (double &x : t) x = normal(rng);
  const auto base = SentenceEmbedding(tokens);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(tokens.begin(), tokens.end(), rng);
    const auto perm = SentenceEmbedding(tokens);
    for (int k = 0; k < 4; ++k) CHECK(perm[k] == doctest::Approx(base[k]).epsilon(1e-12));
  }
}

TEST_CASE("document pooling") {
  const std::vector<std::vector<double>> s = {{1, 5}, {3, 3}, {2, 4}};
  CHECK(DocumentVector(s, Pooling::kMax) == std::vector<double>{3, 5});
  CHECK(DocumentVector(s, Pooling::kMean) == std::vector<double>{2, 4});
  CHECK_THROWS_AS(DocumentVector({}, Pooling::kMean), DataError);
  CHECK(ParsePooling("max") == Pooling::kMax);
  CHECK(ToString(Pooling::kMean) == "mean");
  CHECK_THROWS(ParsePooling("median"));
}

TEST_CASE("pooling is linear and bounded") {
  std::mt19937 rng(23);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> a(6, std::vector<double>(3)), b = a, mix = a;
    for (auto &r : a)
      for (double &x : r) x = normal(rng);
    for (auto &r : b)
      for (double &x : r) x = normal(rng);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int k = 0; k < 3; ++k) mix[i][k] = 2.0 * a[i][k] - 0.5 * b[i][k];
    const auto ma = SentenceEmbedding(a), mb = SentenceEmbedding(b);
    const auto mm = SentenceEmbedding(mix);
    const auto hi = DocumentVector(a, Pooling::kMax);
    for (int k = 0; k < 3; ++k) {
      CHECK(mm[k] == doctest::Approx(2.0 * ma[k] - 0.5 * mb[k]).epsilon(1e-9));
      double lo = a[0][k];
      for (const auto &r : a) lo = std::min(lo, r[k]);
      CHECK(ma[k] >= lo - 1e-12);
      CHECK(ma[k] <= hi[k] + 1e-12);
    }
  }
}

TEST_CASE("layer range parsing") {
  const LayerRange r = LayerRange::Parse("1..11");
  CHECK(r.first == 1);
  CHECK(r.last == 11);
  CHECK(r.Count() == 11);
  CHECK(r.ToString() == "1..11");
  CHECK_THROWS(LayerRange::Parse("3..2"));
  CHECK_THROWS(LayerRange::Parse("0..13"));
  CHECK_THROWS(LayerRange::Parse("2-12"));
}

TEST_CASE("description features over a tensor") {
  std::mt19937 rng(2);
  TokenLayerTensor t{13, 3, {}};
  std::vector<std::vector<oracle::Stack>> stacks;
  for (std::uint32_t n : {1u, 4u, 2u}) {
    SentenceTensor st{n, {}};
    std::vector<oracle::Stack> tokens;
    for (std::uint32_t j = 0; j < n; ++j) {
      tokens.push_back(RandomStack(rng, 13, 3));
      const auto flat = Flatten(tokens.back());
      st.data.insert(st.data.end(), flat.begin(), flat.end());
    }
    stacks.push_back(tokens);
    t.sentences.push_back(std::move(st));
  }
  const auto f = ComputeDescriptionFeatures(t, LayerRange{}, Pooling::kMean);
  REQUIRE(f.per_sentence.size() == 3);
  std::vector<double> mean(3, 0.0);
  for (int s = 0; s < 3; ++s) {
    const auto want = oracle::SentenceMean(stacks[s], 2, 12);
    for (int k = 0; k < 3; ++k) {
      CHECK(f.per_sentence[s][k] == doctest::Approx(want[k]).epsilon(1e-6));
      mean[k] += want[k] / 3.0;
    }
  }
  for (int k = 0; k < 3; ++k) CHECK(f.document[k] == doctest::Approx(mean[k]).epsilon(1e-6));
}
