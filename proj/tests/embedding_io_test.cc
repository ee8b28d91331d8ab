// tests/embedding_io_test.cc

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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <unistd.h>
#include <algorithm>

#include "adfuse/chat_normalizer.h"
#include "adfuse/embedding_io.h"
#include "adfuse/error.h"
#include "doctest.h"

using namespace adfuse;
namespace fs = std::filesystem;

namespace {

EmbeddingBundle ZeroBundle() {
  EmbeddingBundle b;
  b.subject_id = "S1";
  TokenLayerTensor t;
  t.n_layers = 13;
  t.dim = 2;
  t.sentences.push_back({1, std::vector<float>(26, 0.0f)});
  b.tensor = t;
  return b;
}

EmbeddingBundle RandomBundle(std::mt19937 &rng) {
  std::uniform_int_distribution<int> small(1, 4);
  std::normal_distribution<float> normal(0.0f, 3.0f);
  EmbeddingBundle b;
  b.subject_id = "subj-" + std::to_string(rng() % 1000);
  TokenLayerTensor t;
  t.n_layers = static_cast<std::uint16_t>(small(rng) + 1);
  t.dim = static_cast<std::uint16_t>(small(rng));
  const int n_sent = small(rng);
  for (int s = 0; s < n_sent; ++s) {
    SentenceTensor st;
    st.n_tokens = static_cast<std::uint32_t>(small(rng));
    for (std::size_t k = 0; k < st.n_tokens * t.n_layers * t.dim; ++k)
      st.data.push_back(normal(rng));
    t.sentences.push_back(std::move(st));
  }
  b.tensor = std::move(t);
  b.acoustic["xvec_sre"] = std::vector<float>(5, -0.0f);
  b.acoustic["ivec_vox"] = {std::numeric_limits<float>::denorm_min(), 1e30f};
  return b;
}

fs::path TempPath(const std::string &name) {
  return fs::temp_directory_path() /
         ("adfuse_emb_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("zero tensor layout") {
  const auto bytes = EncodeBundle(ZeroBundle());
  REQUIRE(bytes.size() == 24 + 26 * 4);
  const std::vector<std::uint8_t> header = {
      'A', 'D', 'E', 'B', 1, 0,  // magic, version
      2,   0,   'S', '1',        // id
      1,                         // sections
      1,                         // kind
      1,   0,   0,   0,          // n_sentences
      13,  0,   2,   0,          // n_layers, dim
      1,   0,   0,   0};         // n_tokens
  CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 24) == header);
  CHECK(std::all_of(bytes.begin() + 24, bytes.end(),
                    [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("write/read round trip and byte identity") {
  std::mt19937 rng(3);
  const EmbeddingBundle b = RandomBundle(rng);
  const fs::path p1 = TempPath("a.emb"), p2 = TempPath("b.emb");
  WriteBundle(b, p1);
  WriteBundle(b, p2);
  CHECK(ReadBundle(p1) == b);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  fs::remove(p1);
  fs::remove(p2);

  // Negative zero survives bit for bit.
  const EmbeddingBundle back = DecodeBundle(EncodeBundle(b));
  CHECK(std::signbit(back.acoustic.at("xvec_sre")[0]));
}

TEST_CASE("property: decode(encode(b)) == b") {
  std::mt19937 rng(17);
  for (int i = 0; i < 50; ++i) {
    const EmbeddingBundle b = RandomBundle(rng);
    CHECK(DecodeBundle(EncodeBundle(b)) == b);
  }
}

TEST_CASE("section order does not matter") {
  EmbeddingBundle tensor_only = ZeroBundle();
  EmbeddingBundle vectors_only;
  vectors_only.subject_id = "S1";
  vectors_only.acoustic["xvec_sre"] = {1.0f, 2.0f};
  const auto a = EncodeBundle(tensor_only);
  const auto v = EncodeBundle(vectors_only);
  const std::size_t head = 4 + 2 + 2 + 2 + 1;
  std::vector<std::uint8_t> spliced(a.begin(), a.begin() + head);
  spliced[head - 1] = 2;
  spliced.insert(spliced.end(), v.begin() + head, v.end());
  spliced.insert(spliced.end(), a.begin() + head, a.end());

  EmbeddingBundle both = tensor_only;
  both.acoustic = vectors_only.acoustic;
  CHECK(DecodeBundle(spliced) == both);
  CHECK(EncodeBundle(both) != spliced);  // canonical order differs
}

TEST_CASE("read errors") {
  auto bytes = EncodeBundle(ZeroBundle());

  auto bad_magic = bytes;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  CHECK_THROWS_AS(DecodeBundle(bad_magic), FormatError);

  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_AS(DecodeBundle(bad_version), FormatError);

  // Cut 10 bytes into the 104-byte payload that starts at offset 24.
  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 10);
  try {
    DecodeBundle(truncated);
    FAIL("expected truncation");
  } catch (const TruncationError &e) {
    CHECK(e.expected() == 104);
    CHECK(e.actual() == 94);
    CHECK(std::string(e.what()).find("expected 104 bytes, got 94") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(DecodeBundle(std::vector<std::uint8_t>(bytes.begin(),
                                                         bytes.begin() + 3)),
                  TruncationError);

  auto nan = bytes;
  const std::uint32_t qnan = 0x7FC00000u;
  std::memcpy(nan.data() + 28, &qnan, 4);
  CHECK_THROWS_AS(DecodeBundle(nan), DataError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(DecodeBundle(trailing), FormatError);

  auto kind = bytes;
  kind[11] = 9;
  CHECK_THROWS_AS(DecodeBundle(kind), FormatError);

  CHECK_THROWS_AS(ReadBundle(TempPath("does-not-exist.emb")), Error);
}

TEST_CASE("write refuses bad bundles") {
  EmbeddingBundle b = ZeroBundle();
  b.tensor->sentences[0].data[5] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(EncodeBundle(b), DataError);

  EmbeddingBundle empty;
  empty.subject_id = "S1";
  CHECK_THROWS_AS(EncodeBundle(empty), DataError);

  EmbeddingBundle no_tokens = ZeroBundle();
  no_tokens.tensor->sentences[0] = {0, {}};
  CHECK_THROWS_AS(EncodeBundle(no_tokens), DataError);

  EmbeddingBundle short_payload = ZeroBundle();
  short_payload.tensor->sentences[0].data.pop_back();
  CHECK_THROWS_AS(EncodeBundle(short_payload), DataError);
}

TEST_CASE("validate_bundle") {
  BundleExpectations expect;
  expect.subject_id = "S1";
  expect.n_layers = 13;
  expect.text_dim = 2;

  EmbeddingBundle b = ZeroBundle();
  b.acoustic["xvec_sre"] = std::vector<float>(512, 0.5f);
  b.acoustic["ivec_vox"] = std::vector<float>(400, 0.5f);
  const EmbeddingBundle before = b;
  CHECK(ValidateBundle(b, expect).empty());
  CHECK(b == before);

  b.acoustic["xvec_sre"].pop_back();
  const auto v = ValidateBundle(b, expect);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("xvec_sre: expected 512") == 0);

  // Tensor with 5 tokens against a transcript with 6.
  EmbeddingBundle five;
  five.subject_id = "S1";
  five.tensor = TokenLayerTensor{13, 2, {{5, std::vector<float>(5 * 26, 0.f)}}};
  const Transcript six =
      ParseTranscript("*PAR:\tone two three four five six .\n", "S1");
  const auto tv = ValidateBundle(five, expect, &six);
  REQUIRE(tv.size() == 1);
  CHECK(tv[0].find("token count") != std::string::npos);

  const Transcript five_words =
      ParseTranscript("*PAR:\tone two <three four> [/] five .\n", "S1");
  CHECK(ValidateBundle(five, expect, &five_words).empty());

  BundleExpectations other = expect;
  other.subject_id = "S2";
  other.required_tags = {"xvec_vox"};
  other.n_layers = 12;
  CHECK(ValidateBundle(five, other).size() == 3);
}
