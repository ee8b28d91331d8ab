// include/adfuse/embedding_io.h

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

#ifndef ADFUSE_EMBEDDING_IO_H_
#define ADFUSE_EMBEDDING_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adfuse {

struct Transcript;

/// Per-token per-layer vectors of one sentence, token-major, then layer,
/// then dim: value(t, l, d) = data[(t * n_layers + l) * dim + d].
struct SentenceTensor {
  std::uint32_t n_tokens = 0;
  std::vector<float> data;

  friend bool operator==(const SentenceTensor &, const SentenceTensor &) =
      default;
};

struct TokenLayerTensor {
  std::uint16_t n_layers = 0;
  std::uint16_t dim = 0;
  std::vector<SentenceTensor> sentences;

  /// The [n_layers][dim] stack of one token.
  std::span<const float> TokenStack(std::size_t sentence,
                                    std::size_t token) const;
  std::size_t TotalTokens() const;

  friend bool operator==(const TokenLayerTensor &, const TokenLayerTensor &) =
      default;
};

struct EmbeddingBundle {
  std::string subject_id;
  std::optional<TokenLayerTensor> tensor;
  // Keyed by tag (xvec_sre, xvec_vox, ivec_vox, ...).
  std::map<std::string, std::vector<float>> acoustic;

  friend bool operator==(const EmbeddingBundle &, const EmbeddingBundle &) =
      default;
};

// File layout, all integers little-endian:
//   "ADEB" | version u16 | id_len u16 | id bytes | n_sections u8 | sections
//   kind 1: n_sentences u32 | n_layers u16 | dim u16 |
//           per sentence: n_tokens u32 | n_tokens*n_layers*dim f32
//   kind 2: name_len u16 | name bytes | dim u32 | dim f32
inline constexpr char kBundleMagic[4] = {'A', 'D', 'E', 'B'};
inline constexpr std::uint16_t kBundleVersion = 1;

/// Serializes to bytes.  The tensor section comes first, then named vectors
/// in tag order, so equal bundles give identical bytes.
/// Throws DataError on non-finite values or broken invariants.
std::vector<std::uint8_t> EncodeBundle(const EmbeddingBundle &bundle);

/// Throws FormatError (magic, version, layout, trailing bytes),
/// TruncationError (short payload) and DataError (NaN/Inf in payload).
EmbeddingBundle DecodeBundle(std::span<const std::uint8_t> bytes);

void WriteBundle(const EmbeddingBundle &bundle,
                 const std::filesystem::path &path);
EmbeddingBundle ReadBundle(const std::filesystem::path &path);

/// Expected shapes when validating against a manifest entry.
struct BundleExpectations {
  std::string subject_id;
  std::uint16_t n_layers = 13;
  std::uint16_t text_dim = 768;
  // Exact tag -> dim overrides; consulted before the prefix rule.
  std::map<std::string, std::size_t> acoustic_dims;
  // Tags with these prefixes default to the paired width.
  std::size_t xvector_dim = 512;
  std::size_t ivector_dim = 400;
  bool require_tensor = false;
  std::vector<std::string> required_tags;

  std::optional<std::size_t> ExpectedDim(const std::string &tag) const;
};

/// Lists every violation found; an empty result means the bundle conforms.
/// When a transcript is given, the tensor must carry one sentence per
/// participant utterance with at least one token, with equal token counts.
std::vector<std::string> ValidateBundle(const EmbeddingBundle &bundle,
                                        const BundleExpectations &expect,
                                        const Transcript *transcript = nullptr);

}  // namespace adfuse

#endif  // ADFUSE_EMBEDDING_IO_H_
