// src/linguistic_features.cc

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

#include "adfuse/linguistic_features.h"

#include <algorithm>

#include "adfuse/error.h"

namespace adfuse {

LayerRange LayerRange::Parse(const std::string &s, int num_layers) {
  const auto sep = s.find("..");
  if (sep == std::string::npos)
    throw DataError("layer range must look like A..B, got '" + s + "'");
  LayerRange r;
  try {
    r.first = std::stoi(s.substr(0, sep));
    r.last = std::stoi(s.substr(sep + 2));
  } catch (const std::exception &) {
    throw DataError("layer range must look like A..B, got '" + s + "'");
  }
  r.num_layers = num_layers;
  if (r.first < 0 || r.last < r.first || r.last >= num_layers)
    throw DataError("layer range " + s + " does not fit " +
                    std::to_string(num_layers) + " layers");
  return r;
}

std::string LayerRange::ToString() const {
  return std::to_string(first) + ".." + std::to_string(last);
}

std::string ToString(Pooling p) { return p == Pooling::kMean ? "mean" : "max"; }

Pooling ParsePooling(const std::string &s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "max") return Pooling::kMax;
  throw DataError("pooling must be mean or max, got '" + s + "'");
}

std::vector<double> TokenEmbedding(std::span<const float> stack, int n_layers,
                                   int dim, const LayerRange &range) {
  if (n_layers != range.num_layers)
    throw DimensionError("token stack has " + std::to_string(n_layers) +
                         " layers, expected " +
                         std::to_string(range.num_layers));
  if (dim <= 0 || stack.size() != static_cast<std::size_t>(n_layers) * dim)
    throw DimensionError("token stack holds " + std::to_string(stack.size()) +
                         " values, expected " +
                         std::to_string(n_layers * dim));
  if (range.first < 0 || range.last >= n_layers || range.last < range.first)
    throw DimensionError("layer range " + range.ToString() +
                         " outside the stack");
  std::vector<double> out(dim, 0.0);
  for (int l = range.first; l <= range.last; ++l) {
    const float *row = stack.data() + static_cast<std::size_t>(l) * dim;
    for (int d = 0; d < dim; ++d) out[d] += row[d];
  }
  const double inv = 1.0 / range.Count();
  for (double &x : out) x *= inv;
  return out;
}

std::vector<double> SentenceEmbedding(
    const std::vector<std::vector<double>> &tokens) {
  if (tokens.empty()) throw DataError("sentence has no tokens");
  const std::size_t dim = tokens.front().size();
  std::vector<double> out(dim, 0.0);
  for (const auto &t : tokens) {
    if (t.size() != dim)
      throw DimensionError("token vectors of unequal width in sentence");
    for (std::size_t d = 0; d < dim; ++d) out[d] += t[d];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double &x : out) x *= inv;
  return out;
}

std::vector<double> DocumentVector(
    const std::vector<std::vector<double>> &sentences, Pooling pooling) {
  if (sentences.empty()) throw DataError("description has no sentences");
  const std::size_t dim = sentences.front().size();
  for (const auto &s : sentences)
    if (s.size() != dim)
      throw DimensionError("sentence vectors of unequal width in description");
  if (pooling == Pooling::kMax) {
    std::vector<double> out = sentences.front();
    for (const auto &s : sentences)
      for (std::size_t d = 0; d < dim; ++d) out[d] = std::max(out[d], s[d]);
    return out;
  }
  return SentenceEmbedding(sentences);
}

DescriptionFeatures ComputeDescriptionFeatures(const TokenLayerTensor &tensor,
                                               const LayerRange &range,
                                               Pooling pooling) {
  DescriptionFeatures f;
  for (std::size_t s = 0; s < tensor.sentences.size(); ++s) {
    const std::uint32_t n = tensor.sentences[s].n_tokens;
    if (n == 0) continue;
    std::vector<std::vector<double>> tokens;
    tokens.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k)
      tokens.push_back(TokenEmbedding(tensor.TokenStack(s, k), tensor.n_layers,
                                      tensor.dim, range));
    f.per_sentence.push_back(SentenceEmbedding(tokens));
  }
  if (!f.per_sentence.empty())
    f.document = DocumentVector(f.per_sentence, pooling);
  return f;
}

}  // namespace adfuse
