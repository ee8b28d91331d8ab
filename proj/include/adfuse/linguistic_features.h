// include/adfuse/linguistic_features.h

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

#ifndef ADFUSE_LINGUISTIC_FEATURES_H_
#define ADFUSE_LINGUISTIC_FEATURES_H_

#include <span>
#include <string>
#include <vector>

#include "adfuse/embedding_io.h"

namespace adfuse {

/// Which hidden layers of a 13-layer stack (0 = embedding output,
/// 1..12 = transformer blocks) are averaged into a word vector.  The default
/// 2..12 reads "second to twelfth hidden layers" with the embedding output
/// not counted; {1, 11} is the other reading.
struct LayerRange {
  int first = 2;
  int last = 12;
  int num_layers = 13;

  int Count() const { return last - first + 1; }
  /// Parses "A..B".
  static LayerRange Parse(const std::string &s, int num_layers = 13);
  std::string ToString() const;
};

enum class Pooling { kMean, kMax };

std::string ToString(Pooling p);
Pooling ParsePooling(const std::string &s);

/// Mean of the selected layers of one token.  `stack` is [n_layers][dim].
/// Throws DimensionError when the stack is not range.num_layers tall.
std::vector<double> TokenEmbedding(std::span<const float> stack, int n_layers,
                                   int dim, const LayerRange &range = {});

/// Element-wise mean over token vectors.  Throws DataError on zero tokens.
std::vector<double> SentenceEmbedding(
    const std::vector<std::vector<double>> &tokens);

/// Element-wise mean or maximum over sentence vectors.
std::vector<double> DocumentVector(
    const std::vector<std::vector<double>> &sentences, Pooling pooling);

struct DescriptionFeatures {
  std::vector<std::vector<double>> per_sentence;
  std::vector<double> document;
};

/// Runs the three stages over a whole tensor.  Sentences are never empty in
/// a valid tensor, so every stored sentence yields one embedding.
DescriptionFeatures ComputeDescriptionFeatures(const TokenLayerTensor &tensor,
                                               const LayerRange &range,
                                               Pooling pooling);

}  // namespace adfuse

#endif  // ADFUSE_LINGUISTIC_FEATURES_H_
