// include/adfuse/fixtures.h

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

#ifndef ADFUSE_FIXTURES_H_
#define ADFUSE_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adfuse/features.h"

namespace adfuse {

/// Synthetic stand-in for a restricted corpus: CHAT transcripts with inline
/// annotations, bundles whose tensors align with the normalized tokens, and
/// acoustic vectors, all drawn from class-conditional Gaussians.
struct FixtureConfig {
  std::size_t n_train = 108;
  std::size_t n_test = 48;
  std::uint64_t seed = 7;
  // Distance between the class means in every informative coordinate, in
  // units of the per-coordinate noise std.
  double separation = 1.5;
  std::uint16_t n_layers = 13;
  std::uint16_t text_dim = 64;
  std::size_t xvector_dim = 512;
  std::size_t ivector_dim = 400;
  std::vector<std::string> acoustic_tags = {"xvec_sre", "xvec_vox", "ivec_vox"};
  int min_utterances = 4;
  int max_utterances = 8;
  // Permute the train-partition labels after generation; test labels stay
  // true, so a model trained on them should score at chance.
  bool shuffle_train_labels = false;
};

/// Writes manifest.json, transcripts/<id>.cha and bundles/<id>.emb below
/// `out_dir` and returns the manifest.  Same config, same bytes.
DatasetManifest GenerateFixtures(const FixtureConfig &config,
                                 const std::filesystem::path &out_dir);

}  // namespace adfuse

#endif  // ADFUSE_FIXTURES_H_
