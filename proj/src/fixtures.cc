// src/fixtures.cc

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

#include "adfuse/fixtures.h"

#include <cmath>
#include <fstream>
#include <random>

#include "adfuse/chat_normalizer.h"
#include "adfuse/embedding_io.h"
#include "adfuse/error.h"
#include "fmt/format.h"

namespace adfuse {

namespace fs = std::filesystem;

namespace {

// Cookie Theft style vocabulary; the parenthesized entries exercise the
// omitted-letter rule.
const std::vector<std::string> kWords = {
    "the",     "boy",     "girl",    "mother",  "is",      "are",
    "stool",   "cookie",  "jar",     "falling", "water",   "sink",
    "over",    "running", "dishes",  "window",  "curtains", "plate",
    "drying",  "she",     "he",      "reaching", "for",    "a",
    "and",     "kitchen", "cupboard", "floor",  "outside", "lady",
    "getting", "cookies", "tipping", "spilling", "wet",    "it's",
    "there's", "little",  "sister",  "laughing", "standing", "on",
    "(be)cause", "runnin(g)", "somethin(g)", "(a)bout", "lookin(g)", "up"};

const std::vector<std::string> kFillers = {"&-um", "&-uh", "&+fr", "&=laughs"};

class Generator {
 public:
  Generator(const FixtureConfig &c) : c_(c), rng_(c.seed) {
    text_dir_ = Signs(c.text_dim);
    for (const std::string &tag : c.acoustic_tags)
      acoustic_dir_[tag] = Signs(AcousticDim(tag));
  }

  std::size_t AcousticDim(const std::string &tag) const {
    if (tag.rfind("ivec", 0) == 0) return c_.ivector_dim;
    return c_.xvector_dim;
  }

  std::vector<double> Signs(std::size_t n) {
    std::bernoulli_distribution coin(0.5);
    std::vector<double> s(n);
    for (double &v : s) v = coin(rng_) ? 1.0 : -1.0;
    return s;
  }

  double Normal() { return normal_(rng_); }
  int Uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool Chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  const std::string &Word() {
    return kWords[Uniform(0, static_cast<int>(kWords.size()) - 1)];
  }

  std::string ParticipantLine() {
    std::vector<std::string> parts;
    if (Chance(0.3)) parts.push_back(kFillers[Uniform(0, 3)]);
    const int n = Uniform(2, 7);
    for (int k = 0; k < n; ++k) {
      const double r = std::uniform_real_distribution<double>(0, 1)(rng_);
      if (r < 0.08) {
        const std::string a = Word(), b = Word();
        parts.push_back("<" + a + " " + b + "> [/]");
        parts.push_back(a);
        parts.push_back(b);
      } else if (r < 0.14) {
        parts.push_back("(.)");
        parts.push_back(Word());
      } else if (r < 0.18) {
        parts.push_back("xxx");
      } else if (r < 0.22) {
        parts.push_back(Word() + "@u");
      } else if (r < 0.26) {
        const std::string w = Word();
        parts.push_back(w + " [//] " + Word());
      } else {
        parts.push_back(Word());
      }
    }
    if (Chance(0.1)) parts.push_back("[+ exc]");
    parts.push_back(Chance(0.85) ? "." : "?");
    std::string line;
    for (const std::string &p : parts) {
      if (!line.empty()) line += ' ';
      line += p;
    }
    return line;
  }

  std::string TranscriptText(const std::string &id) {
    std::string text = "@UTF8\n@Begin\n@Languages:\teng\n";
    text += "@Participants:\tPAR Participant, INV Investigator\n";
    text += "@ID:\teng|Pitt|PAR|||||Participant|||\n";
    text += "@Comment:\tsynthetic description " + id + "\n";
    text += "*INV:\ttell me everything you see going on in that picture .\n";
    const int n = Uniform(c_.min_utterances, c_.max_utterances);
    for (int u = 0; u < n; ++u) {
      text += "*PAR:\t" + ParticipantLine() + "\n";
      if (Chance(0.3)) text += "%mor:\tdet|the n|boy .\n";
      if (Chance(0.15)) text += "*INV:\tmhm .\n";
    }
    text += "@End\n";
    return text;
  }

  TokenLayerTensor Tensor(const Transcript &t, double sign) {
    TokenLayerTensor tensor;
    tensor.n_layers = c_.n_layers;
    tensor.dim = c_.text_dim;
    const double half = 0.5 * c_.separation * sign;
    for (const Utterance *u : t.ParticipantUtterances()) {
      if (u->tokens.empty()) continue;
      SentenceTensor st;
      st.n_tokens = static_cast<std::uint32_t>(u->tokens.size());
      st.data.reserve(std::size_t{st.n_tokens} * c_.n_layers * c_.text_dim);
      for (std::uint32_t k = 0; k < st.n_tokens; ++k) {
        std::vector<double> base(c_.text_dim);
        for (std::size_t d = 0; d < base.size(); ++d)
          base[d] = half * text_dir_[d] + Normal();
        for (int l = 0; l < c_.n_layers; ++l) {
          // Embedding output and the first block carry no class signal.
          for (std::size_t d = 0; d < base.size(); ++d) {
            const double v = l < 2 ? Normal() : base[d] + 0.1 * Normal();
            st.data.push_back(static_cast<float>(v));
          }
        }
      }
      tensor.sentences.push_back(std::move(st));
    }
    return tensor;
  }

  std::vector<float> Acoustic(const std::string &tag, double sign) {
    const std::vector<double> &dir = acoustic_dir_.at(tag);
    const double half = 0.5 * c_.separation * sign;
    std::vector<float> v(dir.size());
    for (std::size_t d = 0; d < dir.size(); ++d)
      v[d] = static_cast<float>(half * dir[d] + Normal());
    return v;
  }

  std::mt19937_64 &rng() { return rng_; }

 private:
  const FixtureConfig &c_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<double> text_dir_;
  std::map<std::string, std::vector<double>> acoustic_dir_;
};

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Per-class subjects, with 4/9 of each class male (24 of 54 in the
// training partition, 11 of 24 in the test partition).
void AddPartition(std::vector<SubjectRecord> *out, std::size_t n,
                  Partition partition, std::size_t *next_id) {
  const std::size_t per_class = n / 2;
  const std::size_t males = static_cast<std::size_t>(
      std::lround(static_cast<double>(per_class) * 4.0 / 9.0));
  for (Label label : {Label::kAD, Label::kControl}) {
    const std::size_t count = label == Label::kAD ? n - per_class : per_class;
    for (std::size_t k = 0; k < count; ++k) {
      SubjectRecord r;
      r.id = fmt::format("S{:03d}", (*next_id)++);
      r.label = label;
      r.gender = k < males ? Gender::kMale : Gender::kFemale;
      r.partition = partition;
      out->push_back(std::move(r));
    }
  }
}

}  // namespace

DatasetManifest GenerateFixtures(const FixtureConfig &config,
                                 const fs::path &out_dir) {
  if (config.n_train < 4 || config.n_test < 2)
    throw DataError("fixture sizes too small");
  if (config.min_utterances < 1 || config.max_utterances < config.min_utterances)
    throw DataError("bad utterance count range");

  Generator gen(config);
  DatasetManifest m;
  m.shapes.n_layers = config.n_layers;
  m.shapes.text_dim = config.text_dim;
  m.shapes.xvector_dim = config.xvector_dim;
  m.shapes.ivector_dim = config.ivector_dim;
  for (const std::string &tag : config.acoustic_tags)
    m.shapes.acoustic_dims[tag] = gen.AcousticDim(tag);

  std::size_t next_id = 1;
  AddPartition(&m.subjects, config.n_train, Partition::kTrain, &next_id);
  AddPartition(&m.subjects, config.n_test, Partition::kTest, &next_id);

  fs::create_directories(out_dir / "transcripts");
  fs::create_directories(out_dir / "bundles");
  for (SubjectRecord &r : m.subjects) {
    const double sign = ToSign(r.label);
    const std::string text = gen.TranscriptText(r.id);
    const Transcript t = ParseTranscript(text, r.id);
    EmbeddingBundle b;
    b.subject_id = r.id;
    b.tensor = gen.Tensor(t, sign);
    for (const std::string &tag : config.acoustic_tags)
      b.acoustic[tag] = gen.Acoustic(tag, sign);
    r.transcript = out_dir / "transcripts" / (r.id + ".cha");
    r.bundle = out_dir / "bundles" / (r.id + ".emb");
    WriteText(r.transcript, text);
    WriteBundle(b, r.bundle);
  }

  if (config.shuffle_train_labels) {
    std::vector<SubjectRecord *> train;
    std::vector<Label> labels;
    for (SubjectRecord &r : m.subjects)
      if (r.partition == Partition::kTrain) {
        train.push_back(&r);
        labels.push_back(r.label);
      }
    std::shuffle(labels.begin(), labels.end(), gen.rng());
    for (std::size_t i = 0; i < train.size(); ++i) train[i]->label = labels[i];
  }

  WriteText(out_dir / "manifest.json", ToJson(m, out_dir).dump(2) + "\n");
  return m;
}

}  // namespace adfuse
