// src/embedding_io.cc

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

#include "adfuse/embedding_io.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "adfuse/chat_normalizer.h"
#include "adfuse/error.h"

namespace adfuse {

namespace {

constexpr std::uint8_t kKindTensor = 1;
constexpr std::uint8_t kKindVector = 2;

class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back((v >> (8 * i)) & 0xFF);
  }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back((v >> (8 * i)) & 0xFF);
  }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void Bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void Need(std::size_t n, const char *what) const {
    if (Remaining() < n)
      throw TruncationError(std::string("truncated ") + what + ": expected " +
                                std::to_string(n) + " bytes, got " +
                                std::to_string(Remaining()),
                            n, Remaining());
  }
  std::size_t Remaining() const { return bytes_.size() - pos_; }

  std::uint8_t U8(const char *what) {
    Need(1, what);
    return bytes_[pos_++];
  }
  std::uint16_t U16(const char *what) {
    Need(2, what);
    std::uint16_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t U32(const char *what) {
    Need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string Str(std::size_t n, const char *what) {
    Need(n, what);
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  // Caller has already checked Need() for the full run.
  void F32Run(std::size_t n, std::vector<float> *out, const char *what) {
    out->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t v = 0;
      for (int k = 0; k < 4; ++k)
        v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
      pos_ += 4;
      const float f = std::bit_cast<float>(v);
      if (!std::isfinite(f))
        throw DataError(std::string("non-finite value in ") + what +
                        " at element " + std::to_string(i));
      (*out)[i] = f;
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void CheckFinite(std::span<const float> values, const std::string &what) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw DataError("refusing to write non-finite value in " + what +
                      " at element " + std::to_string(i));
}

}  // namespace

std::span<const float> TokenLayerTensor::TokenStack(std::size_t sentence,
                                                    std::size_t token) const {
  const SentenceTensor &s = sentences.at(sentence);
  if (token >= s.n_tokens)
    throw DimensionError("token index " + std::to_string(token) +
                         " out of range for sentence with " +
                         std::to_string(s.n_tokens) + " tokens");
  const std::size_t stride = std::size_t{n_layers} * dim;
  return std::span<const float>(s.data).subspan(token * stride, stride);
}

std::size_t TokenLayerTensor::TotalTokens() const {
  std::size_t n = 0;
  for (const SentenceTensor &s : sentences) n += s.n_tokens;
  return n;
}

std::vector<std::uint8_t> EncodeBundle(const EmbeddingBundle &bundle) {
  if (bundle.subject_id.empty())
    throw DataError("bundle subject id is empty");
  if (bundle.subject_id.size() > 0xFFFF)
    throw DataError("bundle subject id is too long");
  if (!bundle.tensor && bundle.acoustic.empty())
    throw DataError("bundle for " + bundle.subject_id +
                    " has neither a tensor nor acoustic vectors");
  const std::size_t n_sections =
      (bundle.tensor ? 1 : 0) + bundle.acoustic.size();
  if (n_sections > 0xFF)
    throw DataError("bundle has more than 255 sections");

  ByteWriter w;
  w.Bytes(std::string_view(kBundleMagic, 4));
  w.U16(kBundleVersion);
  w.U16(static_cast<std::uint16_t>(bundle.subject_id.size()));
  w.Bytes(bundle.subject_id);
  w.U8(static_cast<std::uint8_t>(n_sections));

  if (bundle.tensor) {
    const TokenLayerTensor &t = *bundle.tensor;
    if (t.n_layers == 0 || t.dim == 0)
      throw DataError("tensor has zero layers or zero width");
    w.U8(kKindTensor);
    w.U32(static_cast<std::uint32_t>(t.sentences.size()));
    w.U16(t.n_layers);
    w.U16(t.dim);
    const std::size_t stride = std::size_t{t.n_layers} * t.dim;
    for (std::size_t s = 0; s < t.sentences.size(); ++s) {
      const SentenceTensor &st = t.sentences[s];
      if (st.n_tokens == 0)
        throw DataError("sentence " + std::to_string(s) + " has no tokens");
      if (st.data.size() != stride * st.n_tokens)
        throw DataError("sentence " + std::to_string(s) + " holds " +
                        std::to_string(st.data.size()) + " values, expected " +
                        std::to_string(stride * st.n_tokens));
      CheckFinite(st.data, "tensor sentence " + std::to_string(s));
      w.U32(st.n_tokens);
      for (float v : st.data) w.F32(v);
    }
  }
  for (const auto &[name, values] : bundle.acoustic) {
    if (name.empty() || name.size() > 0xFFFF)
      throw DataError("acoustic vector tag must be 1..65535 bytes");
    if (values.empty())
      throw DataError("acoustic vector " + name + " is empty");
    CheckFinite(values, "acoustic vector " + name);
    w.U8(kKindVector);
    w.U16(static_cast<std::uint16_t>(name.size()));
    w.Bytes(name);
    w.U32(static_cast<std::uint32_t>(values.size()));
    for (float v : values) w.F32(v);
  }
  return w.Take();
}

EmbeddingBundle DecodeBundle(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::string magic = r.Str(4, "magic");
  if (magic != std::string_view(kBundleMagic, 4))
    throw FormatError("bad magic: not an ADEB bundle");
  const std::uint16_t version = r.U16("version");
  if (version != kBundleVersion)
    throw FormatError("unsupported bundle version " + std::to_string(version));

  EmbeddingBundle b;
  const std::uint16_t id_len = r.U16("subject id length");
  b.subject_id = r.Str(id_len, "subject id");
  if (b.subject_id.empty()) throw FormatError("bundle subject id is empty");
  const std::uint8_t n_sections = r.U8("section count");
  if (n_sections == 0) throw FormatError("bundle has no sections");

  for (int sec = 0; sec < n_sections; ++sec) {
    const std::uint8_t kind = r.U8("section kind");
    if (kind == kKindTensor) {
      if (b.tensor) throw FormatError("duplicate token-layer tensor section");
      TokenLayerTensor t;
      const std::uint32_t n_sentences = r.U32("tensor header");
      t.n_layers = r.U16("tensor header");
      t.dim = r.U16("tensor header");
      if (t.n_layers == 0 || t.dim == 0)
        throw FormatError("tensor has zero layers or zero width");
      const std::uint64_t stride = std::uint64_t{t.n_layers} * t.dim;
      for (std::uint32_t s = 0; s < n_sentences; ++s) {
        SentenceTensor st;
        st.n_tokens = r.U32("sentence header");
        if (st.n_tokens == 0)
          throw FormatError("sentence " + std::to_string(s) + " has no tokens");
        const std::uint64_t n_bytes = stride * st.n_tokens * 4;
        if (n_bytes > r.Remaining())
          throw TruncationError(
              "truncated payload in sentence " + std::to_string(s) +
                  ": expected " + std::to_string(n_bytes) + " bytes, got " +
                  std::to_string(r.Remaining()),
              n_bytes, r.Remaining());
        r.F32Run(stride * st.n_tokens, &st.data, "tensor payload");
        t.sentences.push_back(std::move(st));
      }
      b.tensor = std::move(t);
    } else if (kind == kKindVector) {
      const std::uint16_t name_len = r.U16("vector name length");
      std::string name = r.Str(name_len, "vector name");
      if (name.empty()) throw FormatError("acoustic vector with empty tag");
      if (b.acoustic.count(name))
        throw FormatError("duplicate acoustic vector section " + name);
      const std::uint32_t dim = r.U32("vector header");
      if (dim == 0) throw FormatError("acoustic vector " + name + " is empty");
      const std::uint64_t n_bytes = std::uint64_t{dim} * 4;
      if (n_bytes > r.Remaining())
        throw TruncationError("truncated payload in vector " + name +
                                  ": expected " + std::to_string(n_bytes) +
                                  " bytes, got " +
                                  std::to_string(r.Remaining()),
                              n_bytes, r.Remaining());
      std::vector<float> values;
      r.F32Run(dim, &values, "acoustic payload");
      b.acoustic.emplace(std::move(name), std::move(values));
    } else {
      throw FormatError("unknown section kind " + std::to_string(kind));
    }
  }
  if (r.Remaining() != 0)
    throw FormatError(std::to_string(r.Remaining()) +
                      " trailing bytes after the last section");
  return b;
}

void WriteBundle(const EmbeddingBundle &bundle,
                 const std::filesystem::path &path) {
  const std::vector<std::uint8_t> bytes = EncodeBundle(bundle);
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

EmbeddingBundle ReadBundle(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open bundle " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return DecodeBundle(bytes);
  } catch (const TruncationError &e) {
    throw TruncationError(path.string() + ": " + e.what(), e.expected(),
                          e.actual());
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const DataError &e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> BundleExpectations::ExpectedDim(
    const std::string &tag) const {
  if (auto it = acoustic_dims.find(tag); it != acoustic_dims.end())
    return it->second;
  if (tag.rfind("xvec", 0) == 0) return xvector_dim;
  if (tag.rfind("ivec", 0) == 0) return ivector_dim;
  return std::nullopt;
}

std::vector<std::string> ValidateBundle(const EmbeddingBundle &bundle,
                                        const BundleExpectations &expect,
                                        const Transcript *transcript) {
  std::vector<std::string> v;
  if (!expect.subject_id.empty() && bundle.subject_id != expect.subject_id)
    v.push_back("subject id: expected " + expect.subject_id + ", got " +
                bundle.subject_id);
  if (!bundle.tensor && bundle.acoustic.empty())
    v.push_back("bundle has neither a tensor nor acoustic vectors");

  for (const auto &[tag, values] : bundle.acoustic) {
    if (auto dim = expect.ExpectedDim(tag); dim && values.size() != *dim)
      v.push_back(tag + ": expected " + std::to_string(*dim) + ", got " +
                  std::to_string(values.size()));
    for (float x : values)
      if (!std::isfinite(x)) {
        v.push_back(tag + ": non-finite value");
        break;
      }
  }
  for (const std::string &tag : expect.required_tags)
    if (!bundle.acoustic.count(tag)) v.push_back(tag + ": missing");

  if (!bundle.tensor) {
    if (expect.require_tensor) v.push_back("tensor: missing");
    return v;
  }
  const TokenLayerTensor &t = *bundle.tensor;
  if (t.n_layers != expect.n_layers)
    v.push_back("tensor: expected " + std::to_string(expect.n_layers) +
                " layers, got " + std::to_string(t.n_layers));
  if (t.dim != expect.text_dim)
    v.push_back("tensor: expected dim " + std::to_string(expect.text_dim) +
                ", got " + std::to_string(t.dim));
  const std::size_t stride = std::size_t{t.n_layers} * t.dim;
  for (std::size_t s = 0; s < t.sentences.size(); ++s) {
    const SentenceTensor &st = t.sentences[s];
    if (st.n_tokens == 0)
      v.push_back("sentence " + std::to_string(s) + ": no tokens");
    if (st.data.size() != stride * st.n_tokens)
      v.push_back("sentence " + std::to_string(s) + ": payload holds " +
                  std::to_string(st.data.size()) + " values, expected " +
                  std::to_string(stride * st.n_tokens));
  }

  if (transcript) {
    std::vector<std::size_t> expected_counts;
    for (const Utterance *u : transcript->ParticipantUtterances())
      if (!u->tokens.empty()) expected_counts.push_back(u->tokens.size());
    if (expected_counts.size() != t.sentences.size()) {
      v.push_back("sentence count: tensor has " +
                  std::to_string(t.sentences.size()) + ", transcript has " +
                  std::to_string(expected_counts.size()));
    }
    const std::size_t n = std::min(expected_counts.size(), t.sentences.size());
    for (std::size_t s = 0; s < n; ++s) {
      if (t.sentences[s].n_tokens != expected_counts[s])
        v.push_back("token count in sentence " + std::to_string(s) +
                    ": tensor has " + std::to_string(t.sentences[s].n_tokens) +
                    ", transcript has " + std::to_string(expected_counts[s]));
    }
  }
  return v;
}

}  // namespace adfuse
