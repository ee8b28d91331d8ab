// src/chat_normalizer.cc

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

#include "adfuse/chat_normalizer.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "adfuse/error.h"

namespace adfuse {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool IsAsciiAlnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && IsSpace(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !IsSpace(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Bracket codes we know how to discard.  Anything else is still deleted but
// counted as unknown.
bool IsKnownBracketCode(std::string_view content) {
  content = Trim(content);
  if (content.empty()) return false;
  static constexpr std::string_view kLeading = "/*+=:!?<>%-^#";
  if (kLeading.find(content.front()) != std::string_view::npos) return true;
  if (content == "e") return true;
  if (content.size() >= 2 && content[0] == 'x' && IsSpace(content[1]))
    return true;
  return false;
}

// Rule 1.  Each group is replaced by a space so attached words split apart.
std::string DeleteSquareGroups(std::string_view s, std::size_t *unknown) {
  std::string out;
  out.reserve(s.size());
  int depth = 0;
  std::string content;
  for (char c : s) {
    if (c == '[') {
      if (depth == 0) content.clear();
      ++depth;
      continue;
    }
    if (c == ']') {
      if (depth == 0)
        throw NormalizationError("unbalanced ']' without matching '['");
      if (--depth == 0) {
        if (!IsKnownBracketCode(content)) ++*unknown;
        out.push_back(' ');
      }
      continue;
    }
    if (depth > 0)
      content.push_back(c);
    else
      out.push_back(c);
  }
  if (depth != 0) throw NormalizationError("unbalanced '[' is never closed");
  return out;
}

std::string DeleteBullets(std::string_view s) {
  std::string out;
  bool inside = false;
  for (char c : s) {
    if (c == '\x15') {
      inside = !inside;
      out.push_back(' ');
      continue;
    }
    if (!inside) out.push_back(c);
  }
  // A lone bullet byte is dropped together with whatever follows it on the
  // tier; CHAT bullets always come in pairs.
  return out;
}

// Linkers and terminators made of '+' plus punctuation ("+...", "+<", "+//.").
bool IsLinkerOrTerminator(const std::string &tok) {
  if (tok.empty() || tok.front() != '+') return false;
  return std::none_of(tok.begin(), tok.end(), IsAsciiAlnum);
}

// Rule 2.  Leading '<' and trailing '>' are kept so rule 3 can still check
// the retrace balance.
void DeleteFillers(std::string *tok) {
  std::size_t b = 0;
  while (b < tok->size() && (*tok)[b] == '<') ++b;
  if (b < tok->size() && (*tok)[b] == '&') {
    std::size_t e = tok->size();
    while (e > b && (*tok)[e - 1] == '>') --e;
    tok->erase(b, e - b);
  }
}

bool IsPauseToken(const std::string &tok) {
  if (tok.size() < 3 || tok.front() != '(' || tok.back() != ')') return false;
  bool any = false;
  for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
    const char c = tok[i];
    if (c == '.' || c == ':' || std::isdigit(static_cast<unsigned char>(c)))
      any = true;
    else
      return false;
  }
  return any;
}

// UTF-8 sequences CHAT uses as punctuation or prosody marks.
constexpr std::array<std::string_view, 16> kUnicodeMarks = {
    "\xE2\x80\x9E",  // „
    "\xE2\x80\xA1",  // ‡
    "\xE2\x80\x9C",  // “
    "\xE2\x80\x9D",  // ”
    "\xE2\x80\x98",  // ‘
    "\xE2\x80\xA6",  // …
    "\xE2\x80\x93",  // en dash
    "\xE2\x80\x94",  // em dash
    "\xE2\x86\x91",  // ↑
    "\xE2\x86\x93",  // ↓
    "\xE2\x89\x88",  // ≈
    "\xE2\x89\x8B",  // ≋
    "\xE2\x8C\x88",  // ⌈
    "\xE2\x8C\x89",  // ⌉
    "\xE2\x8C\x8A",  // ⌊
    "\xE2\x8C\x8B",  // ⌋
};

constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";  // ’
constexpr std::string_view kPlainPunct = ".,;:!?\"'+/";

// Rule 7.  Keeps ASCII letters and digits, apostrophes, inner hyphens and
// non-ASCII bytes that are not known marks.  Returns true when a symbol
// outside the ordinary punctuation set was removed.
bool StripPunctuation(std::string *tok) {
  std::string out;
  out.reserve(tok->size());
  bool odd = false;
  const std::string_view s(*tok);
  for (std::size_t i = 0; i < s.size();) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c >= 0x80) {
      if (s.substr(i, 3) == kRightSingleQuote) {
        out.push_back('\'');
        i += 3;
        continue;
      }
      bool mark = false;
      for (std::string_view m : kUnicodeMarks) {
        if (s.substr(i, m.size()) == m) {
          i += m.size();
          mark = true;
          break;
        }
      }
      if (mark) continue;
      if (s.substr(i, 2) == "\xC2\xB0") {  // °
        i += 2;
        continue;
      }
      out.push_back(s[i++]);
      continue;
    }
    const char ch = s[i++];
    if (IsAsciiAlnum(ch) || ch == '\'' || ch == '-') {
      out.push_back(ch);
      continue;
    }
    if (kPlainPunct.find(ch) == std::string_view::npos) odd = true;
  }
  std::size_t b = 0, e = out.size();
  while (b < e && out[b] == '-') ++b;
  while (e > b && out[e - 1] == '-') --e;
  out = out.substr(b, e - b);
  if (std::all_of(out.begin(), out.end(), [](char c) { return c == '\''; }))
    out.clear();
  *tok = std::move(out);
  return odd;
}

void LowercaseAscii(std::string *tok) {
  for (char &c : *tok)
    if (static_cast<unsigned char>(c) < 0x80)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool IsUnintelligibleOrOmitted(const std::string &tok) {
  std::string low = tok;
  LowercaseAscii(&low);
  if (low == "xxx" || low == "yyy" || low == "www") return true;
  return low.size() >= 2 && low[0] == '0' &&
         std::isalpha(static_cast<unsigned char>(low[1]));
}

}  // namespace

std::string ToString(Speaker s) {
  return s == Speaker::kParticipant ? "participant" : "investigator";
}

Speaker ParseSpeaker(std::string_view s) {
  if (s == "participant") return Speaker::kParticipant;
  if (s == "investigator") return Speaker::kInvestigator;
  throw DataError("unrecognized speaker role '" + std::string(s) + "'");
}

NormalizedUtterance NormalizeUtteranceDetailed(std::string_view raw) {
  NormalizedUtterance result;
  const std::string no_bullets = DeleteBullets(raw);
  const std::string no_groups =
      DeleteSquareGroups(no_bullets, &result.unknown_codes);

  std::vector<std::string> tokens = SplitWhitespace(no_groups);
  std::erase_if(tokens, IsLinkerOrTerminator);

  for (std::string &tok : tokens) DeleteFillers(&tok);

  // Rule 3 balance is checked across the whole tier.
  int depth = 0;
  for (std::string &tok : tokens) {
    std::string kept;
    for (char c : tok) {
      if (c == '<') {
        ++depth;
      } else if (c == '>') {
        if (depth == 0)
          throw NormalizationError("unbalanced '>' without matching '<'");
        --depth;
      } else {
        kept.push_back(c);
      }
    }
    tok = std::move(kept);
  }
  if (depth != 0) throw NormalizationError("unbalanced '<' is never closed");

  std::vector<std::string> out;
  for (std::string &tok : tokens) {
    if (tok.empty() || IsPauseToken(tok)) continue;
    std::string word;
    int paren = 0;
    for (char c : tok) {
      if (c == '(') {
        if (paren++ > 0)
          throw NormalizationError("nested '(' in word '" + tok + "'");
      } else if (c == ')') {
        if (paren-- == 0)
          throw NormalizationError("unbalanced ')' in word '" + tok + "'");
      } else {
        word.push_back(c);
      }
    }
    if (paren != 0)
      throw NormalizationError("unbalanced '(' in word '" + tok + "'");

    if (const auto at = word.find('@'); at != std::string::npos)
      word.erase(at);
    if (StripPunctuation(&word)) ++result.unknown_codes;
    if (word.empty() || IsUnintelligibleOrOmitted(word)) continue;
    LowercaseAscii(&word);
    out.push_back(std::move(word));
  }
  result.tokens = std::move(out);
  return result;
}

Transcript ParseTranscript(std::string_view text,
                           const std::string &subject_id) {
  if (subject_id.empty()) throw DataError("transcript subject id is empty");
  if (Trim(text).empty())
    throw ParseError("empty input for subject " + subject_id, 0);

  Transcript t;
  t.subject_id = subject_id;
  bool in_utterance = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    // UTF-8 byte order mark on the first line.
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF")
      line.remove_prefix(3);

    if (Trim(line).empty()) {
      in_utterance = false;
      if (end == text.size()) break;
      continue;
    }
    const char first = line.front();
    if (first == '\t' || first == ' ') {
      if (in_utterance) {
        Utterance &u = t.utterances.back();
        u.raw += ' ';
        u.raw += Trim(line);
      }
    } else if (first == '@' || first == '%') {
      in_utterance = false;
    } else if (first == '*') {
      std::size_t i = 1;
      while (i < line.size() && IsAsciiAlnum(line[i])) ++i;
      if (i == 1 || i >= line.size() || line[i] != ':' ||
          (i + 1 < line.size() && !IsSpace(line[i + 1]))) {
        throw ParseError(subject_id + ":" + std::to_string(line_no) +
                             ": malformed speaker marker in '" +
                             std::string(line) + "'",
                         line_no);
      }
      Utterance u;
      u.code = std::string(line.substr(1, i - 1));
      u.speaker =
          u.code == "PAR" ? Speaker::kParticipant : Speaker::kInvestigator;
      u.raw = std::string(Trim(line.substr(i + 1)));
      u.line = line_no;
      t.utterances.push_back(std::move(u));
      in_utterance = true;
    } else {
      throw ParseError(subject_id + ":" + std::to_string(line_no) +
                           ": line is not a header, tier or continuation",
                       line_no);
    }
    if (end == text.size()) break;
  }

  for (Utterance &u : t.utterances) {
    try {
      NormalizedUtterance n = NormalizeUtteranceDetailed(u.raw);
      u.tokens = std::move(n.tokens);
      t.unknown_codes += n.unknown_codes;
    } catch (const NormalizationError &e) {
      throw NormalizationError(subject_id + ":" + std::to_string(u.line) +
                               ": " + e.what() + " in utterance '" + u.raw +
                               "'");
    }
  }
  return t;
}

std::vector<const Utterance *> Transcript::ParticipantUtterances() const {
  std::vector<const Utterance *> out;
  for (const Utterance &u : utterances)
    if (u.speaker == Speaker::kParticipant) out.push_back(&u);
  return out;
}

std::size_t Transcript::ParticipantTokenCount() const {
  std::size_t n = 0;
  for (const Utterance *u : ParticipantUtterances()) n += u->tokens.size();
  return n;
}

CorpusStats ComputeCorpusStats(
    const std::vector<Transcript> &transcripts,
    const std::map<std::string, std::string> &partition_of) {
  CorpusStats stats;
  std::set<std::string> vocab;
  std::map<std::string, std::set<std::string>> part_vocab;
  for (const Transcript &t : transcripts) {
    auto it = partition_of.find(t.subject_id);
    if (it == partition_of.end())
      throw DataError("subject " + t.subject_id +
                      " is missing from the partition map");
    WordCounts &counts = stats.per_partition[it->second];
    std::set<std::string> &pv = part_vocab[it->second];
    for (const Utterance *u : t.ParticipantUtterances()) {
      for (const std::string &tok : u->tokens) {
        vocab.insert(tok);
        pv.insert(tok);
      }
      stats.total_words += u->tokens.size();
      counts.total += u->tokens.size();
    }
  }
  stats.unique_words = vocab.size();
  for (auto &[name, counts] : stats.per_partition)
    counts.unique = part_vocab[name].size();
  return stats;
}

nlohmann::json ToJson(const Transcript &t) {
  nlohmann::json utts = nlohmann::json::array();
  for (const Utterance &u : t.utterances) {
    utts.push_back({{"speaker", ToString(u.speaker)},
                    {"code", u.code},
                    {"line", u.line},
                    {"raw", u.raw},
                    {"tokens", u.tokens}});
  }
  return {{"subject_id", t.subject_id},
          {"unknown_codes", t.unknown_codes},
          {"utterances", std::move(utts)}};
}

Transcript TranscriptFromJson(const nlohmann::json &j) {
  Transcript t;
  t.subject_id = j.at("subject_id").get<std::string>();
  if (t.subject_id.empty()) throw DataError("transcript subject id is empty");
  t.unknown_codes = j.value("unknown_codes", std::size_t{0});
  for (const auto &ju : j.at("utterances")) {
    Utterance u;
    u.speaker = ParseSpeaker(ju.at("speaker").get<std::string>());
    u.code = ju.value("code", std::string(u.speaker == Speaker::kParticipant
                                              ? "PAR"
                                              : "INV"));
    u.line = ju.value("line", std::size_t{0});
    u.raw = ju.at("raw").get<std::string>();
    u.tokens = ju.at("tokens").get<std::vector<std::string>>();
    t.utterances.push_back(std::move(u));
  }
  return t;
}

nlohmann::json ToJson(const CorpusStats &s) {
  nlohmann::json parts = nlohmann::json::object();
  for (const auto &[name, c] : s.per_partition)
    parts[name] = {{"total", c.total}, {"unique", c.unique}};
  return {{"total_words", s.total_words},
          {"unique_words", s.unique_words},
          {"per_partition", std::move(parts)}};
}

}  // namespace adfuse
