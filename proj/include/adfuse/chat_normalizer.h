// include/adfuse/chat_normalizer.h

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

#ifndef ADFUSE_CHAT_NORMALIZER_H_
#define ADFUSE_CHAT_NORMALIZER_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace adfuse {

enum class Speaker { kParticipant, kInvestigator };

std::string ToString(Speaker s);
Speaker ParseSpeaker(std::string_view s);

struct Utterance {
  Speaker speaker = Speaker::kParticipant;
  std::string code;  // speaker code as written, e.g. "PAR"
  std::string raw;   // tier body with continuation lines joined
  std::vector<std::string> tokens;
  std::size_t line = 0;  // 1-based line of the '*' tier, 0 if unknown
};

struct Transcript {
  std::string subject_id;
  std::vector<Utterance> utterances;
  // Annotation codes that were deleted without being recognized.
  std::size_t unknown_codes = 0;

  /// Participant utterances in file order, including those that normalize
  /// to zero tokens.
  std::vector<const Utterance *> ParticipantUtterances() const;
  std::size_t ParticipantTokenCount() const;
};

struct NormalizedUtterance {
  std::vector<std::string> tokens;
  std::size_t unknown_codes = 0;
};

/// Reduces one CHAT tier body to lowercase word tokens.  The stripping rules
/// run in a fixed order:
///   1. delete [...] groups ([//], [/], [+ exc], [: target], ...)
///   2. delete fillers and fragments (&-um, &+fr, &=laughs)
///   3. unwrap <...> retraces, keeping the inner words
///   4. delete pauses (.), (..), (...), (1.5); expand (be)cause -> because
///   5. cut word-form suffixes at '@' (cause@u -> cause)
///   6. delete unintelligible xxx / yyy / www and omitted words (0is)
///   7. delete punctuation, terminators and linkers (+..., +<, „)
///   8. lowercase
/// Timing bullets (\x15...\x15) are removed before rule 1.  Rule 6 looks at
/// the word with punctuation already removed so "xxx." is caught too.
/// Throws NormalizationError on unbalanced [], <> or ().
NormalizedUtterance NormalizeUtteranceDetailed(std::string_view raw);

inline std::vector<std::string> NormalizeUtterance(std::string_view raw) {
  return NormalizeUtteranceDetailed(raw).tokens;
}

/// Parses a .cha-style container: '@' headers and '%' dependent tiers are
/// dropped, each '*CODE:' tier becomes an Utterance, and lines starting with
/// a tab continue the previous tier.  PAR maps to the participant, every
/// other code to the investigator side.
/// Throws ParseError (empty input, malformed marker) and NormalizationError.
Transcript ParseTranscript(std::string_view text, const std::string &subject_id);

struct WordCounts {
  std::size_t total = 0;
  std::size_t unique = 0;
};

struct CorpusStats {
  std::size_t total_words = 0;
  std::size_t unique_words = 0;
  std::map<std::string, WordCounts> per_partition;
};

/// Counts participant tokens.  partition_of maps subject id to an arbitrary
/// partition key ("train-AD", "test", ...).  Throws DataError when a subject
/// is missing from the map.
CorpusStats ComputeCorpusStats(
    const std::vector<Transcript> &transcripts,
    const std::map<std::string, std::string> &partition_of);

nlohmann::json ToJson(const Transcript &t);
Transcript TranscriptFromJson(const nlohmann::json &j);
nlohmann::json ToJson(const CorpusStats &s);

}  // namespace adfuse

#endif  // ADFUSE_CHAT_NORMALIZER_H_
