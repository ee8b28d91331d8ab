// src/types.cc

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

#include "adfuse/types.h"

#include <algorithm>
#include <cctype>

#include "adfuse/error.h"

namespace adfuse {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string ToString(Label l) {
  switch (l) {
    case Label::kAD: return "AD";
    case Label::kControl: return "control";
    case Label::kUnknown: return "unknown";
  }
  return "unknown";
}

std::string ToString(Gender g) { return g == Gender::kMale ? "M" : "F"; }

std::string ToString(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kDev: return "dev";
    case Partition::kTest: return "test";
  }
  return "train";
}

Label ParseLabel(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "ad" || v == "1" || v == "+1") return Label::kAD;
  if (v == "control" || v == "cc" || v == "non-ad" || v == "0" || v == "-1")
    return Label::kControl;
  if (v == "unknown" || v.empty()) return Label::kUnknown;
  throw DataError("unrecognized label '" + std::string(s) + "'");
}

Gender ParseGender(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "m" || v == "male") return Gender::kMale;
  if (v == "f" || v == "female") return Gender::kFemale;
  throw DataError("unrecognized gender '" + std::string(s) + "'");
}

Partition ParsePartition(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "train") return Partition::kTrain;
  if (v == "dev") return Partition::kDev;
  if (v == "test") return Partition::kTest;
  throw DataError("unrecognized partition '" + std::string(s) + "'");
}

}  // namespace adfuse
