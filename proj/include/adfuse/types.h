// include/adfuse/types.h

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

#ifndef ADFUSE_TYPES_H_
#define ADFUSE_TYPES_H_

#include <string>
#include <string_view>

namespace adfuse {

// AD is the positive class everywhere; the numeric value is the SVM target.
enum class Label : int { kControl = -1, kUnknown = 0, kAD = 1 };

enum class Gender { kMale, kFemale };

enum class Partition { kTrain, kDev, kTest };

inline int ToSign(Label l) { return static_cast<int>(l); }

std::string ToString(Label l);
std::string ToString(Gender g);
std::string ToString(Partition p);

/// Accepts "AD"/"ad"/"1", "control"/"cc"/"0"/"-1", "unknown"/"".
Label ParseLabel(std::string_view s);
/// Accepts "M"/"male", "F"/"female" (case-insensitive).
Gender ParseGender(std::string_view s);
Partition ParsePartition(std::string_view s);

}  // namespace adfuse

#endif  // ADFUSE_TYPES_H_
