// Copyright 2026 The PolyGuard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POLYGUARD_VERDICT_H_
#define POLYGUARD_VERDICT_H_

#include <optional>
#include <string>
#include <string_view>

#include "polyguard/types.h"

namespace polyguard {

struct ParsedVerdict {
  std::optional<SafetyLabel> verdict;
  std::string reasoning_text;
};

// Finds the last line of the form `Safety: safe|unsafe` (keyword and value
// matched ASCII case-insensitively, surrounding whitespace ignored). The
// reasoning is everything before that line with trailing whitespace removed.
// Without a marker line the whole text is returned as reasoning.
ParsedVerdict ParseVerdict(std::string_view text);

// The line a well-formed generation ends with.
std::string VerdictLine(SafetyLabel label);

}  // namespace polyguard

#endif  // POLYGUARD_VERDICT_H_
