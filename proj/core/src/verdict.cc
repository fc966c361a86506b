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

#include "polyguard/verdict.h"

#include <cctype>
#include <vector>

namespace polyguard {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

bool StartsWithKeyword(std::string_view line) {
  constexpr std::string_view kKeyword = "safety:";
  if (line.size() < kKeyword.size()) return false;
  for (std::size_t i = 0; i < kKeyword.size(); ++i) {
    const char c =
        static_cast<char>(std::tolower(static_cast<unsigned char>(line[i])));
    if (c != kKeyword[i]) return false;
  }
  return true;
}

std::optional<SafetyLabel> MatchMarkerLine(std::string_view line) {
  line = Trim(line);
  if (!StartsWithKeyword(line)) return std::nullopt;
  return ParseSafetyLabel(Trim(line.substr(7)));
}

}  // namespace

ParsedVerdict ParseVerdict(std::string_view text) {
  // Line start offsets, scanned from the end so the last marker wins.
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') starts.push_back(i + 1);
  }
  for (auto it = starts.rbegin(); it != starts.rend(); ++it) {
    const std::size_t begin = *it;
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    if (auto verdict = MatchMarkerLine(text.substr(begin, end - begin))) {
      std::string_view before = text.substr(0, begin);
      while (!before.empty() && IsSpace(before.back())) before.remove_suffix(1);
      return {verdict, std::string(before)};
    }
  }
  return {std::nullopt, std::string(text)};
}

std::string VerdictLine(SafetyLabel label) {
  return "Safety: " + std::string(ToString(label));
}

}  // namespace polyguard
