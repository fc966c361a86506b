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

#include "polyguard/types.h"

#include <cctype>
#include <numeric>

#include "polyguard/error.h"

namespace polyguard {
namespace {

bool IsLower(char c) { return c >= 'a' && c <= 'z'; }

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

bool LanguageCode::IsValid(std::string_view code) {
  if (code.size() < 2 || !IsLower(code[0]) || !IsLower(code[1])) return false;
  if (code.size() == 2) return true;
  if (code[2] != '-') return false;
  const std::size_t tail = code.size() - 3;
  if (tail < 2 || tail > 6) return false;
  for (std::size_t i = 3; i < code.size(); ++i) {
    if (!IsLower(code[i])) return false;
  }
  return true;
}

LanguageCode::LanguageCode(std::string code) : code_(std::move(code)) {
  if (!IsValid(code_)) {
    throw ValidationError("lang", "invalid language code '" + code_ + "'");
  }
}

std::string_view ToString(SafetyLabel label) {
  return label == SafetyLabel::kUnsafe ? "unsafe" : "safe";
}

std::optional<SafetyLabel> ParseSafetyLabel(std::string_view text) {
  const std::string lowered = AsciiLower(text);
  if (lowered == "safe") return SafetyLabel::kSafe;
  if (lowered == "unsafe") return SafetyLabel::kUnsafe;
  return std::nullopt;
}

std::string_view ToString(ExampleSource source) {
  switch (source) {
    case ExampleSource::kSeed:
      return "seed";
    case ExampleSource::kTranslated:
      return "translated";
    case ExampleSource::kVariant:
      return "variant";
    case ExampleSource::kAttack:
      return "attack";
  }
  return "seed";
}

std::optional<ExampleSource> ParseExampleSource(std::string_view text) {
  if (text == "seed") return ExampleSource::kSeed;
  if (text == "translated") return ExampleSource::kTranslated;
  if (text == "variant") return ExampleSource::kVariant;
  if (text == "attack") return ExampleSource::kAttack;
  return std::nullopt;
}

void ValidateExample(const LabeledExample& example) {
  if (example.id.empty()) throw ValidationError("id", "must be non-empty");
  if (example.difficulty &&
      (*example.difficulty < 0 || *example.difficulty > 2)) {
    throw ValidationError("difficulty", "must be 0, 1 or 2 (record " +
                                            example.id + ")");
  }
  if (example.lang.is_english() && example.difficulty &&
      *example.difficulty != 0) {
    throw ValidationError("difficulty",
                          "English examples have difficulty 0 (record " +
                              example.id + ")");
  }
  const bool derived = example.source == ExampleSource::kTranslated ||
                       example.source == ExampleSource::kVariant;
  if (!example.lang.is_english() && derived &&
      (!example.parallel_id || example.parallel_id->empty())) {
    throw ValidationError("parallel_id",
                          "required for translated/variant records (record " +
                              example.id + ")");
  }
}

double GenerationRecord::SequenceLogprob() const {
  return std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0);
}

}  // namespace polyguard
