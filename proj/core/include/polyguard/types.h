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

#ifndef POLYGUARD_TYPES_H_
#define POLYGUARD_TYPES_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyguard {

// Lowercase language tag such as "en", "ar" or "zh-hans".
class LanguageCode {
 public:
  // Throws ValidationError unless `code` matches [a-z]{2}(-[a-z]{2,6})?.
  explicit LanguageCode(std::string code);

  static LanguageCode English() { return LanguageCode("en"); }
  static bool IsValid(std::string_view code);

  const std::string& str() const { return code_; }
  bool is_english() const { return code_ == "en"; }

  auto operator<=>(const LanguageCode&) const = default;

 private:
  std::string code_;
};

enum class SafetyLabel { kSafe, kUnsafe };

std::string_view ToString(SafetyLabel label);
// Accepts "safe"/"unsafe" in any ASCII case.
std::optional<SafetyLabel> ParseSafetyLabel(std::string_view text);

enum class ExampleSource { kSeed, kTranslated, kVariant, kAttack };

std::string_view ToString(ExampleSource source);
std::optional<ExampleSource> ParseExampleSource(std::string_view text);

struct LabeledExample {
  std::string id;
  LanguageCode lang = LanguageCode::English();
  std::string text;
  SafetyLabel label = SafetyLabel::kSafe;
  std::optional<std::string> reasoning_en;
  std::optional<std::string> reasoning_native;
  // Absent means "not yet scored", which is distinct from level 0.
  std::optional<int> difficulty;
  std::optional<std::string> parallel_id;
  ExampleSource source = ExampleSource::kSeed;

  bool operator==(const LabeledExample&) const = default;
};

// Checks the per-record invariants; throws ValidationError naming the field.
void ValidateExample(const LabeledExample& example);

using TokenId = std::int32_t;

// One sampled model output.
struct GenerationRecord {
  std::string prompt_id;
  std::vector<TokenId> tokens;
  std::vector<double> token_logprobs;
  std::string text;
  std::optional<SafetyLabel> verdict;
  std::string reasoning_text;

  double SequenceLogprob() const;
};

}  // namespace polyguard

#endif  // POLYGUARD_TYPES_H_
