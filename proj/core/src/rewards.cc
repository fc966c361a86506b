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

#include "polyguard/rewards.h"

#include <string>

#include "polyguard/error.h"

namespace polyguard {
namespace {

bool IsCorrect(const GenerationRecord& record, SafetyLabel gold) {
  return record.verdict.has_value() && *record.verdict == gold;
}

bool IsBlank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

std::string_view ToString(LanguageRewardMode mode) {
  switch (mode) {
    case LanguageRewardMode::kOff:
      return "off";
    case LanguageRewardMode::kFixed:
      return "fixed";
    case LanguageRewardMode::kCurriculum:
      return "curriculum";
  }
  return "off";
}

std::optional<LanguageRewardMode> ParseLanguageRewardMode(
    std::string_view text) {
  if (text == "off") return LanguageRewardMode::kOff;
  if (text == "fixed") return LanguageRewardMode::kFixed;
  if (text == "curriculum") return LanguageRewardMode::kCurriculum;
  return std::nullopt;
}

void ValidateRewardConfig(const RewardConfig& config) {
  if (!(config.language_fixed_value >= 0.0 &&
        config.language_fixed_value <= 1.0)) {
    throw ValidationError("rewards.language_fixed_value", "must be in [0, 1]");
  }
}

double FormatReward(const GenerationRecord& record) {
  return record.verdict ? 1.0 : -1.0;
}

double CorrectnessReward(const GenerationRecord& record, SafetyLabel gold) {
  return IsCorrect(record, gold) ? 1.0 : -1.0;
}

double UncertaintyReward(const LabeledExample& prompt,
                         const GenerationRecord& record,
                         const UncertaintyScorer& scorer,
                         const RewardConfig& config) {
  if (!config.enable_uncertainty) return 0.0;
  const double score = scorer.Score(prompt.text, record.reasoning_text);
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error("uncertainty scorer returned " + std::to_string(score) +
                ", outside [0, 1]");
  }
  return IsCorrect(record, prompt.label) ? score : -score;
}

double LanguageReward(const LabeledExample& prompt,
                      const GenerationRecord& record,
                      const LanguageDetector& detector,
                      const RewardConfig& config) {
  if (config.language_mode == LanguageRewardMode::kOff) return 0.0;
  if (prompt.lang.is_english()) return 0.0;
  if (config.language_requires_match) {
    if (IsBlank(record.reasoning_text)) return 0.0;
    if (detector.Detect(record.reasoning_text) != prompt.lang) return 0.0;
  }
  if (config.language_mode == LanguageRewardMode::kFixed) {
    return config.language_fixed_value;
  }
  if (!prompt.difficulty) {
    throw Error("language reward: prompt " + prompt.id +
                " has no difficulty in curriculum mode");
  }
  switch (*prompt.difficulty) {
    case 1:
      return 0.5;
    case 2:
      return 1.0;
    default:
      return 0.0;
  }
}

RewardBreakdown TotalReward(double r_format, double r_correct,
                            double r_uncertainty, double r_language) {
  return RewardBreakdown{r_format, r_correct, r_uncertainty, r_language,
                         r_format + r_correct + r_uncertainty + r_language};
}

RewardEngine::RewardEngine(RewardConfig config,
                           const UncertaintyScorer& scorer,
                           const LanguageDetector& detector)
    : config_(config), scorer_(scorer), detector_(detector) {
  ValidateRewardConfig(config_);
}

RewardBreakdown RewardEngine::Evaluate(const LabeledExample& prompt,
                                       const GenerationRecord& record) const {
  return TotalReward(FormatReward(record),
                     CorrectnessReward(record, prompt.label),
                     UncertaintyReward(prompt, record, scorer_, config_),
                     LanguageReward(prompt, record, detector_, config_));
}

}  // namespace polyguard
