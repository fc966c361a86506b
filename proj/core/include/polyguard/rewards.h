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

#ifndef POLYGUARD_REWARDS_H_
#define POLYGUARD_REWARDS_H_

#include <optional>
#include <string_view>

#include "polyguard/clients.h"
#include "polyguard/types.h"

namespace polyguard {

enum class LanguageRewardMode { kOff, kFixed, kCurriculum };

std::string_view ToString(LanguageRewardMode mode);
std::optional<LanguageRewardMode> ParseLanguageRewardMode(std::string_view text);

// Format and correctness rewards are always on.
struct RewardConfig {
  bool enable_uncertainty = true;
  LanguageRewardMode language_mode = LanguageRewardMode::kCurriculum;
  double language_fixed_value = 0.5;
  // When false the language reward keys on difficulty alone, without checking
  // that the reasoning is written in the prompt language.
  bool language_requires_match = true;
};

void ValidateRewardConfig(const RewardConfig& config);

struct RewardBreakdown {
  double r_format = 0.0;
  double r_correct = 0.0;
  double r_uncertainty = 0.0;
  double r_language = 0.0;
  double total = 0.0;
};

// 1 when a verdict parsed, -1 otherwise.
double FormatReward(const GenerationRecord& record);
// 1 when the verdict equals `gold`; -1 when it differs or is absent.
double CorrectnessReward(const GenerationRecord& record, SafetyLabel gold);
// +s for a correct verdict, -s otherwise, where s = scorer(prompt, reasoning).
// 0 when disabled. Scorer failures propagate.
double UncertaintyReward(const LabeledExample& prompt,
                         const GenerationRecord& record,
                         const UncertaintyScorer& scorer,
                         const RewardConfig& config);
double LanguageReward(const LabeledExample& prompt,
                      const GenerationRecord& record,
                      const LanguageDetector& detector,
                      const RewardConfig& config);
RewardBreakdown TotalReward(double r_format, double r_correct,
                            double r_uncertainty, double r_language);

// Bundles the configuration with the scorer and detector.
class RewardEngine {
 public:
  RewardEngine(RewardConfig config, const UncertaintyScorer& scorer,
               const LanguageDetector& detector);

  const RewardConfig& config() const { return config_; }
  RewardBreakdown Evaluate(const LabeledExample& prompt,
                           const GenerationRecord& record) const;

 private:
  RewardConfig config_;
  const UncertaintyScorer& scorer_;
  const LanguageDetector& detector_;
};

}  // namespace polyguard

#endif  // POLYGUARD_REWARDS_H_
