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

#include <stdexcept>

#include <gtest/gtest.h>

#include "polyguard/error.h"
#include "polyguard/random.h"
#include "polyguard/rewards.h"
#include "polyguard/toyworld.h"
#include "polyguard/verdict.h"
#include "test_util.h"

namespace polyguard {
namespace {

class FixedScorer : public UncertaintyScorer {
 public:
  explicit FixedScorer(double s) : s_(s) {}
  double Score(std::string_view, std::string_view) const override {
    ++calls;
    return s_;
  }
  mutable int calls = 0;

 private:
  double s_;
};

class FailingScorer : public UncertaintyScorer {
 public:
  double Score(std::string_view, std::string_view) const override {
    throw Error("scorer down");
  }
};

// Reports a fixed language unless the text starts with "en:".
class PrefixDetector : public LanguageDetector {
 public:
  explicit PrefixDetector(std::string lang) : lang_(std::move(lang)) {}
  LanguageCode Detect(std::string_view text) const override {
    ++calls;
    if (text.substr(0, 3) == "en:") return LanguageCode::English();
    return LanguageCode(lang_);
  }
  mutable int calls = 0;

 private:
  std::string lang_;
};

GenerationRecord Record(std::optional<SafetyLabel> verdict,
                        std::string reasoning = "native words") {
  GenerationRecord r;
  r.verdict = verdict;
  r.reasoning_text = std::move(reasoning);
  r.text = r.reasoning_text;
  if (verdict) r.text += "\n" + VerdictLine(*verdict);
  return r;
}

LabeledExample Prompt(SafetyLabel gold, int difficulty, std::string lang = "ar") {
  auto e = testing::Example("p", lang, "q", gold);
  if (lang != "en") {
    e.parallel_id = "s";
    e.source = ExampleSource::kTranslated;
  }
  e.difficulty = difficulty;
  return e;
}

TEST(FormatRewardTest, Values) {
  EXPECT_EQ(FormatReward(Record(SafetyLabel::kUnsafe)), 1.0);
  EXPECT_EQ(FormatReward(Record(std::nullopt)), -1.0);
  EXPECT_EQ(FormatReward(Record(SafetyLabel::kSafe)), 1.0);
}

TEST(CorrectnessRewardTest, Values) {
  EXPECT_EQ(CorrectnessReward(Record(SafetyLabel::kUnsafe), SafetyLabel::kUnsafe),
            1.0);
  EXPECT_EQ(CorrectnessReward(Record(SafetyLabel::kSafe), SafetyLabel::kUnsafe),
            -1.0);
  EXPECT_EQ(CorrectnessReward(Record(std::nullopt), SafetyLabel::kSafe), -1.0);
}

TEST(UncertaintyRewardTest, SignedScore) {
  const FixedScorer scorer(0.8);
  const RewardConfig cfg;
  const auto gold = Prompt(SafetyLabel::kUnsafe, 1);
  EXPECT_EQ(UncertaintyReward(gold, Record(SafetyLabel::kUnsafe), scorer, cfg),
            0.8);
  EXPECT_EQ(UncertaintyReward(gold, Record(SafetyLabel::kSafe), scorer, cfg),
            -0.8);
  EXPECT_EQ(UncertaintyReward(gold, Record(std::nullopt), scorer, cfg), -0.8);
  RewardConfig off;
  off.enable_uncertainty = false;
  EXPECT_EQ(UncertaintyReward(gold, Record(SafetyLabel::kUnsafe), scorer, off),
            0.0);
}

TEST(UncertaintyRewardTest, ScorerFailurePropagates) {
  const FailingScorer scorer;
  EXPECT_THROW(UncertaintyReward(Prompt(SafetyLabel::kSafe, 0),
                                 Record(SafetyLabel::kSafe), scorer, {}),
               Error);
}

TEST(LanguageRewardTest, CurriculumValues) {
  const PrefixDetector det("ar");
  const RewardConfig cfg;
  const auto rec = Record(SafetyLabel::kSafe);
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 2), rec, det, cfg), 1.0);
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 1), rec, det, cfg), 0.5);
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 0), rec, det, cfg), 0.0);
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 2),
                           Record(SafetyLabel::kSafe, "en: words"), det, cfg),
            0.0);
}

TEST(LanguageRewardTest, ModesAndShortCircuits) {
  PrefixDetector det("ar");
  RewardConfig fixed;
  fixed.language_mode = LanguageRewardMode::kFixed;
  const auto rec = Record(SafetyLabel::kSafe);
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 0), rec, det, fixed), 0.5);
  RewardConfig off;
  off.language_mode = LanguageRewardMode::kOff;
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 2), rec, det, off), 0.0);
  det.calls = 0;
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 2),
                           Record(SafetyLabel::kSafe, "  "), det, {}),
            0.0);
  EXPECT_EQ(det.calls, 0);
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 0, "en"), rec, det, {}),
            0.0);
  RewardConfig loose;
  loose.language_requires_match = false;
  EXPECT_EQ(LanguageReward(Prompt(SafetyLabel::kSafe, 2),
                           Record(SafetyLabel::kSafe, "en: words"), det, loose),
            1.0);
  auto unscored = Prompt(SafetyLabel::kSafe, 0);
  unscored.difficulty.reset();
  EXPECT_THROW(LanguageReward(unscored, rec, det, {}), Error);
}

TEST(RewardConfigTest, FixedValueRange) {
  RewardConfig cfg;
  cfg.language_fixed_value = 1.5;
  EXPECT_THROW(ValidateRewardConfig(cfg), ValidationError);
  EXPECT_EQ(ParseLanguageRewardMode("curriculum"), LanguageRewardMode::kCurriculum);
  EXPECT_EQ(ParseLanguageRewardMode("fixed"), LanguageRewardMode::kFixed);
  EXPECT_FALSE(ParseLanguageRewardMode("on").has_value());
  EXPECT_EQ(ToString(LanguageRewardMode::kOff), "off");
}

TEST(TotalRewardTest, ExactSums) {
  EXPECT_NEAR(TotalReward(1, 1, 0.8, 1.0).total, 3.8, 1e-12);
  EXPECT_EQ(TotalReward(-1, -1, -1, 0).total, -3.0);
  EXPECT_EQ(TotalReward(1, 1, 1, 1).total, 4.0);
}

TEST(RewardEngineTest, FixtureTotal) {
  const FixedScorer scorer(0.8);
  const PrefixDetector det("ar");
  const RewardEngine engine({}, scorer, det);
  const auto b =
      engine.Evaluate(Prompt(SafetyLabel::kUnsafe, 2), Record(SafetyLabel::kUnsafe));
  EXPECT_EQ(b.r_format, 1.0);
  EXPECT_EQ(b.r_correct, 1.0);
  EXPECT_EQ(b.r_uncertainty, 0.8);
  EXPECT_EQ(b.r_language, 1.0);
  EXPECT_NEAR(b.total, 3.8, 1e-12);
}

TEST(RewardEngineTest, RandomGenerationsStayInRangeAndAgreeOnAbsence) {
  ToyWorld world;
  ToyBackend backend(world);
  const RewardEngine engine({}, backend, backend);
  Rng rng(17);
  const auto& alphabet = world.Inventory();
  for (int i = 0; i < 10000; ++i) {
    const int level = static_cast<int>(rng.Below(3));
    const auto gold = rng.Below(2) ? SafetyLabel::kUnsafe : SafetyLabel::kSafe;
    const std::string lang =
        world.languages()[rng.Below(world.languages().size())].str();
    auto prompt = Prompt(gold, lang == "en" ? 0 : level, lang);
    std::string text;
    const std::size_t n = rng.Below(6);
    for (std::size_t k = 0; k < n; ++k) {
      text += alphabet[rng.Below(alphabet.size())] + " ";
    }
    const std::uint64_t v = rng.Below(3);
    if (v == 1) text += "\nSafety: safe";
    if (v == 2) text += "\nSafety: unsafe";
    const auto parsed = ParseVerdict(text);
    GenerationRecord rec;
    rec.text = text;
    rec.verdict = parsed.verdict;
    rec.reasoning_text = parsed.reasoning_text;
    const auto b = engine.Evaluate(prompt, rec);
    ASSERT_GE(b.total, -3.0);
    ASSERT_LE(b.total, 4.0);
    ASSERT_EQ(b.total, b.r_format + b.r_correct + b.r_uncertainty + b.r_language);
    ASSERT_TRUE(b.r_language == 0.0 || b.r_language == 0.5 || b.r_language == 1.0);
    ASSERT_LE(std::abs(b.r_uncertainty), 1.0);
    if (!rec.verdict) {
      ASSERT_EQ(b.r_format, -1.0);
      ASSERT_EQ(b.r_correct, -1.0);
    }
    const auto again = engine.Evaluate(prompt, rec);
    ASSERT_EQ(again.total, b.total);
  }
}

TEST(RewardEngineTest, AblationTogglesTouchOnlyTheirComponent) {
  ToyWorld world;
  ToyBackend backend(world);
  RewardConfig full;
  RewardConfig no_u = full;
  no_u.enable_uncertainty = false;
  RewardConfig no_lang = full;
  no_lang.language_mode = LanguageRewardMode::kOff;
  RewardConfig fixed = full;
  fixed.language_mode = LanguageRewardMode::kFixed;
  const RewardEngine e_full(full, backend, backend);
  const RewardEngine e_no_u(no_u, backend, backend);
  const RewardEngine e_no_lang(no_lang, backend, backend);
  const RewardEngine e_fixed(fixed, backend, backend);
  const LanguageCode ar("ar");
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto gold = rng.Below(2) ? SafetyLabel::kUnsafe : SafetyLabel::kSafe;
    auto prompt = Prompt(gold, static_cast<int>(rng.Below(3)));
    prompt.text = ToyTranslate(rng.Below(2) ? "how bomb" : "how bread",
                               LanguageCode::English(), ar, world);
    const std::string reasoning =
        ToyTranslate(rng.Below(2) ? "seeks harm" : "seems benign",
                     LanguageCode::English(), rng.Below(2) ? ar : LanguageCode::English(),
                     world);
    const std::uint64_t v = rng.Below(3);
    const auto rec = Record(v == 0   ? std::nullopt
                            : v == 1 ? std::optional(SafetyLabel::kSafe)
                                     : std::optional(SafetyLabel::kUnsafe),
                            reasoning);
    const auto a = e_full.Evaluate(prompt, rec);
    const auto b = e_no_u.Evaluate(prompt, rec);
    EXPECT_EQ(a.r_format, b.r_format);
    EXPECT_EQ(a.r_correct, b.r_correct);
    EXPECT_EQ(a.r_language, b.r_language);
    EXPECT_EQ(b.r_uncertainty, 0.0);
    const auto c = e_no_lang.Evaluate(prompt, rec);
    EXPECT_EQ(a.r_format, c.r_format);
    EXPECT_EQ(a.r_correct, c.r_correct);
    EXPECT_EQ(a.r_uncertainty, c.r_uncertainty);
    EXPECT_EQ(c.r_language, 0.0);
    const auto d = e_fixed.Evaluate(prompt, rec);
    EXPECT_EQ(a.r_uncertainty, d.r_uncertainty);
    EXPECT_EQ(a.r_correct, d.r_correct);
  }
}

}  // namespace
}  // namespace polyguard
