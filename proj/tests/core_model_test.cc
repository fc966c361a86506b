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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "polyguard/dataset.h"
#include "polyguard/error.h"
#include "polyguard/random.h"
#include "polyguard/types.h"
#include "polyguard/verdict.h"
#include "test_util.h"

namespace polyguard {
namespace {

using testing::Example;

TEST(LanguageCodeTest, AcceptsTagsAndRejectsTheRest) {
  EXPECT_TRUE(LanguageCode::IsValid("en"));
  EXPECT_TRUE(LanguageCode::IsValid("zh-hans"));
  EXPECT_FALSE(LanguageCode::IsValid(""));
  EXPECT_FALSE(LanguageCode::IsValid("EN"));
  EXPECT_FALSE(LanguageCode::IsValid("eng"));
  EXPECT_FALSE(LanguageCode::IsValid("zh-"));
  EXPECT_FALSE(LanguageCode::IsValid("zh-abcdefg"));
  EXPECT_THROW(LanguageCode("e1"), ValidationError);
  try {
    LanguageCode bad("x");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "lang");
  }
  EXPECT_TRUE(LanguageCode::English().is_english());
}

TEST(SafetyLabelTest, ParsesCaseInsensitively) {
  EXPECT_EQ(ParseSafetyLabel("UNSAFE"), SafetyLabel::kUnsafe);
  EXPECT_EQ(ParseSafetyLabel("Safe"), SafetyLabel::kSafe);
  EXPECT_FALSE(ParseSafetyLabel("unsure").has_value());
  EXPECT_EQ(ToString(SafetyLabel::kUnsafe), "unsafe");
}

TEST(ParseVerdictTest, MarkerAtEnd) {
  const auto parsed = ParseVerdict(
      "The prompt asks for weapon instructions.\nSafety: unsafe");
  EXPECT_EQ(parsed.verdict, SafetyLabel::kUnsafe);
  EXPECT_EQ(parsed.reasoning_text, "The prompt asks for weapon instructions.");
}

TEST(ParseVerdictTest, NoMarker) {
  const auto parsed = ParseVerdict("I think this is fine.");
  EXPECT_FALSE(parsed.verdict.has_value());
  EXPECT_EQ(parsed.reasoning_text, "I think this is fine.");
}

TEST(ParseVerdictTest, LastMarkerWinsCaseInsensitive) {
  const auto parsed = ParseVerdict("Safety: safe\nmore words\nSafety: UNSAFE");
  EXPECT_EQ(parsed.verdict, SafetyLabel::kUnsafe);
  EXPECT_EQ(parsed.reasoning_text, "Safety: safe\nmore words");
}

TEST(ParseVerdictTest, WhitespaceAndKeywordCase) {
  EXPECT_EQ(ParseVerdict("x\n  sAfEtY:   safe  \n").verdict, SafetyLabel::kSafe);
  EXPECT_FALSE(ParseVerdict("Safety: safe-ish").verdict.has_value());
  EXPECT_FALSE(ParseVerdict("Verdict Safety: safe").verdict.has_value());
  EXPECT_EQ(ParseVerdict("").reasoning_text, "");
}

TEST(ParseVerdictTest, ReparsingSingleMarkerReasoningFindsNoVerdict) {
  const std::vector<std::string> bodies = {
      "", "short", "two\nlines", "Safety is important", "safety: maybe"};
  for (const auto& body : bodies) {
    for (auto label : {SafetyLabel::kSafe, SafetyLabel::kUnsafe}) {
      const std::string text =
          body.empty() ? VerdictLine(label) : body + "\n" + VerdictLine(label);
      const auto parsed = ParseVerdict(text);
      ASSERT_EQ(parsed.verdict, label) << text;
      EXPECT_FALSE(ParseVerdict(parsed.reasoning_text).verdict.has_value());
      EXPECT_EQ(ParseVerdict(parsed.reasoning_text).reasoning_text,
                parsed.reasoning_text);
    }
  }
}

LabeledExample Translated(std::string id, std::string lang, std::string parent,
                          SafetyLabel label) {
  auto e = Example(std::move(id), std::move(lang), "t", label);
  e.parallel_id = std::move(parent);
  e.source = ExampleSource::kTranslated;
  return e;
}

TEST(ValidateExampleTest, RejectsMalformedRecordsNamingTheField) {
  auto expect_field = [](const LabeledExample& e, const std::string& field) {
    try {
      ValidateExample(e);
      FAIL() << "accepted " << e.id;
    } catch (const ValidationError& err) {
      EXPECT_EQ(err.field(), field);
    }
  };
  auto e = Example("a", "en", "x", SafetyLabel::kSafe);
  EXPECT_NO_THROW(ValidateExample(e));
  auto no_id = e;
  no_id.id.clear();
  expect_field(no_id, "id");
  auto bad_level = e;
  bad_level.lang = LanguageCode("ar");
  bad_level.difficulty = 3;
  expect_field(bad_level, "difficulty");
  auto english_hard = e;
  english_hard.difficulty = 1;
  expect_field(english_hard, "difficulty");
  auto orphan = Translated("b", "ar", "a", SafetyLabel::kSafe);
  orphan.parallel_id.reset();
  expect_field(orphan, "parallel_id");
  auto attack = orphan;
  attack.source = ExampleSource::kAttack;
  EXPECT_NO_THROW(ValidateExample(attack));
}

TEST(DatasetTest, IdsAreUnique) {
  Dataset d;
  d.Add(Example("a", "en", "x", SafetyLabel::kSafe));
  try {
    d.Add(Example("a", "en", "y", SafetyLabel::kSafe));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "id collision: a");
  }
  EXPECT_EQ(d.size(), 1u);
  EXPECT_TRUE(d.Contains("a"));
}

TEST(DatasetTest, ParallelIdsMustResolveToEnglish) {
  Dataset d;
  d.Add(Example("a", "en", "x", SafetyLabel::kSafe));
  d.Add(Translated("a-ar", "ar", "a", SafetyLabel::kSafe));
  EXPECT_NO_THROW(ValidateDataset(d));
  d.Add(Translated("b-ar", "ar", "missing", SafetyLabel::kSafe));
  EXPECT_THROW(ValidateDataset(d), ValidationError);
  Dataset e;
  e.Add(Example("a", "es", "x", SafetyLabel::kSafe));
  e.Add(Translated("a-ar", "ar", "a", SafetyLabel::kSafe));
  EXPECT_THROW(ValidateDataset(e), ValidationError);
}

TEST(DatasetTest, CountsPerLanguage) {
  Dataset d;
  d.Add(Example("a", "en", "x", SafetyLabel::kSafe));
  d.Add(Translated("a-ar", "ar", "a", SafetyLabel::kSafe));
  d.Add(Translated("a-es", "es", "a", SafetyLabel::kSafe));
  EXPECT_EQ(d.EnglishCount(), 1u);
  EXPECT_EQ(d.PerLanguageCounts().at("ar"), 1u);
}

Dataset RandomDataset(std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  const std::vector<std::string> langs = {"ar", "es", "zh-hans"};
  for (int i = 0; i < 20; ++i) {
    auto en = Example("s" + std::to_string(i), "en",
                      "text \"quoted\" \\ line\n" + std::to_string(rng.Below(99)),
                      rng.Below(2) ? SafetyLabel::kUnsafe : SafetyLabel::kSafe);
    if (rng.Below(2)) en.reasoning_en = "résumé 你好";
    if (rng.Below(2)) en.difficulty = 0;
    d.Add(en);
    auto tr = Translated(en.id + "-x", langs[rng.Below(3)], en.id, en.label);
    if (rng.Below(2)) tr.difficulty = static_cast<int>(rng.Below(3));
    if (rng.Below(2)) tr.reasoning_native = "مرحبا";
    if (rng.Below(2)) tr.source = ExampleSource::kVariant;
    d.Add(tr);
  }
  return d;
}

TEST(DatasetTest, SerializationRoundTripsByteForByte) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = RandomDataset(seed);
    std::ostringstream first;
    WriteDataset(d, first);
    std::istringstream in(first.str());
    const Dataset back = ReadDataset(in);
    EXPECT_EQ(back, d);
    std::ostringstream second;
    WriteDataset(back, second);
    EXPECT_EQ(first.str(), second.str());
  }
}

TEST(DatasetTest, CanonicalFieldOrderAndNulls) {
  auto e = Example("a", "en", "x", SafetyLabel::kSafe);
  EXPECT_EQ(SerializeExample(e),
            "{\"id\":\"a\",\"lang\":\"en\",\"text\":\"x\",\"label\":\"safe\","
            "\"reasoning_en\":null,\"reasoning_native\":null,"
            "\"difficulty\":null,\"parallel_id\":null,\"source\":\"seed\"}");
}

TEST(DatasetTest, ReadErrorsNameTheLine) {
  std::istringstream in(SerializeExample(Example("a", "en", "x",
                                                 SafetyLabel::kSafe)) +
                        "\n{\"id\":\"b\",\"lang\":\"en\",\"text\":\"y\","
                        "\"label\":\"maybe\"}\n");
  try {
    ReadDataset(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos)
        << e.what();
  }
}

TEST(DatasetTest, IngestAppliesToxicityFilter) {
  testing::ScratchDir dir("ingest");
  {
    std::ofstream out(dir / "corpus.jsonl");
    out << R"({"id":"a","lang":"en","text":"x","label":"unsafe","toxicity":1.5})"
        << "\n"
        << R"({"id":"b","lang":"en","text":"y","label":"safe","toxicity":1.0})"
        << "\n";
    std::ofstream bare(dir / "bare.jsonl");
    bare << R"({"id":"c","lang":"en","text":"z","label":"safe"})" << "\n";
  }
  EXPECT_EQ(IngestCorpusFile(dir / "corpus.jsonl", {}).size(), 2u);
  const Dataset filtered = IngestCorpusFile(dir / "corpus.jsonl", {1.0});
  ASSERT_EQ(filtered.size(), 1u);
  EXPECT_EQ(filtered.examples()[0].id, "a");
  EXPECT_EQ(IngestCorpusFile(dir / "bare.jsonl", {}).size(), 1u);
  EXPECT_THROW(IngestCorpusFile(dir / "bare.jsonl", {0.5}), ValidationError);
}

}  // namespace
}  // namespace polyguard
