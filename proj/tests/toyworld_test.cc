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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "polyguard/clients.h"
#include "polyguard/error.h"
#include "polyguard/toyworld.h"

namespace polyguard {
namespace {

const LanguageCode kEn = LanguageCode::English();
const LanguageCode kAr("ar");
const LanguageCode kEs("es");

class ToyWorldTest : public ::testing::Test {
 protected:
  ToyWorld world_;
  ToyBackend backend_{world_};

  std::string In(const LanguageCode& lang, const std::string& english) const {
    return ToyTranslate(english, kEn, lang, world_);
  }
  std::string Slang(const LanguageCode& lang, const std::string& word) const {
    return *world_.SlangAlias(*world_.LanguageIndex(lang),
                              *world_.EnglishIndex(word));
  }
};

TEST_F(ToyWorldTest, AlphabetsAreDisjoint) {
  std::set<std::string> all;
  std::size_t total = 0;
  for (const auto& token : world_.Inventory()) {
    all.insert(token);
    ++total;
  }
  EXPECT_EQ(all.size(), total);
  EXPECT_EQ(all.count("safe"), 0u);
  EXPECT_EQ(all.count("unsafe"), 0u);
  EXPECT_FALSE(world_.unsafe_lexicon().empty());
  EXPECT_EQ(world_.languages().front(), kEn);
}

TEST_F(ToyWorldTest, SameSeedSameWorld) {
  ToyWorld again;
  EXPECT_EQ(again.Inventory(), world_.Inventory());
  ToyWorld other(ToyWorldOptions{8, {kAr, kEs}});
  EXPECT_NE(other.Inventory(), world_.Inventory());
}

TEST_F(ToyWorldTest, RejectsBadLanguageLists) {
  EXPECT_THROW(ToyWorld(ToyWorldOptions{7, {kEn}}), Error);
  EXPECT_THROW(ToyWorld(ToyWorldOptions{7, {kAr, kAr}}), Error);
}

TEST_F(ToyWorldTest, MappedRoundTripIsIdentity) {
  const std::string en = "how to get some about bomb seeks harm";
  for (const auto& lang : world_.languages()) {
    const std::string there = In(lang, en);
    EXPECT_EQ(ToyTranslate(there, lang, kEn, world_), en);
    if (lang.is_english()) continue;
    EXPECT_EQ(ToyTranslate(ToyTranslate(there, lang, kEn, world_), kEn, lang,
                           world_),
              there);
  }
}

TEST_F(ToyWorldTest, SlangAliasLosesExactlyOneToken) {
  auto tokens = SplitTokens(In(kAr, "how to get find some about books bread"));
  ASSERT_EQ(tokens.size(), 8u);
  tokens[6] = Slang(kAr, "books");
  const std::string back = ToyTranslate(JoinTokens(tokens), kAr, kEn, world_);
  const auto back_tokens = SplitTokens(back);
  const auto original = SplitTokens("how to get find some about books bread");
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < 8; ++i) diffs += back_tokens[i] != original[i];
  EXPECT_EQ(diffs, 1u);
  EXPECT_EQ(back_tokens[6], "unk");
}

TEST_F(ToyWorldTest, EmptyTextTranslatesToEmpty) {
  EXPECT_EQ(ToyTranslate("", kAr, kEn, world_), "");
}

TEST_F(ToyWorldTest, UnknownTokenIsNamed) {
  try {
    ToyTranslate("how xyzzy", kEn, kAr, world_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("xyzzy"), std::string::npos);
  }
  EXPECT_THROW(ToyTranslate(In(kAr, "how"), kEs, kEn, world_), Error);
}

TEST_F(ToyWorldTest, DetectionMajorityAndTieBreak) {
  EXPECT_EQ(ToyDetectLanguage(In(kEs, "how to get bomb"), world_), kEs);
  EXPECT_EQ(ToyDetectLanguage(In(kAr, "how to get") + " bomb", world_), kAr);
  EXPECT_EQ(ToyDetectLanguage(In(kAr, "how to") + " get bomb", world_), kEn);
  EXPECT_EQ(
      ToyDetectLanguage(In(kAr, "how to") + " " + In(kEs, "get bomb"), world_),
      kAr);
  EXPECT_THROW(ToyDetectLanguage("   ", world_), Error);
  EXPECT_EQ(ToyDetectLanguage(Slang(kEs, "bomb"), world_), kEs);
}

TEST_F(ToyWorldTest, EmbeddingIsNormalizedBagOfTokens) {
  const std::string en = "how to get bomb";
  const auto e = backend_.Embed(en);
  ASSERT_EQ(e.size(), backend_.dimension());
  EXPECT_EQ(e.size(), world_.english_alphabet().size());
  double norm = 0.0;
  for (double x : e) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(e[*world_.EnglishIndex("bomb")], 0.5);
  EXPECT_EQ(CosineSimilarity(e, e), 1.0);
  const auto back = backend_.BackTranslate(In(kAr, en), kAr);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(CosineSimilarity(backend_.Embed(back.value()), e), 1.0);
}

TEST_F(ToyWorldTest, TextWithUnknownTokensOnlyEmbedsToZero) {
  for (double x : backend_.Embed("zzz qqq")) EXPECT_EQ(x, 0.0);
}

TEST_F(ToyWorldTest, ScorerIsLogisticOfLexiconOverlap) {
  const double a = 1.5, b = -0.5;
  auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  EXPECT_DOUBLE_EQ(backend_.Score("how to bread", ""), logistic(b));
  EXPECT_DOUBLE_EQ(backend_.Score("how to bomb", "seeks harm"),
                   logistic(a + b));
  EXPECT_DOUBLE_EQ(backend_.Score("bomb poison", ""), logistic(2 * a + b));
  EXPECT_DOUBLE_EQ(backend_.Score(In(kAr, "get bomb"), "bomb"),
                   logistic(a + b));
  for (const auto& text : {"", "bomb poison malware weapon drugs"}) {
    const double s = backend_.Score(text, text);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST_F(ToyWorldTest, TrueLabelFollowsLexicon) {
  EXPECT_EQ(backend_.TrueLabel(In(kAr, "how to get poison")),
            SafetyLabel::kUnsafe);
  EXPECT_EQ(backend_.TrueLabel(In(kAr, "how to get music")),
            SafetyLabel::kSafe);
  EXPECT_EQ(
      backend_.TrueLabel(In(kAr, "how to get") + " " + Slang(kAr, "poison")),
      SafetyLabel::kSafe);
}

TEST_F(ToyWorldTest, ReasoningAndTranslationTargetTheRequestedLanguage) {
  const auto r = backend_.Reason("how bomb", SafetyLabel::kUnsafe, kEs);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(backend_.Detect(r.value()), kEs);
  EXPECT_EQ(ToyTranslate(r.value(), kEs, kEn, world_), "seeks harm");
  const auto t = backend_.Translate("how to get bread", kAr);
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(t.value(), In(kAr, "how to get bread"));
  EXPECT_FALSE(backend_.Translate("how", LanguageCode("fr")).ok());
}

TEST_F(ToyWorldTest, BackTranslationIsEnglishUnderOwnDetector) {
  const auto back = backend_.BackTranslate(In(kEs, "find some river"), kEs);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(backend_.Detect(back.value()), kEn);
}

TEST_F(ToyWorldTest, VariantsSwapTopicThenFillers) {
  const std::string ar = In(kAr, "how to get find bomb");
  const auto pair = backend_.MakeVariants(ar, kAr);
  ASSERT_TRUE(pair.first.ok());
  ASSERT_TRUE(pair.second.ok());
  const auto base = SplitTokens(ar);
  const auto v1 = SplitTokens(pair.first.value());
  const auto v2 = SplitTokens(pair.second.value());
  EXPECT_EQ(v1.back(), Slang(kAr, "bomb"));
  EXPECT_EQ(std::equal(base.begin(), base.end() - 1, v1.begin()), true);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < base.size(); ++i) changed += base[i] != v2[i];
  EXPECT_EQ(changed, 3u);
  EXPECT_EQ(v2.back(), Slang(kAr, "bomb"));
  EXPECT_FALSE(backend_.MakeVariants("how bomb", kEn).first.ok());
}

TEST_F(ToyWorldTest, CodeSwitchInterleavesBothLanguages) {
  const auto mixed = backend_.CodeSwitch("how to bomb", In(kAr, "how to bomb"));
  ASSERT_TRUE(mixed.ok());
  const auto tokens = SplitTokens(mixed.value());
  ASSERT_EQ(tokens.size(), 6u);
  EXPECT_EQ(world_.Lookup(tokens[0])->language, 0u);
  EXPECT_EQ(world_.Lookup(tokens[1])->language, 1u);
}

TEST_F(ToyWorldTest, RefusalsAreTypedAndDeterministic) {
  ToyBackendOptions options;
  options.refusal_rate = 0.5;
  ToyBackend flaky(world_, options);
  std::size_t refused = 0;
  const Dataset corpus = MakeToyCorpus(world_, 200, 1);
  for (const auto& e : corpus) {
    const auto first = flaky.Translate(e.text, kAr);
    const auto second = flaky.Translate(e.text, kAr);
    ASSERT_EQ(first.ok(), second.ok());
    if (!first.ok()) {
      ++refused;
      EXPECT_FALSE(first.refusal().reason.empty());
    }
  }
  EXPECT_GT(refused, 60u);
  EXPECT_LT(refused, 140u);
  ToyBackendOptions hooked;
  hooked.refuse = [](std::string_view op, std::string_view) {
    return op == "reassess";
  };
  ToyBackend picky(world_, hooked);
  EXPECT_FALSE(picky.Reassess("how bomb").ok());
  EXPECT_TRUE(picky.Translate("how bomb", kAr).ok());
}

TEST_F(ToyWorldTest, CorpusIsDeterministicAndLabeledByLexicon) {
  const Dataset a = MakeToyCorpus(world_, 300, 5);
  EXPECT_EQ(a, MakeToyCorpus(world_, 300, 5));
  EXPECT_NE(a, MakeToyCorpus(world_, 300, 6));
  std::size_t unsafe = 0;
  for (const auto& e : a) {
    EXPECT_EQ(e.label, backend_.TrueLabel(e.text)) << e.text;
    unsafe += e.label == SafetyLabel::kUnsafe;
    const auto n = SplitTokens(e.text).size();
    EXPECT_TRUE(n == 4 || n == 5);
  }
  EXPECT_GT(unsafe, 100u);
  EXPECT_LT(unsafe, 200u);
}

TEST_F(ToyWorldTest, BenignCorpusIsSafeAndInLanguage) {
  const Dataset benign = MakeToyBenignCorpus(world_, kEs, 20, 3);
  ASSERT_EQ(benign.size(), 20u);
  for (const auto& e : benign) {
    EXPECT_EQ(e.label, SafetyLabel::kSafe);
    EXPECT_EQ(backend_.TrueLabel(e.text), SafetyLabel::kSafe);
    EXPECT_EQ(backend_.Detect(e.text), kEs);
  }
  EXPECT_THROW(MakeToyBenignCorpus(world_, LanguageCode("fr"), 1, 1), Error);
}

TEST_F(ToyWorldTest, ClientSetSharesTheBackend) {
  auto shared = std::make_shared<const ToyBackend>(world_);
  const ClientSet clients = MakeToyClientSet(shared);
  EXPECT_EQ(clients.detector->Detect("how"), kEn);
  EXPECT_EQ(clients.embedder->dimension(), shared->dimension());
}

}  // namespace
}  // namespace polyguard
