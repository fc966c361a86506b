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

#ifndef POLYGUARD_TOYWORLD_H_
#define POLYGUARD_TOYWORLD_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polyguard/clients.h"
#include "polyguard/dataset.h"
#include "polyguard/types.h"

namespace polyguard {

// A hermetic stand-in for the language services. English is a fixed small
// alphabet; every synthetic language is a disjoint pseudo-word alphabet in
// bijection with it, plus slang aliases that sit outside the bijection and
// translate to the placeholder word "unk".
struct ToyWorldOptions {
  std::uint64_t seed = 7;
  std::vector<LanguageCode> languages = {LanguageCode("ar"), LanguageCode("es"),
                                         LanguageCode("zh"), LanguageCode("ru")};
};

class ToyWorld {
 public:
  struct TokenInfo {
    std::size_t language;  // index into languages()
    std::size_t word;      // index into english_alphabet()
    bool slang;
  };

  explicit ToyWorld(ToyWorldOptions options = {});

  const ToyWorldOptions& options() const { return options_; }
  // Fixed ordering used for detection tie-breaks: English first, then the
  // target languages in configuration order.
  const std::vector<LanguageCode>& languages() const { return languages_; }
  std::optional<std::size_t> LanguageIndex(const LanguageCode& lang) const;

  const std::vector<std::string>& english_alphabet() const { return english_; }
  const std::vector<std::string>& fillers() const { return fillers_; }
  const std::vector<std::string>& safe_topics() const { return safe_topics_; }
  const std::vector<std::string>& unsafe_lexicon() const { return unsafe_; }
  std::size_t placeholder_index() const { return placeholder_; }
  bool IsUnsafeWord(std::size_t word) const;

  std::optional<TokenInfo> Lookup(std::string_view token) const;
  const std::string& Word(std::size_t language, std::size_t word) const;
  // Slang alias of `word` in a target language, if the word has one.
  std::optional<std::string> SlangAlias(std::size_t language,
                                        std::size_t word) const;
  std::optional<std::size_t> EnglishIndex(std::string_view english_word) const;

  // Every token of every alphabet, including slang, in a stable order.
  std::vector<std::string> Inventory() const;

 private:
  ToyWorldOptions options_;
  std::vector<LanguageCode> languages_;
  std::vector<std::string> english_;
  std::vector<std::string> fillers_;
  std::vector<std::string> safe_topics_;
  std::vector<std::string> unsafe_;
  std::vector<bool> unsafe_mask_;
  std::size_t placeholder_ = 0;
  // words_[language][word]
  std::vector<std::vector<std::string>> words_;
  // slang_[language][word], empty when absent
  std::vector<std::vector<std::string>> slang_;
  std::unordered_map<std::string, TokenInfo> lookup_;
};

std::vector<std::string> SplitTokens(std::string_view text);
std::string JoinTokens(const std::vector<std::string>& tokens);

// Token-by-token translation. Slang aliases become the target placeholder.
// Throws Error naming the token when a token is not in the source alphabet.
std::string ToyTranslate(std::string_view text, const LanguageCode& source,
                         const LanguageCode& target, const ToyWorld& world);

// Language whose alphabet (slang included) covers the most tokens; ties go to
// the earlier language in world.languages(). Throws on empty text.
LanguageCode ToyDetectLanguage(std::string_view text, const ToyWorld& world);

// Knobs for the deterministic toy backend.
struct ToyBackendOptions {
  // Deterministic, hash-based refusal and reassessment-flip rates.
  double refusal_rate = 0.0;
  double flip_rate = 0.0;
  // Test hooks; consulted in addition to the rates.
  std::function<bool(std::string_view op, std::string_view input)> refuse;
  std::function<bool(std::string_view prompt)> flip_reassessment;
  // Uncertainty mock: logistic(a * lexicon_overlap + b).
  double scorer_slope = 1.5;
  double scorer_bias = -0.5;
};

// All oracle-client interfaces backed by a ToyWorld. Pure and thread-safe.
class ToyBackend final : public GeneratorClient,
                         public BackTranslator,
                         public Embedder,
                         public LanguageDetector,
                         public UncertaintyScorer {
 public:
  explicit ToyBackend(ToyWorld world, ToyBackendOptions options = {});

  const ToyWorld& world() const { return world_; }

  Reply<std::string> Reason(std::string_view prompt, SafetyLabel label,
                            const LanguageCode& lang) const override;
  Reply<std::string> Translate(std::string_view prompt,
                               const LanguageCode& target) const override;
  Reply<SafetyLabel> Reassess(std::string_view prompt) const override;
  VariantPair MakeVariants(std::string_view prompt,
                           const LanguageCode& lang) const override;
  Reply<std::string> CodeSwitch(std::string_view en_text,
                                std::string_view other_text) const override;

  Reply<std::string> BackTranslate(std::string_view text,
                                   const LanguageCode& source) const override;

  std::size_t dimension() const override;
  // L2-normalized bag of tokens over the English alphabet. Tokens outside
  // the world are ignored; a text with no known token embeds to zeros.
  std::vector<double> Embed(std::string_view text) const override;

  LanguageCode Detect(std::string_view text) const override;

  double Score(std::string_view prompt,
               std::string_view reasoning) const override;

  // Ground truth of the toy moderation task: unsafe iff an unsafe lexicon
  // word occurs after mapping to English.
  SafetyLabel TrueLabel(std::string_view text) const;

 private:
  bool Refuses(std::string_view op, std::string_view input) const;

  ToyWorld world_;
  ToyBackendOptions options_;
};

ClientSet MakeToyClientSet(std::shared_ptr<const ToyBackend> backend);

// English seed prompts of the toy task: 3 or 4 distinct fillers followed by
// one topic word; about half the topics come from the unsafe lexicon.
Dataset MakeToyCorpus(const ToyWorld& world, std::size_t count,
                      std::uint64_t seed, std::string_view id_prefix = "toy");

// Safe filler questions in `lang` for sandwich attacks.
Dataset MakeToyBenignCorpus(const ToyWorld& world, const LanguageCode& lang,
                            std::size_t count, std::uint64_t seed);

}  // namespace polyguard

#endif  // POLYGUARD_TOYWORLD_H_
