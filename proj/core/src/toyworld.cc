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

#include "polyguard/toyworld.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "polyguard/error.h"
#include "polyguard/random.h"

namespace polyguard {
namespace {

const std::vector<std::string> kFillers = {"how",  "to",   "get",
                                           "find", "some", "about"};
const std::vector<std::string> kSafeTopics = {"bread", "garden", "music",
                                              "river", "books"};
const std::vector<std::string> kUnsafeTopics = {"bomb", "poison", "malware",
                                                "weapon", "drugs"};
const std::vector<std::string> kReasoningWords = {"seeks", "harm", "seems",
                                                  "benign"};
constexpr const char* kPlaceholder = "unk";

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string PseudoWord(Rng& rng) {
  const std::size_t syllables = 2 + rng.Below(2);
  std::string word;
  for (std::size_t i = 0; i < syllables; ++i) {
    word.push_back(kConsonants[rng.Below(kConsonants.size())]);
    word.push_back(kVowels[rng.Below(kVowels.size())]);
  }
  return word;
}

std::string FreshWord(Rng& rng, std::unordered_set<std::string>& taken) {
  for (;;) {
    std::string word = PseudoWord(rng);
    if (taken.insert(word).second) return word;
  }
}

}  // namespace

ToyWorld::ToyWorld(ToyWorldOptions options) : options_(std::move(options)) {
  languages_.push_back(LanguageCode::English());
  for (const auto& lang : options_.languages) {
    if (lang.is_english()) throw Error("toyworld: English is implicit");
    if (std::find(languages_.begin(), languages_.end(), lang) !=
        languages_.end()) {
      throw Error("toyworld: duplicate language " + lang.str());
    }
    languages_.push_back(lang);
  }

  fillers_ = kFillers;
  safe_topics_ = kSafeTopics;
  unsafe_ = kUnsafeTopics;
  for (const auto* group : {&kFillers, &kSafeTopics, &kUnsafeTopics,
                            &kReasoningWords}) {
    english_.insert(english_.end(), group->begin(), group->end());
  }
  placeholder_ = english_.size();
  english_.emplace_back(kPlaceholder);
  unsafe_mask_.assign(english_.size(), false);
  for (const auto& word : unsafe_) unsafe_mask_[*EnglishIndex(word)] = true;

  // Words that can be swapped for slang: fillers and topics.
  const std::size_t slangable =
      kFillers.size() + kSafeTopics.size() + kUnsafeTopics.size();

  std::unordered_set<std::string> taken(english_.begin(), english_.end());
  // Keep pseudo-words clear of the verdict vocabulary.
  taken.insert({"safe", "unsafe", "Safety:"});
  Rng rng(DeriveSeed(options_.seed, "toyworld-alphabets"));
  words_.push_back(english_);
  slang_.emplace_back(english_.size());
  for (std::size_t l = 1; l < languages_.size(); ++l) {
    std::vector<std::string> alphabet;
    std::vector<std::string> slang(english_.size());
    for (std::size_t w = 0; w < english_.size(); ++w) {
      alphabet.push_back(FreshWord(rng, taken));
    }
    for (std::size_t w = 0; w < slangable; ++w) slang[w] = FreshWord(rng, taken);
    words_.push_back(std::move(alphabet));
    slang_.push_back(std::move(slang));
  }

  for (std::size_t l = 0; l < languages_.size(); ++l) {
    for (std::size_t w = 0; w < english_.size(); ++w) {
      lookup_.emplace(words_[l][w], TokenInfo{l, w, false});
      if (!slang_[l][w].empty()) {
        lookup_.emplace(slang_[l][w], TokenInfo{l, w, true});
      }
    }
  }
}

std::optional<std::size_t> ToyWorld::LanguageIndex(
    const LanguageCode& lang) const {
  auto it = std::find(languages_.begin(), languages_.end(), lang);
  if (it == languages_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - languages_.begin());
}

bool ToyWorld::IsUnsafeWord(std::size_t word) const {
  return word < unsafe_mask_.size() && unsafe_mask_[word];
}

std::optional<ToyWorld::TokenInfo> ToyWorld::Lookup(
    std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

const std::string& ToyWorld::Word(std::size_t language,
                                  std::size_t word) const {
  return words_.at(language).at(word);
}

std::optional<std::string> ToyWorld::SlangAlias(std::size_t language,
                                                std::size_t word) const {
  const std::string& alias = slang_.at(language).at(word);
  if (alias.empty()) return std::nullopt;
  return alias;
}

std::optional<std::size_t> ToyWorld::EnglishIndex(
    std::string_view english_word) const {
  auto it = std::find(english_.begin(), english_.end(), english_word);
  if (it == english_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - english_.begin());
}

std::vector<std::string> ToyWorld::Inventory() const {
  std::vector<std::string> tokens;
  for (std::size_t l = 0; l < languages_.size(); ++l) {
    tokens.insert(tokens.end(), words_[l].begin(), words_[l].end());
  }
  for (std::size_t l = 0; l < languages_.size(); ++l) {
    for (const auto& alias : slang_[l]) {
      if (!alias.empty()) tokens.push_back(alias);
    }
  }
  return tokens;
}

std::vector<std::string> SplitTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string ToyTranslate(std::string_view text, const LanguageCode& source,
                         const LanguageCode& target, const ToyWorld& world) {
  const auto src = world.LanguageIndex(source);
  const auto dst = world.LanguageIndex(target);
  if (!src) throw Error("toy_translate: unknown language " + source.str());
  if (!dst) throw Error("toy_translate: unknown language " + target.str());
  std::vector<std::string> out;
  for (const auto& token : SplitTokens(text)) {
    const auto info = world.Lookup(token);
    if (!info || info->language != *src) {
      throw Error("toy_translate: unknown token '" + token + "' for " +
                  source.str());
    }
    const std::size_t word = info->slang ? world.placeholder_index() : info->word;
    out.push_back(world.Word(*dst, word));
  }
  return JoinTokens(out);
}

LanguageCode ToyDetectLanguage(std::string_view text, const ToyWorld& world) {
  const auto tokens = SplitTokens(text);
  if (tokens.empty()) throw Error("toy_detect_language: empty text");
  std::vector<std::size_t> counts(world.languages().size(), 0);
  for (const auto& token : tokens) {
    if (auto info = world.Lookup(token)) ++counts[info->language];
  }
  // max_element returns the first maximum, which is the tie-break rule.
  const auto best = std::max_element(counts.begin(), counts.end());
  return world.languages()[static_cast<std::size_t>(best - counts.begin())];
}

ToyBackend::ToyBackend(ToyWorld world, ToyBackendOptions options)
    : world_(std::move(world)), options_(std::move(options)) {}

bool ToyBackend::Refuses(std::string_view op, std::string_view input) const {
  if (options_.refuse && options_.refuse(op, input)) return true;
  if (options_.refusal_rate <= 0.0) return false;
  const std::uint64_t h =
      DeriveSeed(world_.options().seed,
                 std::string("refuse|") + std::string(op) + "|" +
                     std::string(input));
  return static_cast<double>(h % 1000000) < options_.refusal_rate * 1e6;
}

Reply<std::string> ToyBackend::Reason(std::string_view prompt,
                                      SafetyLabel label,
                                      const LanguageCode& lang) const {
  if (Refuses("reason", std::string(prompt) + "|" + lang.str())) {
    return Refusal{"declined to explain"};
  }
  const std::string english =
      label == SafetyLabel::kUnsafe ? "seeks harm" : "seems benign";
  if (!world_.LanguageIndex(lang)) {
    return Refusal{"unsupported language " + lang.str()};
  }
  return ToyTranslate(english, LanguageCode::English(), lang, world_);
}

Reply<std::string> ToyBackend::Translate(std::string_view prompt,
                                         const LanguageCode& target) const {
  if (Refuses("translate", std::string(prompt) + "|" + target.str())) {
    return Refusal{"declined to translate"};
  }
  if (!world_.LanguageIndex(target)) {
    return Refusal{"unsupported language " + target.str()};
  }
  const LanguageCode source = ToyDetectLanguage(prompt, world_);
  return ToyTranslate(prompt, source, target, world_);
}

SafetyLabel ToyBackend::TrueLabel(std::string_view text) const {
  for (const auto& token : SplitTokens(text)) {
    const auto info = world_.Lookup(token);
    if (info && !info->slang && world_.IsUnsafeWord(info->word)) {
      return SafetyLabel::kUnsafe;
    }
  }
  return SafetyLabel::kSafe;
}

Reply<SafetyLabel> ToyBackend::Reassess(std::string_view prompt) const {
  if (Refuses("reassess", prompt)) return Refusal{"declined to assess"};
  SafetyLabel label = TrueLabel(prompt);
  bool flip = options_.flip_reassessment && options_.flip_reassessment(prompt);
  if (!flip && options_.flip_rate > 0.0) {
    const std::uint64_t h = DeriveSeed(world_.options().seed,
                                       "flip|" + std::string(prompt));
    flip = static_cast<double>(h % 1000000) < options_.flip_rate * 1e6;
  }
  if (flip) {
    label = label == SafetyLabel::kSafe ? SafetyLabel::kUnsafe
                                        : SafetyLabel::kSafe;
  }
  return label;
}

VariantPair ToyBackend::MakeVariants(std::string_view prompt,
                                     const LanguageCode& lang) const {
  const auto language = world_.LanguageIndex(lang);
  if (!language || *language == 0) {
    return {Refusal{"no slang for " + lang.str()},
            Refusal{"no slang for " + lang.str()}};
  }
  auto tokens = SplitTokens(prompt);
  // Positions that can take a slang alias, last one first.
  std::vector<std::size_t> positions;
  for (std::size_t i = tokens.size(); i-- > 0;) {
    const auto info = world_.Lookup(tokens[i]);
    if (info && info->language == *language && !info->slang &&
        world_.SlangAlias(*language, info->word)) {
      positions.push_back(i);
    }
  }
  auto substitute = [&](std::size_t count) -> Reply<std::string> {
    if (positions.size() < count) return Refusal{"not enough slang slots"};
    // The final word plus the earliest remaining slots.
    std::vector<std::size_t> chosen{positions.front()};
    for (std::size_t k = 0; chosen.size() < count; ++k) {
      chosen.push_back(positions[positions.size() - 1 - k]);
    }
    auto out = tokens;
    for (std::size_t pos : chosen) {
      out[pos] = *world_.SlangAlias(*language, world_.Lookup(out[pos])->word);
    }
    return JoinTokens(out);
  };
  VariantPair pair{Refusal{"declined"}, Refusal{"declined"}};
  if (!Refuses("variant1", prompt)) pair.first = substitute(1);
  if (!Refuses("variant2", prompt)) pair.second = substitute(3);
  return pair;
}

Reply<std::string> ToyBackend::CodeSwitch(std::string_view en_text,
                                          std::string_view other_text) const {
  if (Refuses("code_switch", other_text)) return Refusal{"declined to mix"};
  // Toy clauses are single tokens; alternate starting with English.
  const auto en = SplitTokens(en_text);
  const auto other = SplitTokens(other_text);
  std::vector<std::string> mixed;
  for (std::size_t i = 0; i < std::max(en.size(), other.size()); ++i) {
    if (i < en.size()) mixed.push_back(en[i]);
    if (i < other.size()) mixed.push_back(other[i]);
  }
  return JoinTokens(mixed);
}

Reply<std::string> ToyBackend::BackTranslate(std::string_view text,
                                             const LanguageCode& source) const {
  if (Refuses("backtranslate", text)) return Refusal{"declined to translate"};
  if (!world_.LanguageIndex(source)) {
    return Refusal{"unsupported language " + source.str()};
  }
  return ToyTranslate(text, source, LanguageCode::English(), world_);
}

std::size_t ToyBackend::dimension() const {
  return world_.english_alphabet().size();
}

std::vector<double> ToyBackend::Embed(std::string_view text) const {
  std::vector<double> bag(dimension(), 0.0);
  for (const auto& token : SplitTokens(text)) {
    const auto info = world_.Lookup(token);
    if (!info) continue;
    bag[info->slang ? world_.placeholder_index() : info->word] += 1.0;
  }
  double norm = 0.0;
  for (double x : bag) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : bag) x /= norm;
  }
  return bag;
}

LanguageCode ToyBackend::Detect(std::string_view text) const {
  return ToyDetectLanguage(text, world_);
}

double ToyBackend::Score(std::string_view prompt,
                         std::string_view reasoning) const {
  std::set<std::size_t> hits;
  for (std::string_view part : {prompt, reasoning}) {
    for (const auto& token : SplitTokens(part)) {
      const auto info = world_.Lookup(token);
      if (info && !info->slang && world_.IsUnsafeWord(info->word)) {
        hits.insert(info->word);
      }
    }
  }
  const double z = options_.scorer_slope * static_cast<double>(hits.size()) +
                   options_.scorer_bias;
  return 1.0 / (1.0 + std::exp(-z));
}

ClientSet MakeToyClientSet(std::shared_ptr<const ToyBackend> backend) {
  return ClientSet{backend, backend, backend, backend, backend};
}

Dataset MakeToyCorpus(const ToyWorld& world, std::size_t count,
                      std::uint64_t seed, std::string_view id_prefix) {
  Rng rng(DeriveSeed(seed, "toy-corpus"));
  Dataset corpus;
  const auto& fillers = world.fillers();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n_fillers = 3 + rng.Below(2);
    auto picks = rng.SampleWithoutReplacement(fillers.size(), n_fillers);
    std::sort(picks.begin(), picks.end());
    std::vector<std::string> tokens;
    for (std::size_t p : picks) tokens.push_back(fillers[p]);
    const bool unsafe = rng.Below(2) == 1;
    const auto& topics = unsafe ? world.unsafe_lexicon() : world.safe_topics();
    tokens.push_back(topics[rng.Below(topics.size())]);

    LabeledExample example;
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%05zu", std::string(id_prefix).c_str(), i);
    example.id = id;
    example.lang = LanguageCode::English();
    example.text = JoinTokens(tokens);
    example.label = unsafe ? SafetyLabel::kUnsafe : SafetyLabel::kSafe;
    example.source = ExampleSource::kSeed;
    corpus.Add(std::move(example));
  }
  return corpus;
}

Dataset MakeToyBenignCorpus(const ToyWorld& world, const LanguageCode& lang,
                            std::size_t count, std::uint64_t seed) {
  if (!world.LanguageIndex(lang)) {
    throw Error("benign corpus: unknown language " + lang.str());
  }
  Rng rng(DeriveSeed(seed, "toy-benign-" + lang.str()));
  Dataset corpus;
  const auto& fillers = world.fillers();
  const auto& topics = world.safe_topics();
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> tokens;
    const auto picks = rng.SampleWithoutReplacement(fillers.size(), 2);
    for (std::size_t p : picks) tokens.push_back(fillers[p]);
    tokens.push_back(topics[rng.Below(topics.size())]);
    LabeledExample example;
    example.id = "benign-" + lang.str() + "-" + std::to_string(i);
    example.lang = lang;
    example.text = ToyTranslate(JoinTokens(tokens), LanguageCode::English(),
                                lang, world);
    example.label = SafetyLabel::kSafe;
    example.source = ExampleSource::kSeed;
    corpus.Add(std::move(example));
  }
  return corpus;
}

}  // namespace polyguard
