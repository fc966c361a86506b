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

#ifndef POLYGUARD_CLIENTS_H_
#define POLYGUARD_CLIENTS_H_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "polyguard/error.h"
#include "polyguard/types.h"

namespace polyguard {

// A backend declined the request (for example a translation refusal).
struct Refusal {
  std::string reason;
};

// Either a value or a typed refusal; never silently empty.
template <typename T>
class Reply {
 public:
  Reply(T value) : state_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Reply(Refusal refusal) : state_(std::move(refusal)) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(state_); }

  const T& value() const {
    if (!ok()) throw Error("refused: " + refusal().reason);
    return std::get<T>(state_);
  }
  const Refusal& refusal() const { return std::get<Refusal>(state_); }

 private:
  std::variant<T, Refusal> state_;
};

struct VariantPair {
  Reply<std::string> first;
  Reply<std::string> second;
};

// Text generation capabilities used to synthesize training data. All methods
// must be safe to call concurrently.
class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;

  // Explanation of why `prompt` carries `label`, written in `lang`.
  virtual Reply<std::string> Reason(std::string_view prompt, SafetyLabel label,
                                    const LanguageCode& lang) const = 0;
  virtual Reply<std::string> Translate(std::string_view prompt,
                                       const LanguageCode& target) const = 0;
  // Blind re-labeling of a (translated) prompt.
  virtual Reply<SafetyLabel> Reassess(std::string_view prompt) const = 0;
  // Two culturally localized rewrites in the same language.
  virtual VariantPair MakeVariants(std::string_view prompt,
                                   const LanguageCode& lang) const = 0;
  virtual Reply<std::string> CodeSwitch(std::string_view en_text,
                                        std::string_view other_text) const = 0;
};

class BackTranslator {
 public:
  virtual ~BackTranslator() = default;
  // Translates `text` from `source` into English.
  virtual Reply<std::string> BackTranslate(
      std::string_view text, const LanguageCode& source) const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> Embed(std::string_view text) const = 0;
};

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual LanguageCode Detect(std::string_view text) const = 0;
};

class UncertaintyScorer {
 public:
  virtual ~UncertaintyScorer() = default;
  // Softmax score in [0, 1] of the class predicted from (prompt, reasoning).
  // Implementations throw on failure instead of returning a default.
  virtual double Score(std::string_view prompt,
                       std::string_view reasoning) const = 0;
};

// The full set of capabilities a pipeline run needs.
struct ClientSet {
  std::shared_ptr<const GeneratorClient> generator;
  std::shared_ptr<const BackTranslator> back_translator;
  std::shared_ptr<const Embedder> embedder;
  std::shared_ptr<const LanguageDetector> detector;
  std::shared_ptr<const UncertaintyScorer> scorer;
};

// dot(u, v) / (|u| |v|). Throws Error("degenerate embedding") when either
// vector has zero norm, Error on dimension mismatch.
double CosineSimilarity(std::span<const double> u, std::span<const double> v);

}  // namespace polyguard

#endif  // POLYGUARD_CLIENTS_H_
