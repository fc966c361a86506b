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

#ifndef POLYGUARD_POLICY_H_
#define POLYGUARD_POLICY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polyguard/types.h"

namespace polyguard {

// Token inventory of a sequence policy. The special tokens always occupy the
// first ids in a fixed order; the remaining words follow in insertion order.
class Vocabulary {
 public:
  static constexpr std::string_view kStop = "<stop>";
  static constexpr std::string_view kSeparator = "<assistant>";
  static constexpr std::string_view kUnknown = "<unk>";
  static constexpr std::string_view kMarker = "Safety:";
  static constexpr std::string_view kSafe = "safe";
  static constexpr std::string_view kUnsafe = "unsafe";

  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<TokenId> Find(std::string_view token) const;

  TokenId stop() const { return 0; }
  TokenId separator() const { return 1; }
  TokenId unknown() const { return 2; }
  TokenId marker() const { return 3; }
  TokenId safe() const { return 4; }
  TokenId unsafe() const { return 5; }
  TokenId label(SafetyLabel label) const {
    return label == SafetyLabel::kUnsafe ? unsafe() : safe();
  }

  // Whitespace tokenization; words outside the inventory map to <unk>.
  std::vector<TokenId> Encode(std::string_view text) const;
  // Renders output tokens up to the first <stop>. The verdict marker starts
  // a new line so that the result parses with ParseVerdict.
  std::string Decode(std::span<const TokenId> tokens) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Order-m context-conditioned softmax table. The context of a position is
// the previous m tokens of prompt + output, left-padded with a pad symbol
// that is not itself a vocabulary token. Parameters hold one logit block of
// |vocab| entries per context state, (|vocab| + 1)^m states in total.
class PolicySnapshot {
 public:
  PolicySnapshot(Vocabulary vocab, int context_order, int max_len,
                 double temperature = 1.0);

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  int context_order() const { return context_order_; }
  int max_len() const { return max_len_; }
  double temperature() const { return temperature_; }
  void set_temperature(double temperature);

  std::size_t num_contexts() const { return num_contexts_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // State index of the context ending right before position `end` of
  // `history` (i.e. built from history[end - m, end)).
  std::size_t ContextIndex(std::span<const TokenId> history,
                           std::size_t end) const;
  std::span<const double> Logits(std::size_t context) const;
  std::span<double> MutableLogits(std::size_t context);
  // Softmax of logits / temperature into `out` (resized to |vocab|).
  void Probabilities(std::size_t context, double temperature,
                     std::vector<double>& out) const;
  // log softmax(logits)[token] at temperature 1.
  double TokenLogprob(std::size_t context, TokenId token) const;

  bool operator==(const PolicySnapshot& other) const;

 private:
  Vocabulary vocab_;
  int context_order_;
  int max_len_;
  double temperature_;
  std::size_t num_contexts_ = 0;
  std::vector<double> params_;
};

// Throws Error("token out of vocab: <id>") for ids outside the vocabulary.
void CheckTokens(const PolicySnapshot& policy, std::span<const TokenId> tokens);

// Prompt text followed by the assistant separator.
std::vector<TokenId> PromptTokens(const PolicySnapshot& policy,
                                  std::string_view prompt_text);

// Per-position log-probabilities of `output` given `prompt` (temperature 1).
std::vector<double> TokenLogprobs(const PolicySnapshot& policy,
                                  std::span<const TokenId> prompt,
                                  std::span<const TokenId> output);
double SequenceLogprob(const PolicySnapshot& policy,
                       std::span<const TokenId> prompt,
                       std::span<const TokenId> output);

// Builds a record from output tokens: decodes, parses the verdict.
GenerationRecord MakeRecord(const PolicySnapshot& policy,
                            std::string prompt_id, std::vector<TokenId> tokens,
                            std::vector<double> token_logprobs);

// G ancestral samples at the snapshot temperature, each ending with <stop>
// or at max_len. Sample i draws from the substream DeriveSeed(seed, i), so
// results do not depend on evaluation order. Recorded log-probabilities are
// at temperature 1. Throws Error("group size must be >= 2") for G < 2.
std::vector<GenerationRecord> SampleGroup(const PolicySnapshot& policy,
                                          std::span<const TokenId> prompt,
                                          std::size_t group_size,
                                          std::uint64_t seed,
                                          std::string_view prompt_id = "");
// Single sample from substream `seed`.
GenerationRecord SampleOne(const PolicySnapshot& policy,
                           std::span<const TokenId> prompt, std::uint64_t seed,
                           std::string_view prompt_id = "");

// Argmax decoding; ties go to the lowest token id.
GenerationRecord GreedyDecode(const PolicySnapshot& policy,
                              std::span<const TokenId> prompt,
                              std::string_view prompt_id = "");

// Gradient restricted to the context blocks it touches.
class SparseGradient {
 public:
  explicit SparseGradient(std::size_t block_size) : block_size_(block_size) {}

  std::size_t block_size() const { return block_size_; }
  std::span<double> Block(std::size_t context);
  const std::map<std::size_t, std::vector<double>>& blocks() const {
    return blocks_;
  }

  void AddScaled(const SparseGradient& other, double scale);
  void Scale(double factor);
  double SquaredNorm() const;
  // params += scale * this
  void ApplyTo(std::vector<double>& params, double scale) const;
  std::vector<double> ToDense(std::size_t size) const;

 private:
  std::size_t block_size_;
  std::map<std::size_t, std::vector<double>> blocks_;
};

// Adds sum_t weight[t] * d/dparams log pi(output[t] | context_t) into `grad`.
// Each term contributes one-hot(token) - softmax(logits(context)) to its
// context block. `weights` must have one entry per output token.
void AccumulateTokenGradients(const PolicySnapshot& policy,
                              std::span<const TokenId> prompt,
                              std::span<const TokenId> output,
                              std::span<const double> weights,
                              SparseGradient& grad);

// Exact gradient of SequenceLogprob with respect to the flat parameters.
std::vector<double> LogprobGradient(const PolicySnapshot& policy,
                                    std::span<const TokenId> prompt,
                                    std::span<const TokenId> output);

// KL(current(.|ctx) || ref(.|ctx)) by exact summation over the vocabulary.
double ExactTokenKl(const PolicySnapshot& current, const PolicySnapshot& ref,
                    std::size_t context);

// Versioned little-endian binary dump; round trips bit-exactly.
void SavePolicy(const PolicySnapshot& policy, const std::filesystem::path& path);
PolicySnapshot LoadPolicy(const std::filesystem::path& path);

}  // namespace polyguard

#endif  // POLYGUARD_POLICY_H_
