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

#include "polyguard/policy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "polyguard/error.h"
#include "polyguard/random.h"
#include "polyguard/toyworld.h"
#include "polyguard/verdict.h"

namespace polyguard {
namespace {

constexpr char kMagic[8] = {'P', 'G', 'P', 'O', 'L', 'I', 'C', 'Y'};
constexpr std::uint32_t kFormatVersion = 1;

double LogSumExp(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - max);
  return max + std::log(sum);
}

std::vector<TokenId> Concat(std::span<const TokenId> prompt,
                            std::span<const TokenId> output) {
  std::vector<TokenId> all(prompt.begin(), prompt.end());
  all.insert(all.end(), output.begin(), output.end());
  return all;
}

template <typename T>
void WritePod(std::ofstream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "policy files are little-endian");
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T ReadPod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw Error("policy file truncated");
  return value;
}

}  // namespace

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  auto add = [this](std::string_view word) {
    if (word.empty() || index_.count(std::string(word)) != 0) return;
    index_.emplace(std::string(word), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(word);
  };
  for (std::string_view special :
       {kStop, kSeparator, kUnknown, kMarker, kSafe, kUnsafe}) {
    add(special);
  }
  for (const auto& word : words) add(word);
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::Encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& word : SplitTokens(text)) {
    ids.push_back(Find(word).value_or(unknown()));
  }
  return ids;
}

std::string Vocabulary::Decode(std::span<const TokenId> tokens) const {
  std::string text;
  for (TokenId id : tokens) {
    if (id == stop()) break;
    if (!text.empty()) text.push_back(id == marker() ? '\n' : ' ');
    text += token(id);
  }
  return text;
}

PolicySnapshot::PolicySnapshot(Vocabulary vocab, int context_order,
                               int max_len, double temperature)
    : vocab_(std::move(vocab)),
      context_order_(context_order),
      max_len_(max_len),
      temperature_(temperature) {
  if (context_order_ < 0) throw Error("context order must be >= 0");
  if (max_len_ < 1) throw Error("max_len must be >= 1");
  set_temperature(temperature);
  const std::size_t base = vocab_.size() + 1;
  num_contexts_ = 1;
  for (int i = 0; i < context_order_; ++i) {
    if (num_contexts_ > std::numeric_limits<std::size_t>::max() / base) {
      throw Error("context table too large");
    }
    num_contexts_ *= base;
  }
  params_.assign(num_contexts_ * vocab_.size(), 0.0);
}

void PolicySnapshot::set_temperature(double temperature) {
  if (!(temperature > 0.0)) throw Error("temperature must be positive");
  temperature_ = temperature;
}

std::size_t PolicySnapshot::ContextIndex(std::span<const TokenId> history,
                                         std::size_t end) const {
  const std::size_t pad = vocab_.size();
  const std::size_t base = pad + 1;
  std::size_t index = 0;
  for (int k = context_order_; k >= 1; --k) {
    const std::size_t symbol =
        end >= static_cast<std::size_t>(k)
            ? static_cast<std::size_t>(history[end - k])
            : pad;
    index = index * base + symbol;
  }
  return index;
}

std::span<const double> PolicySnapshot::Logits(std::size_t context) const {
  return std::span<const double>(params_).subspan(context * vocab_.size(),
                                                  vocab_.size());
}

std::span<double> PolicySnapshot::MutableLogits(std::size_t context) {
  return std::span<double>(params_).subspan(context * vocab_.size(),
                                            vocab_.size());
}

void PolicySnapshot::Probabilities(std::size_t context, double temperature,
                                   std::vector<double>& out) const {
  const auto logits = Logits(context);
  out.resize(logits.size());
  double max = -std::numeric_limits<double>::infinity();
  for (double x : logits) max = std::max(max, x / temperature);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] / temperature - max);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
}

double PolicySnapshot::TokenLogprob(std::size_t context, TokenId token) const {
  const auto logits = Logits(context);
  return logits[token] - LogSumExp(logits);
}

bool PolicySnapshot::operator==(const PolicySnapshot& other) const {
  return vocab_ == other.vocab_ && context_order_ == other.context_order_ &&
         max_len_ == other.max_len_ && temperature_ == other.temperature_ &&
         params_ == other.params_;
}

void CheckTokens(const PolicySnapshot& policy,
                 std::span<const TokenId> tokens) {
  for (TokenId id : tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= policy.vocab_size()) {
      throw Error("token out of vocab: " + std::to_string(id));
    }
  }
}

std::vector<TokenId> PromptTokens(const PolicySnapshot& policy,
                                  std::string_view prompt_text) {
  auto ids = policy.vocab().Encode(prompt_text);
  ids.push_back(policy.vocab().separator());
  return ids;
}

std::vector<double> TokenLogprobs(const PolicySnapshot& policy,
                                  std::span<const TokenId> prompt,
                                  std::span<const TokenId> output) {
  CheckTokens(policy, prompt);
  CheckTokens(policy, output);
  const auto history = Concat(prompt, output);
  std::vector<double> logprobs;
  logprobs.reserve(output.size());
  for (std::size_t t = 0; t < output.size(); ++t) {
    const std::size_t ctx = policy.ContextIndex(history, prompt.size() + t);
    logprobs.push_back(policy.TokenLogprob(ctx, output[t]));
  }
  return logprobs;
}

double SequenceLogprob(const PolicySnapshot& policy,
                       std::span<const TokenId> prompt,
                       std::span<const TokenId> output) {
  double total = 0.0;
  for (double lp : TokenLogprobs(policy, prompt, output)) total += lp;
  return total;
}

GenerationRecord MakeRecord(const PolicySnapshot& policy,
                            std::string prompt_id, std::vector<TokenId> tokens,
                            std::vector<double> token_logprobs) {
  GenerationRecord record;
  record.prompt_id = std::move(prompt_id);
  record.text = policy.vocab().Decode(tokens);
  auto parsed = ParseVerdict(record.text);
  record.verdict = parsed.verdict;
  record.reasoning_text = std::move(parsed.reasoning_text);
  record.tokens = std::move(tokens);
  record.token_logprobs = std::move(token_logprobs);
  return record;
}

GenerationRecord SampleOne(const PolicySnapshot& policy,
                           std::span<const TokenId> prompt, std::uint64_t seed,
                           std::string_view prompt_id) {
  CheckTokens(policy, prompt);
  Rng rng(seed);
  std::vector<TokenId> history(prompt.begin(), prompt.end());
  std::vector<TokenId> tokens;
  std::vector<double> logprobs;
  std::vector<double> probs;
  while (tokens.size() < static_cast<std::size_t>(policy.max_len())) {
    const std::size_t ctx = policy.ContextIndex(history, history.size());
    policy.Probabilities(ctx, policy.temperature(), probs);
    const double u = rng.Uniform();
    double cumulative = 0.0;
    TokenId token = static_cast<TokenId>(probs.size() - 1);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cumulative += probs[i];
      if (u < cumulative) {
        token = static_cast<TokenId>(i);
        break;
      }
    }
    logprobs.push_back(policy.TokenLogprob(ctx, token));
    tokens.push_back(token);
    history.push_back(token);
    if (token == policy.vocab().stop()) break;
  }
  return MakeRecord(policy, std::string(prompt_id), std::move(tokens),
                    std::move(logprobs));
}

std::vector<GenerationRecord> SampleGroup(const PolicySnapshot& policy,
                                          std::span<const TokenId> prompt,
                                          std::size_t group_size,
                                          std::uint64_t seed,
                                          std::string_view prompt_id) {
  if (group_size < 2) throw Error("group size must be >= 2");
  std::vector<GenerationRecord> group;
  group.reserve(group_size);
  for (std::size_t i = 0; i < group_size; ++i) {
    group.push_back(SampleOne(policy, prompt, DeriveSeed(seed, i), prompt_id));
  }
  return group;
}

GenerationRecord GreedyDecode(const PolicySnapshot& policy,
                              std::span<const TokenId> prompt,
                              std::string_view prompt_id) {
  CheckTokens(policy, prompt);
  std::vector<TokenId> history(prompt.begin(), prompt.end());
  std::vector<TokenId> tokens;
  std::vector<double> logprobs;
  while (tokens.size() < static_cast<std::size_t>(policy.max_len())) {
    const std::size_t ctx = policy.ContextIndex(history, history.size());
    const auto logits = policy.Logits(ctx);
    const auto best = std::max_element(logits.begin(), logits.end());
    const auto token = static_cast<TokenId>(best - logits.begin());
    logprobs.push_back(policy.TokenLogprob(ctx, token));
    tokens.push_back(token);
    history.push_back(token);
    if (token == policy.vocab().stop()) break;
  }
  return MakeRecord(policy, std::string(prompt_id), std::move(tokens),
                    std::move(logprobs));
}

std::span<double> SparseGradient::Block(std::size_t context) {
  auto [it, inserted] = blocks_.try_emplace(context);
  if (inserted) it->second.assign(block_size_, 0.0);
  return it->second;
}

void SparseGradient::AddScaled(const SparseGradient& other, double scale) {
  if (other.block_size_ != block_size_) throw Error("block size mismatch");
  for (const auto& [context, block] : other.blocks_) {
    auto mine = Block(context);
    for (std::size_t i = 0; i < block_size_; ++i) mine[i] += scale * block[i];
  }
}

void SparseGradient::Scale(double factor) {
  for (auto& [context, block] : blocks_) {
    for (double& x : block) x *= factor;
  }
}

double SparseGradient::SquaredNorm() const {
  double total = 0.0;
  for (const auto& [context, block] : blocks_) {
    for (double x : block) total += x * x;
  }
  return total;
}

void SparseGradient::ApplyTo(std::vector<double>& params, double scale) const {
  for (const auto& [context, block] : blocks_) {
    double* base = params.data() + context * block_size_;
    for (std::size_t i = 0; i < block_size_; ++i) base[i] += scale * block[i];
  }
}

std::vector<double> SparseGradient::ToDense(std::size_t size) const {
  std::vector<double> dense(size, 0.0);
  ApplyTo(dense, 1.0);
  return dense;
}

void AccumulateTokenGradients(const PolicySnapshot& policy,
                              std::span<const TokenId> prompt,
                              std::span<const TokenId> output,
                              std::span<const double> weights,
                              SparseGradient& grad) {
  CheckTokens(policy, prompt);
  CheckTokens(policy, output);
  if (weights.size() != output.size()) {
    throw Error("gradient weights must match output length");
  }
  const auto history = Concat(prompt, output);
  std::vector<double> probs;
  for (std::size_t t = 0; t < output.size(); ++t) {
    if (weights[t] == 0.0) continue;
    const std::size_t ctx = policy.ContextIndex(history, prompt.size() + t);
    policy.Probabilities(ctx, 1.0, probs);
    auto block = grad.Block(ctx);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      block[i] -= weights[t] * probs[i];
    }
    block[output[t]] += weights[t];
  }
}

std::vector<double> LogprobGradient(const PolicySnapshot& policy,
                                    std::span<const TokenId> prompt,
                                    std::span<const TokenId> output) {
  SparseGradient grad(policy.vocab_size());
  const std::vector<double> ones(output.size(), 1.0);
  AccumulateTokenGradients(policy, prompt, output, ones, grad);
  return grad.ToDense(policy.params().size());
}

double ExactTokenKl(const PolicySnapshot& current, const PolicySnapshot& ref,
                    std::size_t context) {
  if (current.vocab_size() != ref.vocab_size()) {
    throw Error("KL: vocabularies differ");
  }
  std::vector<double> p;
  current.Probabilities(context, 1.0, p);
  const auto cur_logits = current.Logits(context);
  const auto ref_logits = ref.Logits(context);
  const double cur_lse = LogSumExp(cur_logits);
  const double ref_lse = LogSumExp(ref_logits);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    kl += p[i] * ((cur_logits[i] - cur_lse) - (ref_logits[i] - ref_lse));
  }
  return kl;
}

void SavePolicy(const PolicySnapshot& policy,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  WritePod<std::uint32_t>(out, kFormatVersion);
  WritePod<std::uint32_t>(out, static_cast<std::uint32_t>(policy.context_order()));
  WritePod<std::uint32_t>(out, static_cast<std::uint32_t>(policy.max_len()));
  WritePod<double>(out, policy.temperature());
  const auto& tokens = policy.vocab().tokens();
  WritePod<std::uint64_t>(out, tokens.size());
  for (const auto& token : tokens) {
    WritePod<std::uint32_t>(out, static_cast<std::uint32_t>(token.size()));
    out.write(token.data(), static_cast<std::streamsize>(token.size()));
  }
  const auto& params = policy.params();
  WritePod<std::uint64_t>(out, params.size());
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw Error("write failed: " + path.string());
}

PolicySnapshot LoadPolicy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a policy file: " + path.string());
  }
  const auto version = ReadPod<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw Error("unsupported policy format version " + std::to_string(version));
  }
  const auto order = ReadPod<std::uint32_t>(in);
  const auto max_len = ReadPod<std::uint32_t>(in);
  const auto temperature = ReadPod<double>(in);
  const auto n_tokens = ReadPod<std::uint64_t>(in);
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint64_t i = 0; i < n_tokens; ++i) {
    const auto length = ReadPod<std::uint32_t>(in);
    std::string token(length, '\0');
    in.read(token.data(), length);
    if (!in) throw Error("policy file truncated");
    tokens.push_back(std::move(token));
  }
  Vocabulary vocab(tokens);
  if (vocab.tokens() != tokens) throw Error("policy vocabulary is malformed");
  PolicySnapshot policy(std::move(vocab), static_cast<int>(order),
                        static_cast<int>(max_len), temperature);
  const auto n_params = ReadPod<std::uint64_t>(in);
  if (n_params != policy.params().size()) {
    throw Error("policy parameter count mismatch");
  }
  in.read(reinterpret_cast<char*>(policy.params().data()),
          static_cast<std::streamsize>(n_params * sizeof(double)));
  if (!in) throw Error("policy file truncated");
  return policy;
}

}  // namespace polyguard
