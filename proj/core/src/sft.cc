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

#include "polyguard/sft.h"

#include <numeric>

#include "polyguard/error.h"
#include "polyguard/random.h"

namespace polyguard {

std::string_view ToString(TargetOrder order) {
  return order == TargetOrder::kEnglishFirst ? "en_first" : "native_first";
}

std::optional<TargetOrder> ParseTargetOrder(std::string_view text) {
  if (text == "en_first") return TargetOrder::kEnglishFirst;
  if (text == "native_first") return TargetOrder::kNativeFirst;
  return std::nullopt;
}

void ValidateSftConfig(const SftConfig& config) {
  if (!(config.learning_rate > 0.0)) {
    throw ValidationError("learning_rate", "must be positive");
  }
  if (config.epochs < 1) throw ValidationError("epochs", "must be >= 1");
}

std::vector<TokenId> RenderTarget(const PolicySnapshot& policy,
                                  const LabeledExample& example,
                                  TargetOrder order) {
  const Vocabulary& vocab = policy.vocab();
  std::vector<TokenId> target;
  auto append = [&](const std::optional<std::string>& trace) {
    if (!trace) return;
    auto tokens = vocab.Encode(*trace);
    target.insert(target.end(), tokens.begin(), tokens.end());
  };
  const bool native = example.reasoning_native && !example.lang.is_english();
  if (order == TargetOrder::kEnglishFirst) {
    append(example.reasoning_en);
    if (native) append(example.reasoning_native);
  } else {
    if (native) append(example.reasoning_native);
    append(example.reasoning_en);
  }
  target.push_back(vocab.marker());
  target.push_back(vocab.label(example.label));
  target.push_back(vocab.stop());
  return target;
}

double MeanNll(const PolicySnapshot& policy, const Dataset& data,
               TargetOrder order) {
  if (data.size() == 0) throw Error("sft: empty dataset");
  double total = 0.0;
  for (const auto& example : data) {
    total -= SequenceLogprob(policy, PromptTokens(policy, example.text),
                             RenderTarget(policy, example, order));
  }
  return total / static_cast<double>(data.size());
}

PolicySnapshot TrainSft(const PolicySnapshot& init, const Dataset& data,
                        const SftConfig& config, std::uint64_t seed,
                        std::vector<SftEpochStats>* stats) {
  ValidateSftConfig(config);
  if (data.size() == 0) throw Error("sft: empty dataset");
  PolicySnapshot policy = init;

  struct Pair {
    std::vector<TokenId> prompt;
    std::vector<TokenId> target;
  };
  std::vector<Pair> pairs;
  pairs.reserve(data.size());
  for (const auto& example : data) {
    pairs.push_back({PromptTokens(policy, example.text),
                     RenderTarget(policy, example, config.target_order)});
  }
  const std::size_t batch =
      config.batch_size == 0 ? pairs.size()
                             : std::min(config.batch_size, pairs.size());

  std::vector<std::size_t> order(pairs.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      SparseGradient grad(policy.vocab_size());
      for (std::size_t i = start; i < end; ++i) {
        const Pair& pair = pairs[order[i]];
        std::vector<double> ones(pair.target.size(), 1.0);
        AccumulateTokenGradients(policy, pair.prompt, pair.target, ones, grad);
      }
      // Ascend the log-likelihood, i.e. descend the NLL.
      grad.ApplyTo(policy.params(),
                   config.learning_rate / static_cast<double>(end - start));
    }
    if (stats != nullptr) {
      stats->push_back({epoch, MeanNll(policy, data, config.target_order)});
    }
  }
  return policy;
}

PolicySnapshot MakeInitialPolicy(const std::vector<std::string>& words,
                                 int context_order, int max_len) {
  return PolicySnapshot(Vocabulary(words), context_order, max_len);
}

}  // namespace polyguard
