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

#ifndef POLYGUARD_SFT_H_
#define POLYGUARD_SFT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyguard/dataset.h"
#include "polyguard/policy.h"

namespace polyguard {

enum class TargetOrder { kEnglishFirst, kNativeFirst };

std::string_view ToString(TargetOrder order);
std::optional<TargetOrder> ParseTargetOrder(std::string_view text);

struct SftConfig {
  double learning_rate = 0.1;
  int epochs = 3;
  TargetOrder target_order = TargetOrder::kEnglishFirst;
  // Examples per gradient step; 0 means the whole dataset.
  std::size_t batch_size = 1;
};

void ValidateSftConfig(const SftConfig& config);

// Loss-bearing target tokens: the reasoning traces present on the example in
// the configured order, then "Safety: <label>", then <stop>.
std::vector<TokenId> RenderTarget(const PolicySnapshot& policy,
                                  const LabeledExample& example,
                                  TargetOrder order);

struct SftEpochStats {
  int epoch = 0;
  double mean_nll = 0.0;  // after the epoch's updates
};

// Mean per-example negative log-likelihood of the rendered targets.
double MeanNll(const PolicySnapshot& policy, const Dataset& data,
               TargetOrder order);

// Plain gradient descent on the mean masked NLL; prompt tokens carry no loss.
// Example order is reshuffled each epoch from `seed`. Throws on empty data.
PolicySnapshot TrainSft(const PolicySnapshot& init, const Dataset& data,
                        const SftConfig& config, std::uint64_t seed,
                        std::vector<SftEpochStats>* stats = nullptr);

// Fresh all-zero policy whose vocabulary covers every word in `words`.
PolicySnapshot MakeInitialPolicy(const std::vector<std::string>& words,
                                 int context_order = 2, int max_len = 24);

}  // namespace polyguard

#endif  // POLYGUARD_SFT_H_
