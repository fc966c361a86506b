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

#ifndef POLYGUARD_GRPO_H_
#define POLYGUARD_GRPO_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyguard/curriculum.h"
#include "polyguard/policy.h"
#include "polyguard/rewards.h"

namespace polyguard {

struct GrpoConfig {
  std::size_t group_size = 8;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  double learning_rate = 16.0;
  double std_floor = 1e-8;
  std::string kl_estimator = "per_token_k3";
  int epochs = 3;
  // Prompts whose groups share one pi_old snapshot and one update.
  std::size_t prompts_per_batch = 8;
  // Gradient steps taken per batch against the same pi_old samples.
  int inner_steps = 1;
  // Global L2 clip on each update; 0 disables.
  double max_grad_norm = 0.0;
  // false: every epoch draws the same number of prompts as the curriculum
  // would, but uniformly from the full pool.
  bool use_curriculum = true;
  // Prompts scored for eval_mean_reward; 0 means the whole eval set.
  std::size_t eval_prompts = 0;
};

void ValidateGrpoConfig(const GrpoConfig& config);

// (r - mean) / popstd, or all zeros when popstd < std_floor.
std::vector<double> ComputeAdvantages(std::span<const double> rewards,
                                      double std_floor = 1e-8);

// Mean over output positions of exp(l) - l - 1, l = log ref - log current.
double KlPenalty(const PolicySnapshot& current, const PolicySnapshot& ref,
                 const GenerationRecord& record,
                 std::span<const TokenId> prompt);

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)
double ClippedSurrogate(double ratio, double advantage, double epsilon);

// pi_old log-probabilities taken from the records themselves.
double GrpoObjective(const PolicySnapshot& theta, const PolicySnapshot& ref,
                     std::span<const TokenId> prompt,
                     std::span<const GenerationRecord> group,
                     std::span<const double> advantages,
                     const GrpoConfig& config);
double GrpoObjective(const PolicySnapshot& theta, const PolicySnapshot& old,
                     const PolicySnapshot& ref, std::span<const TokenId> prompt,
                     std::span<const GenerationRecord> group,
                     std::span<const double> advantages,
                     const GrpoConfig& config);

// Exact gradient of GrpoObjective (records' log-probabilities as pi_old),
// scaled by `scale` and added into `grad`.
void AccumulateObjectiveGradient(const PolicySnapshot& theta,
                                 const PolicySnapshot& ref,
                                 std::span<const TokenId> prompt,
                                 std::span<const GenerationRecord> group,
                                 std::span<const double> advantages,
                                 const GrpoConfig& config, double scale,
                                 SparseGradient& grad);
std::vector<double> ObjectiveGradient(const PolicySnapshot& theta,
                                      const PolicySnapshot& ref,
                                      std::span<const TokenId> prompt,
                                      std::span<const GenerationRecord> group,
                                      std::span<const double> advantages,
                                      const GrpoConfig& config);

struct GrpoEpochMetrics {
  int epoch = 0;  // 0 is the evaluation before any update
  std::size_t prompts = 0;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double format_failure_rate = 0.0;
  double mean_language_reward = 0.0;
  double eval_mean_reward = 0.0;

  nlohmann::ordered_json ToJson() const;
};

// Mean total reward of `group_size` samples per prompt, drawn with seeds
// that depend only on (seed, prompt index).
double EvaluateMeanReward(const PolicySnapshot& policy,
                          std::span<const LabeledExample> prompts,
                          const RewardEngine& rewards, std::size_t group_size,
                          std::uint64_t seed);

struct GrpoResult {
  PolicySnapshot policy;
  std::vector<GrpoEpochMetrics> metrics;
};

// Epoch e trains on curriculum stages 1..e. When `eval` is empty the
// evaluation pool is the whole curriculum. Throws on an empty stage 1 and on
// an invalid config before sampling anything.
GrpoResult TrainGrpo(const PolicySnapshot& ref, const Curriculum& curriculum,
                     const RewardEngine& rewards, const GrpoConfig& config,
                     std::uint64_t seed,
                     std::span<const LabeledExample> eval = {},
                     const std::function<void(const GrpoEpochMetrics&)>&
                         on_epoch = nullptr);

}  // namespace polyguard

#endif  // POLYGUARD_GRPO_H_
