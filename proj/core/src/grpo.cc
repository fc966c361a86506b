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

#include "polyguard/grpo.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyguard/error.h"
#include "polyguard/random.h"

namespace polyguard {

void ValidateGrpoConfig(const GrpoConfig& config) {
  if (config.group_size < 2) {
    throw ValidationError("group_size", "group size must be >= 2");
  }
  if (!(config.clip_epsilon > 0.0 && config.clip_epsilon < 1.0)) {
    throw ValidationError("clip_epsilon", "must lie in (0, 1)");
  }
  if (!(config.kl_beta >= 0.0)) {
    throw ValidationError("kl_beta", "must be >= 0");
  }
  if (!(config.learning_rate > 0.0)) {
    throw ValidationError("learning_rate", "must be positive");
  }
  if (!(config.std_floor >= 0.0)) {
    throw ValidationError("std_floor", "must be >= 0");
  }
  if (config.kl_estimator != "per_token_k3") {
    throw ValidationError("kl_estimator", "only per_token_k3 is supported");
  }
  if (config.epochs < 1) throw ValidationError("epochs", "must be >= 1");
  if (config.prompts_per_batch < 1) {
    throw ValidationError("prompts_per_batch", "must be >= 1");
  }
  if (config.inner_steps < 1) {
    throw ValidationError("inner_steps", "must be >= 1");
  }
  if (!(config.max_grad_norm >= 0.0)) {
    throw ValidationError("max_grad_norm", "must be >= 0");
  }
}

std::vector<double> ComputeAdvantages(std::span<const double> rewards,
                                      double std_floor) {
  if (rewards.size() < 2) throw Error("group size must be >= 2");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> advantages(rewards.size(), 0.0);
  if (sd < std_floor || sd == 0.0) return advantages;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / sd;
  }
  return advantages;
}

double KlPenalty(const PolicySnapshot& current, const PolicySnapshot& ref,
                 const GenerationRecord& record,
                 std::span<const TokenId> prompt) {
  if (record.tokens.empty()) return 0.0;
  const auto cur = TokenLogprobs(current, prompt, record.tokens);
  const auto base = TokenLogprobs(ref, prompt, record.tokens);
  double total = 0.0;
  for (std::size_t t = 0; t < cur.size(); ++t) {
    const double l = base[t] - cur[t];
    total += std::expm1(l) - l;
  }
  return total / static_cast<double>(cur.size());
}

double ClippedSurrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace {

void CheckGroup(std::span<const GenerationRecord> group,
                std::span<const double> advantages) {
  if (group.size() != advantages.size()) {
    throw Error("group and advantages differ in length");
  }
  for (const auto& record : group) {
    if (record.tokens.size() != record.token_logprobs.size()) {
      throw Error("record " + record.prompt_id +
                  ": token_logprobs length differs from tokens");
    }
  }
}

double Objective(const PolicySnapshot& theta, const PolicySnapshot& ref,
                 std::span<const TokenId> prompt,
                 std::span<const GenerationRecord> group,
                 std::span<const double> old_logprobs,
                 std::span<const double> advantages, const GrpoConfig& config) {
  if (group.empty()) return 0.0;
  double surrogate = 0.0;
  double kl = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double logp = SequenceLogprob(theta, prompt, group[i].tokens);
    const double ratio = std::exp(logp - old_logprobs[i]);
    surrogate += ClippedSurrogate(ratio, advantages[i], config.clip_epsilon);
    if (config.kl_beta != 0.0) kl += KlPenalty(theta, ref, group[i], prompt);
  }
  const double g = static_cast<double>(group.size());
  return surrogate / g - config.kl_beta * kl / g;
}

}  // namespace

double GrpoObjective(const PolicySnapshot& theta, const PolicySnapshot& ref,
                     std::span<const TokenId> prompt,
                     std::span<const GenerationRecord> group,
                     std::span<const double> advantages,
                     const GrpoConfig& config) {
  CheckGroup(group, advantages);
  std::vector<double> old;
  old.reserve(group.size());
  for (const auto& record : group) old.push_back(record.SequenceLogprob());
  return Objective(theta, ref, prompt, group, old, advantages, config);
}

double GrpoObjective(const PolicySnapshot& theta, const PolicySnapshot& old,
                     const PolicySnapshot& ref, std::span<const TokenId> prompt,
                     std::span<const GenerationRecord> group,
                     std::span<const double> advantages,
                     const GrpoConfig& config) {
  CheckGroup(group, advantages);
  std::vector<double> old_logprobs;
  old_logprobs.reserve(group.size());
  for (const auto& record : group) {
    old_logprobs.push_back(SequenceLogprob(old, prompt, record.tokens));
  }
  return Objective(theta, ref, prompt, group, old_logprobs, advantages, config);
}

void AccumulateObjectiveGradient(const PolicySnapshot& theta,
                                 const PolicySnapshot& ref,
                                 std::span<const TokenId> prompt,
                                 std::span<const GenerationRecord> group,
                                 std::span<const double> advantages,
                                 const GrpoConfig& config, double scale,
                                 SparseGradient& grad) {
  CheckGroup(group, advantages);
  if (group.empty()) return;
  const double g = static_cast<double>(group.size());
  const double eps = config.clip_epsilon;
  std::vector<double> weights;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto& tokens = group[i].tokens;
    if (tokens.empty()) continue;
    const auto cur = TokenLogprobs(theta, prompt, tokens);
    const double logp = std::accumulate(cur.begin(), cur.end(), 0.0);
    const double ratio = std::exp(logp - group[i].SequenceLogprob());
    const double a = advantages[i];
    const bool clipped =
        (a > 0.0 && ratio > 1.0 + eps) || (a < 0.0 && ratio < 1.0 - eps);
    const double policy_weight = clipped ? 0.0 : a * ratio;
    weights.assign(tokens.size(), policy_weight);
    if (config.kl_beta != 0.0) {
      const auto base = TokenLogprobs(ref, prompt, tokens);
      const double per_token = config.kl_beta / static_cast<double>(cur.size());
      for (std::size_t t = 0; t < cur.size(); ++t) {
        weights[t] += per_token * std::expm1(base[t] - cur[t]);
      }
    }
    for (double& w : weights) w *= scale / g;
    AccumulateTokenGradients(theta, prompt, tokens, weights, grad);
  }
}

std::vector<double> ObjectiveGradient(const PolicySnapshot& theta,
                                      const PolicySnapshot& ref,
                                      std::span<const TokenId> prompt,
                                      std::span<const GenerationRecord> group,
                                      std::span<const double> advantages,
                                      const GrpoConfig& config) {
  SparseGradient grad(theta.vocab_size());
  AccumulateObjectiveGradient(theta, ref, prompt, group, advantages, config,
                              1.0, grad);
  return grad.ToDense(theta.params().size());
}

nlohmann::ordered_json GrpoEpochMetrics::ToJson() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["prompts"] = prompts;
  j["mean_reward"] = mean_reward;
  j["mean_kl"] = mean_kl;
  j["format_failure_rate"] = format_failure_rate;
  j["mean_language_reward"] = mean_language_reward;
  j["eval_mean_reward"] = eval_mean_reward;
  return j;
}

double EvaluateMeanReward(const PolicySnapshot& policy,
                          std::span<const LabeledExample> prompts,
                          const RewardEngine& rewards, std::size_t group_size,
                          std::uint64_t seed) {
  if (prompts.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const auto tokens = PromptTokens(policy, prompts[p].text);
    const auto group = SampleGroup(policy, tokens, group_size,
                                   DeriveSeed(seed, p), prompts[p].id);
    for (const auto& record : group) {
      total += rewards.Evaluate(prompts[p], record).total;
    }
  }
  return total / static_cast<double>(prompts.size() * group_size);
}

GrpoResult TrainGrpo(const PolicySnapshot& ref, const Curriculum& curriculum,
                     const RewardEngine& rewards, const GrpoConfig& config,
                     std::uint64_t seed, std::span<const LabeledExample> eval,
                     const std::function<void(const GrpoEpochMetrics&)>&
                         on_epoch) {
  ValidateGrpoConfig(config);
  if (curriculum.stage(1).empty()) throw Error("grpo: empty stage-1 pool");
  curriculum.Validate();

  const std::vector<LabeledExample> full =
      curriculum.EpochPool(Curriculum::kStages);
  std::vector<LabeledExample> eval_pool(eval.begin(), eval.end());
  if (eval_pool.empty()) eval_pool = full;
  if (config.eval_prompts != 0 && config.eval_prompts < eval_pool.size()) {
    Rng pick(DeriveSeed(seed, "grpo-eval-pick"));
    auto idx = pick.SampleWithoutReplacement(eval_pool.size(),
                                             config.eval_prompts);
    std::sort(idx.begin(), idx.end());
    std::vector<LabeledExample> subset;
    for (auto i : idx) subset.push_back(eval_pool[i]);
    eval_pool = std::move(subset);
  }
  const std::uint64_t eval_seed = DeriveSeed(seed, "grpo-eval");
  const std::uint64_t sample_seed = DeriveSeed(seed, "grpo-sample");
  const std::uint64_t order_seed = DeriveSeed(seed, "grpo-order");

  GrpoResult result{ref, {}};
  PolicySnapshot& theta = result.policy;

  GrpoEpochMetrics initial;
  initial.eval_mean_reward = EvaluateMeanReward(theta, eval_pool, rewards,
                                                config.group_size, eval_seed);
  result.metrics.push_back(initial);
  if (on_epoch) on_epoch(initial);

  std::uint64_t batch_counter = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const int stage_cap = std::min(epoch, Curriculum::kStages);
    Rng order_rng(DeriveSeed(order_seed, static_cast<std::uint64_t>(epoch)));
    std::vector<LabeledExample> pool;
    if (config.use_curriculum) {
      pool = curriculum.EpochPool(stage_cap);
    } else {
      const std::size_t budget = curriculum.EpochPool(stage_cap).size();
      for (auto i : order_rng.SampleWithoutReplacement(full.size(), budget)) {
        pool.push_back(full[i]);
      }
    }
    order_rng.Shuffle(pool);

    GrpoEpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.prompts = pool.size();
    std::size_t samples = 0;
    std::size_t format_failures = 0;
    double reward_sum = 0.0;
    double kl_sum = 0.0;
    double language_sum = 0.0;

    struct Item {
      std::vector<TokenId> prompt;
      std::vector<GenerationRecord> group;
      std::vector<double> advantages;
    };
    for (std::size_t start = 0; start < pool.size();
         start += config.prompts_per_batch) {
      const std::size_t end =
          std::min(pool.size(), start + config.prompts_per_batch);
      const std::uint64_t batch_seed = DeriveSeed(sample_seed, batch_counter++);
      // theta is pi_old for this batch; its log-probabilities are recorded
      // on every sample.
      std::vector<Item> items;
      items.reserve(end - start);
      for (std::size_t p = start; p < end; ++p) {
        Item item;
        item.prompt = PromptTokens(theta, pool[p].text);
        item.group = SampleGroup(theta, item.prompt, config.group_size,
                                 DeriveSeed(batch_seed, p - start), pool[p].id);
        std::vector<double> totals;
        totals.reserve(item.group.size());
        for (const auto& record : item.group) {
          const RewardBreakdown r = rewards.Evaluate(pool[p], record);
          totals.push_back(r.total);
          reward_sum += r.total;
          language_sum += r.r_language;
          if (!record.verdict) ++format_failures;
          kl_sum += KlPenalty(theta, ref, record, item.prompt);
          ++samples;
        }
        item.advantages = ComputeAdvantages(totals, config.std_floor);
        items.push_back(std::move(item));
      }
      const double scale = 1.0 / static_cast<double>(items.size());
      for (int step = 0; step < config.inner_steps; ++step) {
        SparseGradient grad(theta.vocab_size());
        for (const auto& item : items) {
          AccumulateObjectiveGradient(theta, ref, item.prompt, item.group,
                                      item.advantages, config, scale, grad);
        }
        double step_size = config.learning_rate;
        if (config.max_grad_norm > 0.0) {
          const double norm = std::sqrt(grad.SquaredNorm());
          if (norm > config.max_grad_norm) {
            step_size *= config.max_grad_norm / norm;
          }
        }
        grad.ApplyTo(theta.params(), step_size);
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(samples, 1));
    metrics.mean_reward = reward_sum / n;
    metrics.mean_kl = kl_sum / n;
    metrics.format_failure_rate = static_cast<double>(format_failures) / n;
    metrics.mean_language_reward = language_sum / n;
    metrics.eval_mean_reward = EvaluateMeanReward(
        theta, eval_pool, rewards, config.group_size, eval_seed);
    result.metrics.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
  return result;
}

}  // namespace polyguard
