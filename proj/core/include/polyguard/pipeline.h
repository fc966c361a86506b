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

#ifndef POLYGUARD_PIPELINE_H_
#define POLYGUARD_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyguard/attacks.h"
#include "polyguard/clients.h"
#include "polyguard/config.h"
#include "polyguard/curriculum.h"
#include "polyguard/grpo.h"
#include "polyguard/rewards.h"
#include "polyguard/sft.h"
#include "polyguard/synthgen.h"
#include "polyguard/toyworld.h"

namespace polyguard {

inline const std::vector<std::string>& StageOrder() {
  static const std::vector<std::string> kStages = {
      "synth", "sft", "curriculum", "grpo", "attack", "eval"};
  return kStages;
}

struct ToySettings {
  std::uint64_t world_seed = 7;
  std::size_t corpus_size = 500;
  double refusal_rate = 0.0;
  double flip_rate = 0.0;
};

// Upstream artifacts for stages that run without their producer.
struct InputPaths {
  std::filesystem::path seed_file;  // English seeds; toy corpus when empty
  std::optional<double> min_toxicity;
  std::filesystem::path benign_file;
  std::filesystem::path synth_dataset;
  std::filesystem::path synth_heldout;
  std::filesystem::path ref_policy;
  std::filesystem::path curriculum;
  std::filesystem::path policy;
  std::filesystem::path predictions;
  std::filesystem::path gold;
};

struct RunConfig {
  std::set<std::string> stages = {StageOrder().begin(), StageOrder().end()};
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = "runs";
  std::string backend = "toyworld";
  ToySettings toy;
  InputPaths input;
  // Held-out English seeds; they and their translations are never trained
  // on.
  std::size_t holdout = 100;
  std::vector<LanguageCode> langs = {LanguageCode("ar"), LanguageCode("es"),
                                     LanguageCode("zh"), LanguageCode("ru")};
  std::size_t synth_n = 200;
  bool drop_on_conflict = true;
  // Second, disjoint seed subsample translated for the curriculum.
  std::size_t curriculum_n = 200;
  DifficultyConfig difficulty;
  RewardConfig reward;
  int context_order = 2;
  int max_len = 24;
  SftConfig sft;
  GrpoConfig grpo;
  std::size_t attack_k = 2;
  std::filesystem::path attack_template;
  LanguageCode benign_lang = LanguageCode("ru");
  std::size_t benign_size = 50;
  std::set<LanguageCode> id_langs = {LanguageCode("en"), LanguageCode("ar"),
                                     LanguageCode("es"), LanguageCode("zh"),
                                     LanguageCode("ru")};
};

// Unknown keys are rejected. Missing keys keep their defaults.
RunConfig RunConfigFromKeyValue(const KeyValueConfig& kv);
// Every key with its value; round trips through RunConfigFromKeyValue.
KeyValueConfig RunConfigToKeyValue(const RunConfig& config);
void ValidateRunConfig(const RunConfig& config);
// Commented config listing every key at its default.
std::string ReferenceConfigText();

// Reads the grpo.* keys over the defaults; other keys are ignored.
GrpoConfig GrpoConfigFromKeyValue(const KeyValueConfig& kv);
RewardConfig RewardConfigFromKeyValue(const KeyValueConfig& kv);

// Per-stage seed derived from the master seed by stage name.
std::uint64_t StageSeed(std::uint64_t master, std::string_view stage);

struct Backend {
  std::shared_ptr<const ToyBackend> toy;  // null for remote
  ClientSet clients;
};
Backend MakeBackend(const std::string& name, const ToySettings& toy);

// Vocabulary words for a policy: the toy inventory, or every token seen in
// `datasets` for other backends.
std::vector<std::string> PolicyWords(const Backend& backend,
                                     const std::vector<const Dataset*>& datasets);

struct RunResult {
  std::filesystem::path run_dir;
  nlohmann::ordered_json manifest;
};

// First nonexistent "<out_dir>/run-NNNN".
std::filesystem::path NextRunDir(const std::filesystem::path& out_dir);

// Executes the selected stages in order inside a fresh run directory and
// writes manifest.json there. Errors are rethrown as Error("stage <name>:
// ...").
RunResult RunPipeline(const RunConfig& config);

}  // namespace polyguard

#endif  // POLYGUARD_PIPELINE_H_
