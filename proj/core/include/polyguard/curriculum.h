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

#ifndef POLYGUARD_CURRICULUM_H_
#define POLYGUARD_CURRICULUM_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyguard/clients.h"
#include "polyguard/dataset.h"

namespace polyguard {

struct DifficultyConfig {
  double t1 = 0.85;
  double t2 = 0.7;
};

// Requires 0 < t2 < t1 < 1.
void ValidateDifficultyConfig(const DifficultyConfig& config);

// 0 if cosine > t1, 1 if t2 < cosine <= t1, 2 otherwise.
int DifficultyLevel(double cosine, const DifficultyConfig& config);

struct VariantResult {
  std::vector<LabeledExample> variants;  // zero, one or two
  std::vector<std::string> refusals;
};

// Two localized rewrites of a translated prompt; label and parallel_id are
// inherited, difficulty is left unset. Throws for English input.
VariantResult MakeVariants(const LabeledExample& example,
                           const GeneratorClient& generator);

struct DifficultyScore {
  int level = 0;
  std::optional<double> cosine;  // absent for English prompts
};

// Back-translates `prompt` and compares it with its English source. English
// prompts score 0 without any backend call. Throws on back-translation
// refusal or a mismatched pair.
DifficultyScore ScoreDifficulty(const LabeledExample& prompt,
                                const LabeledExample& english,
                                const BackTranslator& back_translator,
                                const Embedder& embedder,
                                const DifficultyConfig& config);

class Curriculum {
 public:
  static constexpr int kStages = 3;

  Curriculum() = default;
  Curriculum(std::array<std::vector<LabeledExample>, kStages> stages,
             std::map<std::string, double> cosines);

  // Stage s (1-based).
  const std::vector<LabeledExample>& stage(int s) const;
  // Union of stages 1..epoch, in stage order.
  std::vector<LabeledExample> EpochPool(int epoch) const;
  std::size_t size() const;
  std::optional<double> cosine(const std::string& id) const;
  const std::map<std::string, double>& cosines() const { return cosines_; }

  // Stage disjointness, stage/difficulty agreement and valid records.
  void Validate() const;

  bool operator==(const Curriculum&) const = default;

 private:
  std::array<std::vector<LabeledExample>, kStages> stages_;
  std::map<std::string, double> cosines_;
};

// Stage 1: difficulty-0 examples plus the English seeds (difficulty set to
// 0). Stage 2: difficulty 1. Stage 3: difficulty 2. Throws naming the first
// non-English example without a difficulty.
Curriculum BuildSchedule(const Dataset& examples, const Dataset& english_seed,
                         const std::map<std::string, double>& cosines = {});

struct CurriculumPrepReport {
  std::size_t inputs = 0;
  std::size_t variants = 0;
  std::size_t variant_refusals = 0;
  std::size_t excluded = 0;  // back-translation failures
  std::array<std::size_t, 3> per_level{};
  std::vector<std::string> notes;
};

struct ScoredPool {
  Dataset examples;  // scored translations and variants
  std::map<std::string, double> cosines;
  CurriculumPrepReport report;
};

// Generates variants for every translation of `translated` and scores the
// translation and both variants against their English source in
// `english_seed`.
ScoredPool PrepareCurriculumPool(const Dataset& translated,
                                 const Dataset& english_seed,
                                 const ClientSet& clients,
                                 const DifficultyConfig& config);

// One dataset record per line plus "stage" and "cosine" members.
void WriteCurriculumFile(const Curriculum& curriculum,
                         const std::filesystem::path& path);
Curriculum ReadCurriculumFile(const std::filesystem::path& path);

}  // namespace polyguard

#endif  // POLYGUARD_CURRICULUM_H_
