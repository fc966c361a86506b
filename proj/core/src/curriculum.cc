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

#include "polyguard/curriculum.h"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "polyguard/error.h"

namespace polyguard {

void ValidateDifficultyConfig(const DifficultyConfig& config) {
  if (!(0.0 < config.t2 && config.t2 < config.t1 && config.t1 < 1.0)) {
    throw ValidationError("t1/t2", "require 0 < t2 < t1 < 1");
  }
}

int DifficultyLevel(double cosine, const DifficultyConfig& config) {
  if (cosine > config.t1) return 0;
  if (cosine > config.t2) return 1;
  return 2;
}

VariantResult MakeVariants(const LabeledExample& example,
                           const GeneratorClient& generator) {
  if (example.lang.is_english()) {
    throw Error("variants are for target languages");
  }
  if (!example.parallel_id) {
    throw Error("make_variants: " + example.id + " has no parallel_id");
  }
  VariantResult result;
  const VariantPair pair = generator.MakeVariants(example.text, example.lang);
  int index = 0;
  for (const Reply<std::string>* reply : {&pair.first, &pair.second}) {
    ++index;
    if (!reply->ok()) {
      result.refusals.push_back(example.id + " variant " +
                                std::to_string(index) + ": " +
                                reply->refusal().reason);
      continue;
    }
    LabeledExample variant;
    variant.id = example.id + "-v" + std::to_string(index);
    variant.lang = example.lang;
    variant.text = reply->value();
    variant.label = example.label;
    variant.parallel_id = example.parallel_id;
    variant.source = ExampleSource::kVariant;
    result.variants.push_back(std::move(variant));
  }
  return result;
}

DifficultyScore ScoreDifficulty(const LabeledExample& prompt,
                                const LabeledExample& english,
                                const BackTranslator& back_translator,
                                const Embedder& embedder,
                                const DifficultyConfig& config) {
  if (!english.lang.is_english()) {
    throw Error("score_difficulty: reference " + english.id +
                " is not English");
  }
  if (prompt.lang.is_english()) return {0, std::nullopt};
  if (prompt.parallel_id != english.id) {
    throw Error("score_difficulty: " + prompt.id + " is not parallel to " +
                english.id);
  }
  auto back = back_translator.BackTranslate(prompt.text, prompt.lang);
  if (!back.ok()) {
    throw Error("back-translation refused for " + prompt.id + ": " +
                back.refusal().reason);
  }
  const double cosine = CosineSimilarity(embedder.Embed(back.value()),
                                         embedder.Embed(english.text));
  return {DifficultyLevel(cosine, config), cosine};
}

Curriculum::Curriculum(std::array<std::vector<LabeledExample>, kStages> stages,
                       std::map<std::string, double> cosines)
    : stages_(std::move(stages)), cosines_(std::move(cosines)) {}

const std::vector<LabeledExample>& Curriculum::stage(int s) const {
  if (s < 1 || s > kStages) throw Error("stage out of range");
  return stages_[s - 1];
}

std::vector<LabeledExample> Curriculum::EpochPool(int epoch) const {
  if (epoch < 1) throw Error("epochs are 1-based");
  std::vector<LabeledExample> pool;
  for (int s = 1; s <= std::min(epoch, kStages); ++s) {
    pool.insert(pool.end(), stages_[s - 1].begin(), stages_[s - 1].end());
  }
  return pool;
}

std::size_t Curriculum::size() const {
  std::size_t n = 0;
  for (const auto& stage : stages_) n += stage.size();
  return n;
}

std::optional<double> Curriculum::cosine(const std::string& id) const {
  auto it = cosines_.find(id);
  if (it == cosines_.end()) return std::nullopt;
  return it->second;
}

void Curriculum::Validate() const {
  std::set<std::string> seen;
  for (int s = 0; s < kStages; ++s) {
    for (const auto& example : stages_[s]) {
      ValidateExample(example);
      if (!seen.insert(example.id).second) {
        throw ValidationError("stage", "id " + example.id +
                                           " appears in more than one stage");
      }
      if (example.difficulty != s) {
        throw ValidationError("difficulty",
                              "record " + example.id + " in stage " +
                                  std::to_string(s + 1) +
                                  " has the wrong difficulty");
      }
    }
  }
}

Curriculum BuildSchedule(const Dataset& examples, const Dataset& english_seed,
                         const std::map<std::string, double>& cosines) {
  std::array<std::vector<LabeledExample>, Curriculum::kStages> stages;
  std::set<std::string> placed;
  for (const auto& example : examples) {
    LabeledExample copy = example;
    if (copy.lang.is_english()) {
      copy.difficulty = 0;
    } else if (!copy.difficulty) {
      throw Error("unscored example: " + copy.id);
    }
    ValidateExample(copy);
    placed.insert(copy.id);
    stages[*copy.difficulty].push_back(std::move(copy));
  }
  for (const auto& seed : english_seed) {
    if (!seed.lang.is_english()) {
      throw Error("English seed set contains " + seed.id + " (" +
                  seed.lang.str() + ")");
    }
    if (!placed.insert(seed.id).second) continue;
    LabeledExample copy = seed;
    copy.difficulty = 0;
    stages[0].push_back(std::move(copy));
  }
  std::map<std::string, double> kept;
  for (const auto& [id, cosine] : cosines) {
    if (placed.count(id) != 0) kept.emplace(id, cosine);
  }
  Curriculum curriculum(std::move(stages), std::move(kept));
  curriculum.Validate();
  return curriculum;
}

ScoredPool PrepareCurriculumPool(const Dataset& translated,
                                 const Dataset& english_seed,
                                 const ClientSet& clients,
                                 const DifficultyConfig& config) {
  ValidateDifficultyConfig(config);
  ScoredPool pool;
  auto score_into = [&](LabeledExample example, const LabeledExample& en) {
    try {
      const DifficultyScore score =
          ScoreDifficulty(example, en, *clients.back_translator,
                          *clients.embedder, config);
      example.difficulty = score.level;
      if (score.cosine) pool.cosines[example.id] = *score.cosine;
      ++pool.report.per_level[score.level];
      pool.examples.Add(std::move(example));
    } catch (const Error& e) {
      // A refusal is not evidence of difficulty; leave the prompt out.
      ++pool.report.excluded;
      pool.report.notes.push_back(e.what());
    }
  };
  for (const auto& example : translated) {
    if (example.lang.is_english()) continue;
    ++pool.report.inputs;
    const LabeledExample* en =
        example.parallel_id ? english_seed.Find(*example.parallel_id) : nullptr;
    if (en == nullptr) {
      throw Error("curriculum: no English source for " + example.id);
    }
    VariantResult variants = MakeVariants(example, *clients.generator);
    pool.report.variant_refusals += variants.refusals.size();
    pool.report.notes.insert(pool.report.notes.end(),
                             variants.refusals.begin(),
                             variants.refusals.end());
    score_into(example, *en);
    for (auto& variant : variants.variants) {
      ++pool.report.variants;
      score_into(std::move(variant), *en);
    }
  }
  return pool;
}

void WriteCurriculumFile(const Curriculum& curriculum,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (int s = 1; s <= Curriculum::kStages; ++s) {
    for (const auto& example : curriculum.stage(s)) {
      auto record = nlohmann::ordered_json::parse(SerializeExample(example));
      record["stage"] = s;
      const auto cosine = curriculum.cosine(example.id);
      record["cosine"] = cosine ? nlohmann::ordered_json(*cosine)
                                : nlohmann::ordered_json(nullptr);
      out << record.dump() << '\n';
    }
  }
}

Curriculum ReadCurriculumFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::array<std::vector<LabeledExample>, Curriculum::kStages> stages;
  std::map<std::string, double> cosines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto record = nlohmann::ordered_json::parse(line);
    const int stage = record.at("stage").get<int>();
    if (stage < 1 || stage > Curriculum::kStages) {
      throw ValidationError("stage", "out of range");
    }
    if (!record["cosine"].is_null()) {
      cosines[record.at("id").get<std::string>()] =
          record["cosine"].get<double>();
    }
    record.erase("stage");
    record.erase("cosine");
    stages[stage - 1].push_back(ParseExample(record.dump()));
  }
  Curriculum curriculum(std::move(stages), std::move(cosines));
  curriculum.Validate();
  return curriculum;
}

}  // namespace polyguard
