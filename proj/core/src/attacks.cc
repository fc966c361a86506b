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

#include "polyguard/attacks.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "polyguard/error.h"
#include "polyguard/random.h"

namespace polyguard {

std::string_view ToString(AttackKind kind) {
  return kind == AttackKind::kCsrt ? "csrt" : "sandwich";
}

std::optional<AttackKind> ParseAttackKind(std::string_view text) {
  if (text == "csrt") return AttackKind::kCsrt;
  if (text == "sandwich") return AttackKind::kSandwich;
  return std::nullopt;
}

LabeledExample AttackExample::ToExample() const {
  LabeledExample example;
  example.id = base_id + "-" + std::string(ToString(kind));
  example.lang = lang;
  example.text = text;
  example.label = label;
  example.source = ExampleSource::kAttack;
  return example;
}

SandwichTemplate LoadSandwichTemplate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path.string());
  const auto j = nlohmann::json::parse(in);
  SandwichTemplate tmpl;
  tmpl.header = j.at("header").get<std::string>();
  tmpl.footer = j.at("footer").get<std::string>();
  return tmpl;
}

void SaveSandwichTemplate(const SandwichTemplate& tmpl,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  nlohmann::ordered_json j;
  j["header"] = tmpl.header;
  j["footer"] = tmpl.footer;
  out << j.dump(2) << '\n';
}

void ValidateSandwichConfig(const SandwichConfig& config) {
  if (config.benign_corpus.empty()) {
    throw ValidationError("benign_corpus", "must not be empty");
  }
  if (config.k < 1) throw ValidationError("k", "must be >= 1");
}

std::vector<BenignQuestion> BenignFromDataset(const Dataset& dataset) {
  std::vector<BenignQuestion> corpus;
  corpus.reserve(dataset.size());
  for (const auto& example : dataset) {
    corpus.push_back({example.text, example.lang});
  }
  return corpus;
}

AttackExample CodeSwitch(const LabeledExample& en, const LabeledExample& other,
                         const GeneratorClient& generator) {
  if (!en.lang.is_english()) {
    throw Error("code_switch: " + en.id + " is not English");
  }
  if (other.lang.is_english() || other.parallel_id != en.id) {
    throw Error("code_switch: " + other.id + " is not a translation of " +
                en.id);
  }
  if (other.label != en.label) {
    throw Error("code_switch: labels differ between " + en.id + " and " +
                other.id);
  }
  auto mixed = generator.CodeSwitch(en.text, other.text);
  if (!mixed.ok()) {
    throw Error("code_switch refused for " + other.id + ": " +
                mixed.refusal().reason);
  }
  return {other.id, AttackKind::kCsrt, mixed.value(), en.label, other.lang};
}

AttackExample Sandwich(const LabeledExample& prompt,
                       const SandwichConfig& config, std::uint64_t seed) {
  ValidateSandwichConfig(config);
  const std::size_t need = 2 * config.k;
  if (config.benign_corpus.size() < need) {
    throw Error("sandwich: benign corpus has " +
                std::to_string(config.benign_corpus.size()) +
                " entries, need " + std::to_string(need));
  }
  Rng rng(seed);
  const auto picks =
      rng.SampleWithoutReplacement(config.benign_corpus.size(), need);
  std::string text = config.tmpl.header;
  auto line = [&text](std::string_view s) {
    if (!text.empty()) text.push_back('\n');
    text += s;
  };
  for (std::size_t i = 0; i < config.k; ++i) {
    line(config.benign_corpus[picks[i]].text);
  }
  line(prompt.text);
  for (std::size_t i = config.k; i < need; ++i) {
    line(config.benign_corpus[picks[i]].text);
  }
  line(config.tmpl.footer);
  return {prompt.id, AttackKind::kSandwich, text, prompt.label, prompt.lang};
}

Dataset MakeCsrtAttacks(const Dataset& dataset, const GeneratorClient& generator,
                        AttackReport* report) {
  AttackReport local;
  Dataset out;
  for (const auto& example : dataset) {
    if (example.lang.is_english()) continue;
    ++local.inputs;
    const LabeledExample* en =
        example.parallel_id ? dataset.Find(*example.parallel_id) : nullptr;
    if (en == nullptr || !en->lang.is_english() || en->label != example.label) {
      ++local.skipped;
      continue;
    }
    auto mixed = generator.CodeSwitch(en->text, example.text);
    if (!mixed.ok()) {
      ++local.refusals;
      continue;
    }
    AttackExample attack{example.id, AttackKind::kCsrt, mixed.value(),
                         example.label, example.lang};
    out.Add(attack.ToExample());
    ++local.generated;
  }
  if (report != nullptr) *report = local;
  return out;
}

Dataset MakeSandwichAttacks(const Dataset& dataset,
                            const SandwichConfig& config, std::uint64_t seed,
                            AttackReport* report) {
  ValidateSandwichConfig(config);
  AttackReport local;
  Dataset out;
  for (const auto& example : dataset) {
    ++local.inputs;
    out.Add(Sandwich(example, config, DeriveSeed(seed, example.id)).ToExample());
    ++local.generated;
  }
  if (report != nullptr) *report = local;
  return out;
}

}  // namespace polyguard
