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

#include "polyguard/synthgen.h"

#include <algorithm>

#include "polyguard/error.h"
#include "polyguard/random.h"

namespace polyguard {

void ValidateSynthConfig(const SynthConfig& config, std::size_t seed_size) {
  for (const auto& lang : config.target_langs) {
    if (lang.is_english()) {
      throw ValidationError("target_langs", "must not include en");
    }
  }
  std::set<LanguageCode> unique(config.target_langs.begin(),
                                config.target_langs.end());
  if (unique.size() != config.target_langs.size()) {
    throw ValidationError("target_langs", "duplicate language");
  }
  if (config.subsample_n > seed_size) {
    throw ValidationError("subsample_n",
                          std::to_string(config.subsample_n) +
                              " exceeds the seed set size " +
                              std::to_string(seed_size));
  }
}

nlohmann::ordered_json SynthReport::ToJson() const {
  nlohmann::ordered_json out;
  out["annotated"] = annotated;
  out["annotation_refusals"] = annotation_refusals;
  out["subsampled"] = subsampled_ids.size();
  nlohmann::ordered_json langs = nlohmann::ordered_json::object();
  for (const auto& [lang, stats] : per_language) {
    langs[lang] = {{"attempted", stats.attempted},
                   {"kept", stats.kept},
                   {"refusals", stats.refusals},
                   {"conflicts", stats.conflicts},
                   {"reasoning_refusals", stats.reasoning_refusals}};
  }
  out["per_language"] = std::move(langs);
  out["assembled"] = assembled;
  out["orphaned"] = orphaned;
  out["quarantined"] = quarantined.size();
  out["dropped"] = dropped;
  return out;
}

Dataset AnnotateReasoning(const Dataset& seed, const GeneratorClient& generator,
                          SynthReport& report) {
  Dataset out;
  for (const auto& example : seed) {
    if (!example.lang.is_english()) {
      throw Error("annotate_reasoning: " + example.id + " is not English");
    }
    auto reasoning =
        generator.Reason(example.text, example.label, example.lang);
    if (!reasoning.ok() || reasoning.value().empty()) {
      ++report.annotation_refusals;
      report.dropped.push_back(
          example.id + ": reasoning refused (" +
          (reasoning.ok() ? std::string("empty") : reasoning.refusal().reason) +
          ")");
      continue;
    }
    LabeledExample annotated = example;
    annotated.reasoning_en = reasoning.value();
    out.Add(std::move(annotated));
    ++report.annotated;
  }
  return out;
}

Dataset TranslateAndFilter(const Dataset& seed, const SynthConfig& config,
                           const GeneratorClient& generator,
                           SynthReport& report) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < seed.size(); ++i) {
    const auto& example = seed.examples()[i];
    if (!example.lang.is_english()) {
      throw Error("translate_and_filter: " + example.id + " is not English");
    }
    if (config.exclude_ids.count(example.id) == 0) eligible.push_back(i);
  }
  ValidateSynthConfig(config, eligible.size());

  Rng rng(config.seed);
  auto picks = rng.SampleWithoutReplacement(eligible.size(), config.subsample_n);
  std::sort(picks.begin(), picks.end());

  Dataset out;
  for (std::size_t pick : picks) {
    const auto& example = seed.examples()[eligible[pick]];
    report.subsampled_ids.push_back(example.id);
    for (const auto& lang : config.target_langs) {
      auto& stats = report.per_language[lang.str()];
      ++stats.attempted;
      const std::string id = example.id + "-" + lang.str();
      auto translation = generator.Translate(example.text, lang);
      if (!translation.ok()) {
        ++stats.refusals;
        report.dropped.push_back(id + ": translation refused (" +
                                 translation.refusal().reason + ")");
        continue;
      }
      LabeledExample translated;
      translated.id = id;
      translated.lang = lang;
      translated.text = translation.value();
      translated.label = example.label;
      translated.parallel_id = example.id;
      translated.source = ExampleSource::kTranslated;

      auto reassessed = generator.Reassess(translated.text);
      if (!reassessed.ok()) {
        ++stats.refusals;
        report.dropped.push_back(id + ": reassessment refused (" +
                                 reassessed.refusal().reason + ")");
        continue;
      }
      if (reassessed.value() != example.label) {
        ++stats.conflicts;
        report.dropped.push_back(id + ": label conflict");
        if (!config.drop_on_conflict) report.quarantined.push_back(translated);
        continue;
      }
      ++stats.kept;
      out.Add(std::move(translated));
    }
  }
  return out;
}

Dataset AssembleMultilingualDataset(const Dataset& english,
                                    const Dataset& translated,
                                    const GeneratorClient& generator,
                                    SynthReport& report) {
  Dataset out = english;
  for (const auto& example : translated) {
    if (!example.parallel_id) {
      throw Error("assemble: " + example.id + " has no parallel_id");
    }
    if (out.Contains(example.id)) throw Error("id collision: " + example.id);
    const LabeledExample* seed = english.Find(*example.parallel_id);
    if (seed == nullptr) {
      ++report.orphaned;
      report.dropped.push_back(example.id + ": English seed " +
                               *example.parallel_id + " not annotated");
      continue;
    }
    auto& stats = report.per_language[example.lang.str()];
    auto en = generator.Reason(example.text, example.label,
                               LanguageCode::English());
    auto native = generator.Reason(example.text, example.label, example.lang);
    if (!en.ok() || !native.ok() || en.value().empty() ||
        native.value().empty()) {
      ++stats.reasoning_refusals;
      report.dropped.push_back(example.id + ": reasoning refused");
      continue;
    }
    LabeledExample full = example;
    full.reasoning_en = en.value();
    full.reasoning_native = native.value();
    out.Add(std::move(full));
    ++report.assembled;
  }
  ValidateDataset(out);
  return out;
}

bool LabelsConserved(const Dataset& dataset) {
  for (const auto& example : dataset) {
    if (example.lang.is_english() || !example.parallel_id) continue;
    const LabeledExample* seed = dataset.Find(*example.parallel_id);
    if (seed == nullptr || seed->label != example.label) return false;
  }
  return true;
}

}  // namespace polyguard
