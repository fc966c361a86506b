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

#ifndef POLYGUARD_SYNTHGEN_H_
#define POLYGUARD_SYNTHGEN_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyguard/clients.h"
#include "polyguard/dataset.h"

namespace polyguard {

struct SynthConfig {
  std::vector<LanguageCode> target_langs;
  std::size_t subsample_n = 0;
  std::uint64_t seed = 0;
  // When false, label conflicts are kept in the report's quarantine list
  // for audit. They never enter the output either way.
  bool drop_on_conflict = true;
  // Seed ids that may not be drawn, used to resample a disjoint subset.
  std::set<std::string> exclude_ids;
};

// Throws ValidationError on an invalid configuration for a seed set of
// `seed_size` examples.
void ValidateSynthConfig(const SynthConfig& config, std::size_t seed_size);

struct LanguageStats {
  std::size_t attempted = 0;
  std::size_t kept = 0;
  std::size_t refusals = 0;
  std::size_t conflicts = 0;
  std::size_t reasoning_refusals = 0;
};

struct SynthReport {
  std::size_t annotated = 0;
  std::size_t annotation_refusals = 0;
  std::vector<std::string> subsampled_ids;
  std::map<std::string, LanguageStats> per_language;
  std::size_t assembled = 0;
  std::size_t orphaned = 0;
  // "<id>: <reason>" for every dropped record, in processing order.
  std::vector<std::string> dropped;
  std::vector<LabeledExample> quarantined;

  nlohmann::ordered_json ToJson() const;
};

// Adds English reasoning to every English seed. Refusals drop the example.
Dataset AnnotateReasoning(const Dataset& seed, const GeneratorClient& generator,
                          SynthReport& report);

// Subsamples, translates into every target language, reassesses each
// translation blind, and keeps only label-preserving translations.
Dataset TranslateAndFilter(const Dataset& seed, const SynthConfig& config,
                           const GeneratorClient& generator,
                           SynthReport& report);

// Adds English and native reasoning to every translation and concatenates
// the English set with the translations. Throws Error("id collision: ...")
// on duplicate ids.
Dataset AssembleMultilingualDataset(const Dataset& english,
                                    const Dataset& translated,
                                    const GeneratorClient& generator,
                                    SynthReport& report);

// True when every non-English example with a parallel_id carries the label
// of its English counterpart.
bool LabelsConserved(const Dataset& dataset);

}  // namespace polyguard

#endif  // POLYGUARD_SYNTHGEN_H_
