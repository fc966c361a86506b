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

#ifndef POLYGUARD_DATASET_H_
#define POLYGUARD_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polyguard/types.h"

namespace polyguard {

// Ordered collection of examples with unique ids.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledExample> examples);

  // Throws Error("id collision: <id>") on duplicates.
  void Add(LabeledExample example);
  void Append(const Dataset& other);

  const std::vector<LabeledExample>& examples() const { return examples_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  auto begin() const { return examples_.begin(); }
  auto end() const { return examples_.end(); }

  const LabeledExample* Find(std::string_view id) const;
  bool Contains(std::string_view id) const { return Find(id) != nullptr; }

  // Number of English examples (the seed size N).
  std::size_t EnglishCount() const;
  // Non-English example count per language (n, or n' for a GRPO resample).
  std::map<std::string, std::size_t> PerLanguageCounts() const;

  bool operator==(const Dataset& other) const {
    return examples_ == other.examples_;
  }

 private:
  std::vector<LabeledExample> examples_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Record invariants plus: every parallel_id resolves to an English example.
void ValidateDataset(const Dataset& dataset);

// One JSON object per line, fields in canonical order; absent optionals are
// written as null so that the canonical form is byte-stable.
std::string SerializeExample(const LabeledExample& example);
LabeledExample ParseExample(std::string_view line);

void WriteDataset(const Dataset& dataset, std::ostream& out);
Dataset ReadDataset(std::istream& in);
void WriteDatasetFile(const Dataset& dataset, const std::filesystem::path& path);
Dataset ReadDatasetFile(const std::filesystem::path& path);

// Reads an external JSONL corpus with fields {id, lang, text, label} and an
// optional numeric `toxicity`. Records with toxicity at or below
// `min_toxicity` are dropped when the threshold is set.
struct IngestOptions {
  std::optional<double> min_toxicity;
};
Dataset IngestCorpusFile(const std::filesystem::path& path,
                         const IngestOptions& options);

}  // namespace polyguard

#endif  // POLYGUARD_DATASET_H_
