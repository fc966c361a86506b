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

#include "polyguard/dataset.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "polyguard/error.h"

namespace polyguard {
namespace {

using ordered_json = nlohmann::ordered_json;

template <typename T>
ordered_json OptionalToJson(const std::optional<T>& value) {
  if (!value) return nullptr;
  return *value;
}

const ordered_json& RequireField(const ordered_json& record,
                                 const char* field) {
  auto it = record.find(field);
  if (it == record.end()) throw ValidationError(field, "missing");
  return *it;
}

std::string RequireString(const ordered_json& record, const char* field) {
  const auto& value = RequireField(record, field);
  if (!value.is_string()) throw ValidationError(field, "must be a string");
  return value.get<std::string>();
}

std::optional<std::string> OptionalString(const ordered_json& record,
                                          const char* field) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(field, "must be a string");
  return it->get<std::string>();
}

SafetyLabel ParseLabelField(const ordered_json& record) {
  auto label = ParseSafetyLabel(RequireString(record, "label"));
  if (!label) throw ValidationError("label", "must be \"safe\" or \"unsafe\"");
  return *label;
}

LabeledExample FromJson(const ordered_json& record) {
  if (!record.is_object()) throw ValidationError("record", "not an object");
  LabeledExample example;
  example.id = RequireString(record, "id");
  example.lang = LanguageCode(RequireString(record, "lang"));
  example.text = RequireString(record, "text");
  example.label = ParseLabelField(record);
  example.reasoning_en = OptionalString(record, "reasoning_en");
  example.reasoning_native = OptionalString(record, "reasoning_native");
  if (auto it = record.find("difficulty");
      it != record.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      throw ValidationError("difficulty", "must be an integer");
    }
    example.difficulty = it->get<int>();
  }
  example.parallel_id = OptionalString(record, "parallel_id");
  const std::string source = RequireString(record, "source");
  auto parsed = ParseExampleSource(source);
  if (!parsed) throw ValidationError("source", "unknown source '" + source + "'");
  example.source = *parsed;
  ValidateExample(example);
  return example;
}

}  // namespace

Dataset::Dataset(std::vector<LabeledExample> examples) {
  examples_.reserve(examples.size());
  for (auto& example : examples) Add(std::move(example));
}

void Dataset::Add(LabeledExample example) {
  if (index_.count(example.id) != 0) {
    throw Error("id collision: " + example.id);
  }
  index_.emplace(example.id, examples_.size());
  examples_.push_back(std::move(example));
}

void Dataset::Append(const Dataset& other) {
  for (const auto& example : other) Add(example);
}

const LabeledExample* Dataset::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &examples_[it->second];
}

std::size_t Dataset::EnglishCount() const {
  std::size_t count = 0;
  for (const auto& example : examples_) count += example.lang.is_english();
  return count;
}

std::map<std::string, std::size_t> Dataset::PerLanguageCounts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& example : examples_) {
    if (!example.lang.is_english()) ++counts[example.lang.str()];
  }
  return counts;
}

void ValidateDataset(const Dataset& dataset) {
  for (const auto& example : dataset) {
    ValidateExample(example);
    if (!example.parallel_id) continue;
    const LabeledExample* seed = dataset.Find(*example.parallel_id);
    if (seed == nullptr) {
      throw ValidationError("parallel_id", "record " + example.id +
                                               " references unknown id " +
                                               *example.parallel_id);
    }
    if (!seed->lang.is_english()) {
      throw ValidationError("parallel_id", "record " + example.id +
                                               " references non-English " +
                                               seed->id);
    }
  }
}

std::string SerializeExample(const LabeledExample& example) {
  ordered_json record;
  record["id"] = example.id;
  record["lang"] = example.lang.str();
  record["text"] = example.text;
  record["label"] = std::string(ToString(example.label));
  record["reasoning_en"] = OptionalToJson(example.reasoning_en);
  record["reasoning_native"] = OptionalToJson(example.reasoning_native);
  record["difficulty"] = OptionalToJson(example.difficulty);
  record["parallel_id"] = OptionalToJson(example.parallel_id);
  record["source"] = std::string(ToString(example.source));
  return record.dump();
}

LabeledExample ParseExample(std::string_view line) {
  ordered_json record;
  try {
    record = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("record", std::string("malformed JSON: ") + e.what());
  }
  return FromJson(record);
}

void WriteDataset(const Dataset& dataset, std::ostream& out) {
  for (const auto& example : dataset) out << SerializeExample(example) << '\n';
}

Dataset ReadDataset(std::istream& in) {
  Dataset dataset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      dataset.Add(ParseExample(line));
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), "line " + std::to_string(line_no) +
                                           ": " + e.what());
    }
  }
  return dataset;
}

void WriteDatasetFile(const Dataset& dataset,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  WriteDataset(dataset, out);
}

Dataset ReadDatasetFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  return ReadDataset(in);
}

Dataset IngestCorpusFile(const std::filesystem::path& path,
                         const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  Dataset dataset;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto record = ordered_json::parse(line);
    if (options.min_toxicity) {
      auto it = record.find("toxicity");
      if (it == record.end() || !it->is_number()) {
        throw ValidationError("toxicity", "filter set but field missing");
      }
      if (it->get<double>() <= *options.min_toxicity) continue;
    }
    LabeledExample example;
    example.id = RequireString(record, "id");
    example.lang = LanguageCode(RequireString(record, "lang"));
    example.text = RequireString(record, "text");
    example.label = ParseLabelField(record);
    example.source = ExampleSource::kSeed;
    ValidateExample(example);
    dataset.Add(std::move(example));
  }
  return dataset;
}

}  // namespace polyguard
