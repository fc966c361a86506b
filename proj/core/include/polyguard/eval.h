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

#ifndef POLYGUARD_EVAL_H_
#define POLYGUARD_EVAL_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyguard/attacks.h"
#include "polyguard/dataset.h"
#include "polyguard/policy.h"
#include "polyguard/remote.h"

namespace polyguard {

struct Prediction {
  std::string id;
  std::optional<SafetyLabel> pred;  // absent: abstained
  std::string raw;

  bool operator==(const Prediction&) const = default;
};

class PredictionSet {
 public:
  // Throws on a duplicate id.
  void Add(Prediction prediction);
  const Prediction* Find(std::string_view id) const;
  std::size_t size() const { return predictions_.size(); }
  auto begin() const { return predictions_.begin(); }
  auto end() const { return predictions_.end(); }

  bool operator==(const PredictionSet& other) const {
    return predictions_ == other.predictions_;
  }

 private:
  std::vector<Prediction> predictions_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One {"id", "pred", "raw"} object per line; "pred" is "safe", "unsafe" or
// "abstain".
void WritePredictions(const PredictionSet& predictions, std::ostream& out);
PredictionSet ReadPredictions(std::istream& in);
void WritePredictionsFile(const PredictionSet& predictions,
                          const std::filesystem::path& path);
PredictionSet ReadPredictionsFile(const std::filesystem::path& path);

// Positive class is unsafe; abstentions are scored as safe.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t abstain = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  void Add(SafetyLabel gold, std::optional<SafetyLabel> pred);
  ConfusionCounts& operator+=(const ConfusionCounts& other);
  bool operator==(const ConfusionCounts&) const = default;
};

// 2TP / (2TP + FP + FN), 0 when the denominator is 0.
double F1FromCounts(const ConfusionCounts& counts);

// Every gold example must be predicted; predictions for ids outside `gold`
// throw.
ConfusionCounts CountConfusion(const PredictionSet& predictions,
                               const Dataset& gold);
double F1Score(const PredictionSet& predictions, const Dataset& gold);

struct ReportCell {
  std::string key;  // language code or difficulty level
  double f1 = 0.0;
  std::optional<ConfusionCounts> counts;  // absent for ingested cells
};

struct EvalReport {
  std::vector<ReportCell> languages;  // ordered by language code
  std::optional<ReportCell> id;
  std::optional<ReportCell> ood;
  std::optional<ReportCell> overall;
  std::vector<ReportCell> difficulties;  // examples with a difficulty only
  double abstain_rate = 0.0;
  std::map<std::string, double> deltas;  // attack deltas as fractions

  const ReportCell* Language(std::string_view lang) const;

  nlohmann::ordered_json ToJson() const;
  // Accepts the ToJson form; cells may carry only "f1" (a fraction) or
  // "f1_pct" (a percentage).
  static EvalReport FromJson(const nlohmann::json& j);
  // Fixed-width table with F1 as percentages at 2 decimals.
  std::string TextTable() const;
  // "section,key,f1,tp,fp,fn,tn,abstain" rows.
  std::string Csv() const;
};

std::set<LanguageCode> DefaultIdLanguages();

EvalReport BreakdownReport(const PredictionSet& predictions,
                           const Dataset& gold,
                           const std::set<LanguageCode>& id_langs =
                               DefaultIdLanguages());

// csrt: F1 of the "en" cell of `original` minus the mean F1 of the language
// cells of `attacked`. sandwich: mean language-cell F1 of `original` minus
// that of `attacked`. Both as fractions.
double AttackDelta(const EvalReport& original, const EvalReport& attacked,
                   AttackKind mode);

// Percentage with two decimals, e.g. 0.0154 -> "1.54".
std::string FormatPercent(double fraction);

class Guardrail {
 public:
  virtual ~Guardrail() = default;
  virtual Prediction Classify(const LabeledExample& example) const = 0;
};

// Greedy decoding of a local policy.
class PolicyGuardrail final : public Guardrail {
 public:
  explicit PolicyGuardrail(PolicySnapshot policy)
      : policy_(std::move(policy)) {}
  Prediction Classify(const LabeledExample& example) const override;

 private:
  PolicySnapshot policy_;
};

// POST /classify {text} -> {verdict, reasoning}. Refusals and missing
// verdicts abstain.
class RemoteGuardrail final : public Guardrail {
 public:
  explicit RemoteGuardrail(Endpoint endpoint)
      : endpoint_(std::move(endpoint)) {}
  Prediction Classify(const LabeledExample& example) const override;

 private:
  Endpoint endpoint_;
};

PredictionSet RunGuardrail(const Guardrail& guardrail, const Dataset& data);

}  // namespace polyguard

#endif  // POLYGUARD_EVAL_H_
