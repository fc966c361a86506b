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

#include <sstream>

#include <gtest/gtest.h>

#include "polyguard/error.h"
#include "polyguard/synthgen.h"
#include "polyguard/toyworld.h"

namespace polyguard {
namespace {

const LanguageCode kAr("ar");
const LanguageCode kEs("es");
const LanguageCode kZh("zh");

class SynthTest : public ::testing::Test {
 protected:
  ToyWorld world_;
  Dataset Seeds(std::size_t n, std::uint64_t seed = 1) const {
    return MakeToyCorpus(world_, n, seed);
  }
};

TEST_F(SynthTest, AnnotationAddsReasoningOnly) {
  ToyBackend backend(world_);
  const Dataset seeds = Seeds(3);
  SynthReport report;
  const Dataset out = AnnotateReasoning(seeds, backend, report);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = out.examples()[i];
    const auto& b = seeds.examples()[i];
    ASSERT_TRUE(a.reasoning_en.has_value());
    EXPECT_FALSE(a.reasoning_en->empty());
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.text, b.text);
  }
  EXPECT_EQ(report.annotated, 3u);
  EXPECT_EQ(report.annotation_refusals, 0u);
}

TEST_F(SynthTest, AnnotationRefusalDropsAndCounts) {
  const Dataset seeds = Seeds(3);
  const std::string victim = seeds.examples()[1].text;
  ToyBackendOptions options;
  options.refuse = [victim](std::string_view op, std::string_view input) {
    return op == "reason" && input.substr(0, victim.size()) == victim;
  };
  ToyBackend backend(world_, options);
  SynthReport report;
  EXPECT_EQ(AnnotateReasoning(seeds, backend, report).size(), 2u);
  EXPECT_EQ(report.annotation_refusals, 1u);
  ASSERT_EQ(report.dropped.size(), 1u);
}

TEST_F(SynthTest, AnnotationOfEmptySet) {
  ToyBackend backend(world_);
  SynthReport report;
  EXPECT_TRUE(AnnotateReasoning(Dataset(), backend, report).empty());
  EXPECT_EQ(report.annotated, 0u);
  EXPECT_TRUE(report.dropped.empty());
}

TEST_F(SynthTest, AgreeingReassessorKeepsEverything) {
  ToyBackend backend(world_);
  SynthReport report;
  const SynthConfig config{{kAr, kEs, kZh}, 10, 4};
  const Dataset out = TranslateAndFilter(Seeds(30), config, backend, report);
  EXPECT_EQ(out.size(), 30u);
  for (const auto& e : out) {
    ASSERT_TRUE(e.parallel_id.has_value());
    EXPECT_EQ(e.source, ExampleSource::kTranslated);
  }
  EXPECT_EQ(report.per_language.at("es").kept, 10u);
}

TEST_F(SynthTest, FlippedPairIsDroppedAlone) {
  const Dataset seeds = Seeds(8);
  const std::string flipped =
      ToyTranslate(seeds.examples()[2].text, LanguageCode::English(), kEs, world_);
  ToyBackendOptions options;
  options.flip_reassessment = [flipped](std::string_view p) {
    return p == flipped;
  };
  ToyBackend backend(world_, options);
  SynthReport report;
  const SynthConfig config{{kAr, kEs, kZh}, 8, 1};
  const Dataset out = TranslateAndFilter(seeds, config, backend, report);
  const std::string id = seeds.examples()[2].id;
  EXPECT_FALSE(out.Contains(id + "-es"));
  EXPECT_TRUE(out.Contains(id + "-ar"));
  EXPECT_TRUE(out.Contains(id + "-zh"));
  EXPECT_EQ(out.size(), 23u);
  EXPECT_EQ(report.per_language.at("es").conflicts, 1u);
  EXPECT_TRUE(report.quarantined.empty());
}

TEST_F(SynthTest, QuarantineKeepsConflictsOutOfTheOutput) {
  ToyBackendOptions options;
  options.flip_reassessment = [](std::string_view) { return true; };
  ToyBackend backend(world_, options);
  SynthReport report;
  SynthConfig config{{kAr}, 5, 1};
  config.drop_on_conflict = false;
  EXPECT_TRUE(TranslateAndFilter(Seeds(5), config, backend, report).empty());
  EXPECT_EQ(report.quarantined.size(), 5u);
}

TEST_F(SynthTest, ZeroSubsampleAndConfigErrors) {
  ToyBackend backend(world_);
  SynthReport report;
  EXPECT_TRUE(
      TranslateAndFilter(Seeds(5), SynthConfig{{kAr}, 0, 1}, backend, report)
          .empty());
  EXPECT_THROW(
      TranslateAndFilter(Seeds(5), SynthConfig{{kAr}, 6, 1}, backend, report),
      ValidationError);
  EXPECT_THROW(TranslateAndFilter(Seeds(5),
                                  SynthConfig{{LanguageCode::English()}, 1, 1},
                                  backend, report),
               ValidationError);
}

TEST_F(SynthTest, ExcludedIdsAreNeverDrawn) {
  ToyBackend backend(world_);
  const Dataset seeds = Seeds(10);
  SynthConfig config{{kAr}, 5, 1};
  for (std::size_t i = 0; i < 5; ++i) {
    config.exclude_ids.insert(seeds.examples()[i].id);
  }
  SynthReport report;
  TranslateAndFilter(seeds, config, backend, report);
  for (const auto& id : report.subsampled_ids) {
    EXPECT_EQ(config.exclude_ids.count(id), 0u);
  }
  EXPECT_EQ(report.subsampled_ids.size(), 5u);
}

TEST_F(SynthTest, AssemblyAddsDualReasoning) {
  ToyBackend backend(world_);
  SynthReport report;
  const Dataset en = AnnotateReasoning(Seeds(2), backend, report);
  const Dataset tr =
      TranslateAndFilter(en, SynthConfig{{kAr}, 2, 1}, backend, report);
  const Dataset all = AssembleMultilingualDataset(en, tr, backend, report);
  ASSERT_EQ(all.size(), 4u);
  for (const auto& e : all) {
    if (e.lang.is_english()) continue;
    ASSERT_TRUE(e.reasoning_en && e.reasoning_native);
    EXPECT_EQ(backend.Detect(*e.reasoning_en), LanguageCode::English());
    EXPECT_EQ(backend.Detect(*e.reasoning_native), kAr);
  }
  EXPECT_NO_THROW(ValidateDataset(all));
}

TEST_F(SynthTest, AssemblyKeepsSeedsWithoutTranslations) {
  ToyBackend backend(world_);
  SynthReport report;
  const Dataset en = AnnotateReasoning(Seeds(4), backend, report);
  EXPECT_EQ(AssembleMultilingualDataset(en, Dataset(), backend, report), en);
}

TEST_F(SynthTest, AssemblyRejectsIdCollisions) {
  ToyBackend backend(world_);
  SynthReport report;
  const Dataset en = AnnotateReasoning(Seeds(2), backend, report);
  LabeledExample clash = en.examples()[0];
  clash.lang = kAr;
  clash.parallel_id = en.examples()[1].id;
  clash.source = ExampleSource::kTranslated;
  try {
    AssembleMultilingualDataset(en, Dataset({clash}), backend, report);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("id collision"), std::string::npos);
  }
}

TEST_F(SynthTest, PropertiesOverNoisyBackends) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    ToyBackendOptions options;
    options.refusal_rate = 0.1;
    options.flip_rate = 0.1;
    ToyBackend backend(ToyWorld(ToyWorldOptions{seed, {kAr, kEs}}), options);
    const Dataset seeds = MakeToyCorpus(backend.world(), 60, seed);
    const SynthConfig config{{kAr, kEs}, 30, seed};
    auto run = [&] {
      SynthReport report;
      const Dataset en = AnnotateReasoning(seeds, backend, report);
      const Dataset tr = TranslateAndFilter(en, config, backend, report);
      return AssembleMultilingualDataset(en, tr, backend, report);
    };
    const Dataset out = run();
    EXPECT_TRUE(LabelsConserved(out));
    EXPECT_LE(out.size(), 30u * 2 + seeds.size());
    std::ostringstream a, b;
    WriteDataset(out, a);
    WriteDataset(run(), b);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST_F(SynthTest, ReportSerializesCounts) {
  ToyBackend backend(world_);
  SynthReport report;
  TranslateAndFilter(Seeds(4), SynthConfig{{kAr}, 4, 1}, backend, report);
  const auto j = report.ToJson();
  EXPECT_EQ(j["per_language"]["ar"]["kept"], 4);
  EXPECT_EQ(j["subsampled"], 4);
}

}  // namespace
}  // namespace polyguard
