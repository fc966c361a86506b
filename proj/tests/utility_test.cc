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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "polyguard/clients.h"
#include "polyguard/error.h"
#include "polyguard/hashing.h"
#include "polyguard/random.h"
#include "test_util.h"

namespace polyguard {
namespace {

TEST(HashingTest, KnownSha256Vectors) {
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(HashingTest, FileMatchesBytes) {
  testing::ScratchDir dir("hash");
  {
    std::ofstream out(dir / "f", std::ios::binary);
    out << "abc";
  }
  EXPECT_EQ(Sha256File(dir / "f"), Sha256Hex("abc"));
  EXPECT_THROW(Sha256File(dir / "missing"), Error);
}

TEST(RandomTest, Fnv1aReferenceValues) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(RandomTest, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(DeriveSeed(7, "sft"), DeriveSeed(7, "sft"));
  EXPECT_NE(DeriveSeed(7, "sft"), DeriveSeed(8, "sft"));
  EXPECT_NE(DeriveSeed(7, "sft"), DeriveSeed(7, "grpo"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(DeriveSeed(3, i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(RandomTest, UniformAndBelowStayInRange) {
  Rng rng(11);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(rng.Below(7), 7u);
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(RandomTest, SameSeedSameStream) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
}

TEST(RandomTest, SampleWithoutReplacementIsDistinct) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t population = 1 + rng.Below(30);
    const std::size_t count = rng.Below(population + 1);
    const auto picks = rng.SampleWithoutReplacement(population, count);
    ASSERT_EQ(picks.size(), count);
    const std::set<std::size_t> unique(picks.begin(), picks.end());
    ASSERT_EQ(unique.size(), count);
    for (std::size_t p : picks) ASSERT_LT(p, population);
  }
}

TEST(RandomTest, ShuffleIsAPermutation) {
  Rng rng(9);
  std::vector<int> items{1, 2, 3, 4, 5, 6, 7, 8};
  auto shuffled = items;
  rng.Shuffle(shuffled);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, items);
}

TEST(CosineTest, HandValues) {
  const std::vector<double> e1{1, 0}, e2{0, 1}, d{1, 1};
  EXPECT_DOUBLE_EQ(CosineSimilarity(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(CosineSimilarity(e1, e2), 0.0);
  EXPECT_NEAR(CosineSimilarity(d, e1), 0.70710678, 1e-8);
}

TEST(CosineTest, Errors) {
  const std::vector<double> zero{0, 0}, e1{1, 0}, three{1, 0, 0};
  try {
    CosineSimilarity(zero, e1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "degenerate embedding");
  }
  EXPECT_THROW(CosineSimilarity(e1, three), Error);
}

TEST(CosineTest, BoundedAndSymmetric) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> u(5), v(5);
    for (auto& x : u) x = rng.Uniform() * 2 - 1;
    for (auto& x : v) x = rng.Uniform() * 2 - 1;
    const double c = CosineSimilarity(u, v);
    ASSERT_LE(std::abs(c), 1.0 + 1e-12);
    ASSERT_DOUBLE_EQ(c, CosineSimilarity(v, u));
  }
}

TEST(ReplyTest, ValueOrRefusal) {
  Reply<int> ok(3);
  EXPECT_TRUE(ok.ok());
  EXPECT_EQ(ok.value(), 3);
  Reply<int> no(Refusal{"nope"});
  EXPECT_FALSE(no.ok());
  EXPECT_EQ(no.refusal().reason, "nope");
  EXPECT_THROW(no.value(), Error);
}

}  // namespace
}  // namespace polyguard
