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

#ifndef POLYGUARD_RANDOM_H_
#define POLYGUARD_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace polyguard {

std::uint64_t SplitMix64(std::uint64_t x);
std::uint64_t Fnv1a64(std::string_view bytes);

// Seed for the labeled substream `label` of `master`.
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view label);
// Seed for the indexed substream `index` of `master`.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index);

// mt19937_64 with distributions that give the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t Below(std::uint64_t bound);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

  // `count` distinct indices from [0, population), uniform without
  // replacement, in draw order.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t population,
                                                    std::size_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace polyguard

#endif  // POLYGUARD_RANDOM_H_
