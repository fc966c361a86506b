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

#include "polyguard/clients.h"

#include <algorithm>
#include <cmath>

namespace polyguard {

double CosineSimilarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) +
                " vs " + std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error("degenerate embedding");
  // sqrt of the product keeps cos(u, u) exactly 1.
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

}  // namespace polyguard
