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

#ifndef POLYGUARD_CONFIG_H_
#define POLYGUARD_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyguard {

// Flat view of a dotted key tree. One "key = value" per line; text after
// '#' is a comment; blank lines are ignored.
class KeyValueConfig {
 public:
  // Throws ValidationError naming the line on malformed input or a repeated
  // key.
  static KeyValueConfig Parse(std::string_view text);
  static KeyValueConfig ParseFile(const std::filesystem::path& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> Get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

  // Sorted "key = value" lines.
  std::string Canonical() const;

 private:
  std::map<std::string, std::string> entries_;
};

// Typed readers; the key name appears in the ValidationError.
double ParseDouble(const std::string& key, const std::string& value);
long long ParseInt(const std::string& key, const std::string& value);
bool ParseBool(const std::string& key, const std::string& value);
std::vector<std::string> SplitList(const std::string& value);

}  // namespace polyguard

#endif  // POLYGUARD_CONFIG_H_
