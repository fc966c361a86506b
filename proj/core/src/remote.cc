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

#include "polyguard/remote.h"

#include <cstdlib>

#include <httplib.h>

namespace polyguard {
namespace {

using nlohmann::json;

std::string RequireStringField(const json& body, const char* field,
                               const std::string& path) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string()) {
    throw Error(path + ": response lacks string field '" + field + "'");
  }
  return it->get<std::string>();
}

Reply<std::string> StringReply(const Reply<json>& reply, const char* field,
                               const std::string& path) {
  if (!reply.ok()) return reply.refusal();
  return RequireStringField(reply.value(), field, path);
}

Reply<std::string> VariantEntry(const json& entry) {
  if (entry.is_string()) return entry.get<std::string>();
  if (entry.is_object() && entry.contains("refusal")) {
    return Refusal{entry["refusal"].get<std::string>()};
  }
  throw Error("/variants: malformed variant entry");
}

}  // namespace

Endpoint Endpoint::FromEnvironment() {
  const char* url = std::getenv("POLYGUARD_BACKEND_URL");
  if (url == nullptr || *url == '\0') {
    throw Error("POLYGUARD_BACKEND_URL is not set");
  }
  const char* token = std::getenv("POLYGUARD_BACKEND_TOKEN");
  return Endpoint{url, token == nullptr ? "" : token};
}

Reply<json> PostJson(const Endpoint& endpoint, const std::string& path,
                     const json& request) {
  httplib::Client client(endpoint.base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!endpoint.token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.token);
  }
  auto result = client.Post(path, headers, request.dump(), "application/json");
  if (!result) {
    throw Error(path + ": transport error: " + httplib::to_string(result.error()));
  }
  json body;
  try {
    body = json::parse(result->body);
  } catch (const json::parse_error&) {
    throw Error(path + ": non-JSON response (status " +
                std::to_string(result->status) + ")");
  }
  if (body.is_object() && body.contains("refusal")) {
    return Refusal{body["refusal"].is_string()
                       ? body["refusal"].get<std::string>()
                       : body["refusal"].dump()};
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(path + ": HTTP status " + std::to_string(result->status));
  }
  return body;
}

RemoteBackend::RemoteBackend(Endpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {}

Reply<std::string> RemoteBackend::Reason(std::string_view prompt,
                                         SafetyLabel label,
                                         const LanguageCode& lang) const {
  const json request = {{"prompt", prompt},
                        {"label", ToString(label)},
                        {"lang", lang.str()}};
  return StringReply(PostJson(endpoint_, "/reason", request), "reasoning",
                     "/reason");
}

Reply<std::string> RemoteBackend::Translate(std::string_view prompt,
                                            const LanguageCode& target) const {
  const json request = {{"prompt", prompt}, {"target_lang", target.str()}};
  return StringReply(PostJson(endpoint_, "/translate", request), "text",
                     "/translate");
}

Reply<SafetyLabel> RemoteBackend::Reassess(std::string_view prompt) const {
  auto reply = PostJson(endpoint_, "/reassess", json{{"prompt", prompt}});
  if (!reply.ok()) return reply.refusal();
  const auto label =
      ParseSafetyLabel(RequireStringField(reply.value(), "label", "/reassess"));
  if (!label) throw Error("/reassess: label must be safe or unsafe");
  return *label;
}

VariantPair RemoteBackend::MakeVariants(std::string_view prompt,
                                        const LanguageCode& lang) const {
  auto reply = PostJson(endpoint_, "/variants",
                        json{{"prompt", prompt}, {"lang", lang.str()}});
  if (!reply.ok()) return {reply.refusal(), reply.refusal()};
  const auto& variants = reply.value().at("variants");
  if (!variants.is_array() || variants.size() != 2) {
    throw Error("/variants: expected two entries");
  }
  return {VariantEntry(variants[0]), VariantEntry(variants[1])};
}

Reply<std::string> RemoteBackend::CodeSwitch(
    std::string_view en_text, std::string_view other_text) const {
  const json request = {{"en_text", en_text}, {"other_text", other_text}};
  return StringReply(PostJson(endpoint_, "/code_switch", request), "text",
                     "/code_switch");
}

Reply<std::string> RemoteBackend::BackTranslate(
    std::string_view text, const LanguageCode& source) const {
  const json request = {{"text", text}, {"source_lang", source.str()}};
  return StringReply(PostJson(endpoint_, "/backtranslate", request), "text",
                     "/backtranslate");
}

std::size_t RemoteBackend::dimension() const { return dimension_; }

std::vector<double> RemoteBackend::Embed(std::string_view text) const {
  auto reply = PostJson(endpoint_, "/embed", json{{"text", text}});
  if (!reply.ok()) throw Error("/embed refused: " + reply.refusal().reason);
  auto vector = reply.value().at("embedding").get<std::vector<double>>();
  std::size_t expected = 0;
  if (!dimension_.compare_exchange_strong(expected, vector.size()) &&
      expected != vector.size()) {
    throw Error("/embed: dimension changed from " + std::to_string(expected) +
                " to " + std::to_string(vector.size()));
  }
  return vector;
}

LanguageCode RemoteBackend::Detect(std::string_view text) const {
  auto reply = PostJson(endpoint_, "/detect", json{{"text", text}});
  if (!reply.ok()) throw Error("/detect refused: " + reply.refusal().reason);
  return LanguageCode(RequireStringField(reply.value(), "lang", "/detect"));
}

double RemoteBackend::Score(std::string_view prompt,
                            std::string_view reasoning) const {
  auto reply = PostJson(endpoint_, "/score",
                        json{{"prompt", prompt}, {"reasoning", reasoning}});
  if (!reply.ok()) throw Error("/score refused: " + reply.refusal().reason);
  const double score = reply.value().at("score").get<double>();
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error("/score: value outside [0, 1]");
  }
  return score;
}

ClientSet MakeRemoteClientSet(std::shared_ptr<const RemoteBackend> backend) {
  return ClientSet{backend, backend, backend, backend, backend};
}

}  // namespace polyguard
