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

#ifndef POLYGUARD_REMOTE_H_
#define POLYGUARD_REMOTE_H_

#include <atomic>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "polyguard/clients.h"

namespace polyguard {

struct Endpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string token;     // sent as a bearer token when non-empty

  // Reads POLYGUARD_BACKEND_URL and POLYGUARD_BACKEND_TOKEN. Throws when the
  // URL is not set.
  static Endpoint FromEnvironment();
};

// POSTs `request` to `path`. A body carrying a "refusal" member becomes a
// Refusal; transport failures and other non-2xx answers throw Error.
Reply<nlohmann::json> PostJson(const Endpoint& endpoint, const std::string& path,
                               const nlohmann::json& request);

// Every oracle-client interface over the HTTP/JSON wire protocol. A fresh
// connection is opened per call, so concurrent calls are independent.
class RemoteBackend final : public GeneratorClient,
                            public BackTranslator,
                            public Embedder,
                            public LanguageDetector,
                            public UncertaintyScorer {
 public:
  explicit RemoteBackend(Endpoint endpoint, std::size_t dimension = 0);

  Reply<std::string> Reason(std::string_view prompt, SafetyLabel label,
                            const LanguageCode& lang) const override;
  Reply<std::string> Translate(std::string_view prompt,
                               const LanguageCode& target) const override;
  Reply<SafetyLabel> Reassess(std::string_view prompt) const override;
  VariantPair MakeVariants(std::string_view prompt,
                           const LanguageCode& lang) const override;
  Reply<std::string> CodeSwitch(std::string_view en_text,
                                std::string_view other_text) const override;
  Reply<std::string> BackTranslate(std::string_view text,
                                   const LanguageCode& source) const override;
  // Learned from the first /embed answer when not given up front.
  std::size_t dimension() const override;
  std::vector<double> Embed(std::string_view text) const override;
  LanguageCode Detect(std::string_view text) const override;
  double Score(std::string_view prompt,
               std::string_view reasoning) const override;

 private:
  Endpoint endpoint_;
  mutable std::atomic<std::size_t> dimension_;
};

ClientSet MakeRemoteClientSet(std::shared_ptr<const RemoteBackend> backend);

}  // namespace polyguard

#endif  // POLYGUARD_REMOTE_H_
