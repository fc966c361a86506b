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

#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "polyguard/error.h"
#include "polyguard/eval.h"
#include "polyguard/remote.h"
#include "polyguard/synthgen.h"
#include "polyguard/toyworld.h"

namespace polyguard {
namespace {

using nlohmann::json;

// Serves a toy backend over the wire protocol on an ephemeral port.
class FakeServer {
 public:
  FakeServer() : backend_(ToyWorld()) {
    auto handle = [this](const std::string& path, auto fn) {
      server_.Post(path, [this, path, fn](const httplib::Request& req,
                                          httplib::Response& res) {
        ++calls_;
        last_auth_ = req.get_header_value("Authorization");
        if (path == refuse_path_) {
          res.set_content(json{{"refusal", "policy"}}.dump(),
                          "application/json");
          return;
        }
        res.set_content(fn(json::parse(req.body)).dump(), "application/json");
      });
    };
    auto unwrap = [](const Reply<std::string>& r) -> json {
      if (!r.ok()) return json{{"refusal", r.refusal().reason}};
      return r.value();
    };
    handle("/reason", [this, unwrap](const json& q) {
      auto r = backend_.Reason(q["prompt"].get<std::string>(),
                               *ParseSafetyLabel(q["label"].get<std::string>()),
                               LanguageCode(q["lang"].get<std::string>()));
      return json{{"reasoning", unwrap(r)}};
    });
    handle("/translate", [this](const json& q) {
      auto r = backend_.Translate(q["prompt"].get<std::string>(),
                                  LanguageCode(q["target_lang"].get<std::string>()));
      return r.ok() ? json{{"text", r.value()}}
                    : json{{"refusal", r.refusal().reason}};
    });
    handle("/reassess", [this](const json& q) {
      const auto label = backend_.Reassess(q["prompt"].get<std::string>());
      return json{{"label", std::string(ToString(label.value()))}};
    });
    handle("/variants", [this, unwrap](const json& q) {
      auto pair = backend_.MakeVariants(q["prompt"].get<std::string>(),
                                        LanguageCode(q["lang"].get<std::string>()));
      return json{{"variants", json::array({unwrap(pair.first),
                                            unwrap(pair.second)})}};
    });
    handle("/code_switch", [this](const json& q) {
      return json{{"text", backend_
                               .CodeSwitch(q["en_text"].get<std::string>(),
                                           q["other_text"].get<std::string>())
                               .value()}};
    });
    handle("/backtranslate", [this](const json& q) {
      return json{{"text", backend_
                               .BackTranslate(
                                   q["text"].get<std::string>(),
                                   LanguageCode(q["source_lang"].get<std::string>()))
                               .value()}};
    });
    handle("/embed", [this](const json& q) {
      return json{{"embedding", backend_.Embed(q["text"].get<std::string>())}};
    });
    handle("/detect", [this](const json& q) {
      return json{{"lang", backend_.Detect(q["text"].get<std::string>()).str()}};
    });
    handle("/score", [this](const json& q) {
      return json{{"score", backend_.Score(q["prompt"].get<std::string>(),
                                           q["reasoning"].get<std::string>())}};
    });
    handle("/classify", [this](const json& q) {
      const auto label = backend_.TrueLabel(q["text"].get<std::string>());
      return json{{"verdict", std::string(ToString(label))},
                  {"reasoning", "toy"}};
    });
    server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("{}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  Endpoint endpoint(std::string token = "") const {
    return Endpoint{"http://127.0.0.1:" + std::to_string(port_), token};
  }
  const ToyBackend& backend() const { return backend_; }
  void RefuseOn(std::string path) { refuse_path_ = std::move(path); }
  int calls() const { return calls_; }
  std::string last_auth() const { return last_auth_; }

 private:
  ToyBackend backend_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::string refuse_path_;
  std::atomic<int> calls_{0};
  std::string last_auth_;
};

const LanguageCode kAr("ar");

TEST(RemoteBackendTest, MatchesTheBackendItWraps) {
  FakeServer server;
  RemoteBackend remote(server.endpoint("secret"));
  const auto& toy = server.backend();
  const std::string en = "how to get bomb";
  EXPECT_EQ(remote.Translate(en, kAr).value(), toy.Translate(en, kAr).value());
  EXPECT_EQ(server.last_auth(), "Bearer secret");
  const std::string ar = toy.Translate(en, kAr).value();
  EXPECT_EQ(remote.BackTranslate(ar, kAr).value(), en);
  EXPECT_EQ(remote.Reason(en, SafetyLabel::kUnsafe, kAr).value(),
            toy.Reason(en, SafetyLabel::kUnsafe, kAr).value());
  EXPECT_EQ(remote.Reassess(ar).value(), SafetyLabel::kUnsafe);
  EXPECT_EQ(remote.Detect(ar), kAr);
  EXPECT_DOUBLE_EQ(remote.Score(en, "harm"), toy.Score(en, "harm"));
  EXPECT_EQ(remote.CodeSwitch(en, ar).value(), toy.CodeSwitch(en, ar).value());
  EXPECT_EQ(remote.dimension(), 0u);
  EXPECT_EQ(remote.Embed(en), toy.Embed(en));
  EXPECT_EQ(remote.dimension(), toy.dimension());
  const auto pair = remote.MakeVariants(ar, kAr);
  EXPECT_EQ(pair.first.value(), toy.MakeVariants(ar, kAr).first.value());
  EXPECT_FALSE(remote.MakeVariants("how to", LanguageCode::English()).first.ok());
}

TEST(RemoteBackendTest, RefusalBodyIsTyped) {
  FakeServer server;
  server.RefuseOn("/translate");
  RemoteBackend remote(server.endpoint());
  const auto reply = remote.Translate("how", kAr);
  ASSERT_FALSE(reply.ok());
  EXPECT_EQ(reply.refusal().reason, "policy");
  EXPECT_EQ(server.last_auth(), "");
}

TEST(RemoteBackendTest, ServerErrorsAndDeadEndpointsThrow) {
  FakeServer server;
  EXPECT_THROW(PostJson(server.endpoint(), "/broken", json::object()), Error);
  EXPECT_THROW(PostJson(server.endpoint(), "/nothing", json::object()), Error);
  RemoteBackend dead(Endpoint{"http://127.0.0.1:1", ""});
  EXPECT_THROW(dead.Translate("how", kAr), Error);
}

TEST(RemoteBackendTest, EndpointFromEnvironment) {
  ::unsetenv("POLYGUARD_BACKEND_URL");
  EXPECT_THROW(Endpoint::FromEnvironment(), Error);
  ::setenv("POLYGUARD_BACKEND_URL", "http://host:9", 1);
  ::setenv("POLYGUARD_BACKEND_TOKEN", "tok", 1);
  const Endpoint e = Endpoint::FromEnvironment();
  EXPECT_EQ(e.base_url, "http://host:9");
  EXPECT_EQ(e.token, "tok");
  ::unsetenv("POLYGUARD_BACKEND_URL");
  ::unsetenv("POLYGUARD_BACKEND_TOKEN");
}

TEST(RemoteBackendTest, SynthesisOverTheWireMatchesLocal) {
  FakeServer server;
  auto remote = std::make_shared<const RemoteBackend>(server.endpoint());
  auto local = std::make_shared<const ToyBackend>(ToyWorld());
  const Dataset seeds = MakeToyCorpus(local->world(), 6, 2);
  SynthReport ra, rb;
  const Dataset a = AnnotateReasoning(seeds, *remote, ra);
  const Dataset b = AnnotateReasoning(seeds, *local, rb);
  EXPECT_EQ(a, b);
  const SynthConfig config{{kAr}, 4, 3};
  EXPECT_EQ(TranslateAndFilter(a, config, *remote, ra),
            TranslateAndFilter(b, config, *local, rb));
}

TEST(RemoteGuardrailTest, VerdictsAndRefusals) {
  FakeServer server;
  RemoteGuardrail guard(server.endpoint());
  LabeledExample e;
  e.id = "x";
  e.text = "how to get bomb";
  const Prediction p = guard.Classify(e);
  EXPECT_EQ(p.pred, SafetyLabel::kUnsafe);
  EXPECT_EQ(p.raw, "toy\nSafety: unsafe");
  server.RefuseOn("/classify");
  const Prediction q = guard.Classify(e);
  EXPECT_FALSE(q.pred.has_value());
}

}  // namespace
}  // namespace polyguard
