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

#include "polyguard/pipeline.h"

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "polyguard/error.h"
#include "polyguard/eval.h"
#include "polyguard/hashing.h"
#include "polyguard/random.h"
#include "polyguard/remote.h"

namespace polyguard {

namespace fs = std::filesystem;

namespace {

std::string Num(double v) { return nlohmann::json(v).dump(); }
std::string Num(std::uint64_t v) { return std::to_string(v); }
std::string Bool(bool v) { return v ? "true" : "false"; }

std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ",";
    out += item;
  }
  return out;
}

std::size_t ParseCount(const std::string& key, const std::string& value) {
  const long long v = ParseInt(key, value);
  if (v < 0) throw ValidationError(key, "must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t ParseSeed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(value, &used);
    if (used != value.size()) throw ValidationError(key, "bad seed");
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError(key, "expected an unsigned integer");
  }
}

std::vector<LanguageCode> ParseLangs(const std::string& value) {
  std::vector<LanguageCode> langs;
  for (const auto& code : SplitList(value)) langs.emplace_back(code);
  return langs;
}

template <typename Container>
std::string LangList(const Container& langs) {
  std::vector<std::string> codes;
  for (const auto& lang : langs) codes.push_back(lang.str());
  return JoinList(codes);
}

struct Field {
  std::string key;
  std::string comment;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

void AddGrpoFields(std::vector<Field>& f, std::function<GrpoConfig&(RunConfig&)> m,
                   std::function<const GrpoConfig&(const RunConfig&)> c) {
  auto k = [](const char* name) { return std::string("grpo.") + name; };
  f.push_back({k("group_size"), "samples per prompt (G)",
               [m](RunConfig& r, const std::string& v) { m(r).group_size = ParseCount("grpo.group_size", v); },
               [c](const RunConfig& r) { return Num(static_cast<std::uint64_t>(c(r).group_size)); }});
  f.push_back({k("clip_epsilon"), "ratio clip (epsilon)",
               [m](RunConfig& r, const std::string& v) { m(r).clip_epsilon = ParseDouble("grpo.clip_epsilon", v); },
               [c](const RunConfig& r) { return Num(c(r).clip_epsilon); }});
  f.push_back({k("kl_beta"), "KL weight (beta)",
               [m](RunConfig& r, const std::string& v) { m(r).kl_beta = ParseDouble("grpo.kl_beta", v); },
               [c](const RunConfig& r) { return Num(c(r).kl_beta); }});
  f.push_back({k("learning_rate"), "",
               [m](RunConfig& r, const std::string& v) { m(r).learning_rate = ParseDouble("grpo.learning_rate", v); },
               [c](const RunConfig& r) { return Num(c(r).learning_rate); }});
  f.push_back({k("std_floor"), "groups with a smaller reward std get zero advantage",
               [m](RunConfig& r, const std::string& v) { m(r).std_floor = ParseDouble("grpo.std_floor", v); },
               [c](const RunConfig& r) { return Num(c(r).std_floor); }});
  f.push_back({k("kl_estimator"), "per_token_k3",
               [m](RunConfig& r, const std::string& v) { m(r).kl_estimator = v; },
               [c](const RunConfig& r) { return c(r).kl_estimator; }});
  f.push_back({k("epochs"), "",
               [m](RunConfig& r, const std::string& v) { m(r).epochs = static_cast<int>(ParseInt("grpo.epochs", v)); },
               [c](const RunConfig& r) { return std::to_string(c(r).epochs); }});
  f.push_back({k("prompts_per_batch"), "prompts per pi_old refresh",
               [m](RunConfig& r, const std::string& v) { m(r).prompts_per_batch = ParseCount("grpo.prompts_per_batch", v); },
               [c](const RunConfig& r) { return Num(static_cast<std::uint64_t>(c(r).prompts_per_batch)); }});
  f.push_back({k("inner_steps"), "updates per batch",
               [m](RunConfig& r, const std::string& v) { m(r).inner_steps = static_cast<int>(ParseInt("grpo.inner_steps", v)); },
               [c](const RunConfig& r) { return std::to_string(c(r).inner_steps); }});
  f.push_back({k("max_grad_norm"), "global L2 clip, 0 disables",
               [m](RunConfig& r, const std::string& v) { m(r).max_grad_norm = ParseDouble("grpo.max_grad_norm", v); },
               [c](const RunConfig& r) { return Num(c(r).max_grad_norm); }});
  f.push_back({k("use_curriculum"), "false: same budget drawn from the full pool",
               [m](RunConfig& r, const std::string& v) { m(r).use_curriculum = ParseBool("grpo.use_curriculum", v); },
               [c](const RunConfig& r) { return Bool(c(r).use_curriculum); }});
  f.push_back({k("eval_prompts"), "prompts scored for eval_mean_reward, 0 = all",
               [m](RunConfig& r, const std::string& v) { m(r).eval_prompts = ParseCount("grpo.eval_prompts", v); },
               [c](const RunConfig& r) { return Num(static_cast<std::uint64_t>(c(r).eval_prompts)); }});
}

void AddRewardFields(std::vector<Field>& f) {
  f.push_back({"reward.uncertainty", "uncertainty reward on/off",
               [](RunConfig& r, const std::string& v) { r.reward.enable_uncertainty = ParseBool("reward.uncertainty", v); },
               [](const RunConfig& r) { return Bool(r.reward.enable_uncertainty); }});
  f.push_back({"reward.language_mode", "off | fixed | curriculum",
               [](RunConfig& r, const std::string& v) {
                 auto mode = ParseLanguageRewardMode(v);
                 if (!mode) throw ValidationError("reward.language_mode", "unknown mode '" + v + "'");
                 r.reward.language_mode = *mode;
               },
               [](const RunConfig& r) { return std::string(ToString(r.reward.language_mode)); }});
  f.push_back({"reward.language_fixed_value", "value used by the fixed mode",
               [](RunConfig& r, const std::string& v) { r.reward.language_fixed_value = ParseDouble("reward.language_fixed_value", v); },
               [](const RunConfig& r) { return Num(r.reward.language_fixed_value); }});
  f.push_back({"reward.language_requires_match", "reasoning must be detected in the prompt language",
               [](RunConfig& r, const std::string& v) { r.reward.language_requires_match = ParseBool("reward.language_requires_match", v); },
               [](const RunConfig& r) { return Bool(r.reward.language_requires_match); }});
}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back({"run.stages", "subset of synth,sft,curriculum,grpo,attack,eval",
                 [](RunConfig& r, const std::string& v) {
                   r.stages.clear();
                   for (const auto& s : SplitList(v)) r.stages.insert(s);
                 },
                 [](const RunConfig& r) {
                   std::vector<std::string> names;
                   for (const auto& s : StageOrder()) {
                     if (r.stages.count(s) != 0) names.push_back(s);
                   }
                   return JoinList(names);
                 }});
    f.push_back({"run.seed", "master seed",
                 [](RunConfig& r, const std::string& v) { r.seed = ParseSeed("run.seed", v); },
                 [](const RunConfig& r) { return Num(r.seed); }});
    f.push_back({"run.out_dir", "runs are written to <out_dir>/run-NNNN",
                 [](RunConfig& r, const std::string& v) { r.out_dir = v; },
                 [](const RunConfig& r) { return r.out_dir.string(); }});
    f.push_back({"run.backend", "toyworld | remote",
                 [](RunConfig& r, const std::string& v) { r.backend = v; },
                 [](const RunConfig& r) { return r.backend; }});
    f.push_back({"toy.world_seed", "",
                 [](RunConfig& r, const std::string& v) { r.toy.world_seed = ParseSeed("toy.world_seed", v); },
                 [](const RunConfig& r) { return Num(r.toy.world_seed); }});
    f.push_back({"toy.corpus_size", "English seeds generated when input.seed_file is empty",
                 [](RunConfig& r, const std::string& v) { r.toy.corpus_size = ParseCount("toy.corpus_size", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.toy.corpus_size)); }});
    f.push_back({"toy.refusal_rate", "",
                 [](RunConfig& r, const std::string& v) { r.toy.refusal_rate = ParseDouble("toy.refusal_rate", v); },
                 [](const RunConfig& r) { return Num(r.toy.refusal_rate); }});
    f.push_back({"toy.flip_rate", "reassessment label flips",
                 [](RunConfig& r, const std::string& v) { r.toy.flip_rate = ParseDouble("toy.flip_rate", v); },
                 [](const RunConfig& r) { return Num(r.toy.flip_rate); }});
    auto path_field = [&f](const std::string& name, const std::string& comment,
                           fs::path InputPaths::*member) {
      f.push_back({"input." + name, comment,
                   [member](RunConfig& r, const std::string& v) { r.input.*member = v; },
                   [member](const RunConfig& r) { return (r.input.*member).string(); }});
    };
    path_field("seed_file", "English seed JSONL", &InputPaths::seed_file);
    f.push_back({"input.min_toxicity", "drop seed records at or below this toxicity",
                 [](RunConfig& r, const std::string& v) {
                   if (v.empty()) r.input.min_toxicity.reset();
                   else r.input.min_toxicity = ParseDouble("input.min_toxicity", v);
                 },
                 [](const RunConfig& r) {
                   return r.input.min_toxicity ? Num(*r.input.min_toxicity) : std::string();
                 }});
    path_field("benign_file", "benign questions for sandwich attacks", &InputPaths::benign_file);
    path_field("synth_dataset", "used when synth is not run", &InputPaths::synth_dataset);
    path_field("synth_heldout", "used when synth is not run", &InputPaths::synth_heldout);
    path_field("ref_policy", "used when sft is not run", &InputPaths::ref_policy);
    path_field("curriculum", "used when curriculum is not run", &InputPaths::curriculum);
    path_field("policy", "guardrail policy when grpo and sft are not run", &InputPaths::policy);
    path_field("predictions", "eval scores this file instead of running a guardrail", &InputPaths::predictions);
    path_field("gold", "gold dataset for input.predictions", &InputPaths::gold);
    f.push_back({"split.holdout", "held-out English seeds",
                 [](RunConfig& r, const std::string& v) { r.holdout = ParseCount("split.holdout", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.holdout)); }});
    f.push_back({"synth.langs", "target languages",
                 [](RunConfig& r, const std::string& v) { r.langs = ParseLangs(v); },
                 [](const RunConfig& r) { return LangList(r.langs); }});
    f.push_back({"synth.n", "seeds translated for SFT",
                 [](RunConfig& r, const std::string& v) { r.synth_n = ParseCount("synth.n", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.synth_n)); }});
    f.push_back({"synth.drop_on_conflict", "false keeps conflicts in the quarantine count",
                 [](RunConfig& r, const std::string& v) { r.drop_on_conflict = ParseBool("synth.drop_on_conflict", v); },
                 [](const RunConfig& r) { return Bool(r.drop_on_conflict); }});
    f.push_back({"curriculum.n", "further seeds translated for GRPO",
                 [](RunConfig& r, const std::string& v) { r.curriculum_n = ParseCount("curriculum.n", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.curriculum_n)); }});
    f.push_back({"curriculum.t1", "cosine above t1: level 0",
                 [](RunConfig& r, const std::string& v) { r.difficulty.t1 = ParseDouble("curriculum.t1", v); },
                 [](const RunConfig& r) { return Num(r.difficulty.t1); }});
    f.push_back({"curriculum.t2", "cosine above t2: level 1, otherwise level 2",
                 [](RunConfig& r, const std::string& v) { r.difficulty.t2 = ParseDouble("curriculum.t2", v); },
                 [](const RunConfig& r) { return Num(r.difficulty.t2); }});
    AddRewardFields(f);
    f.push_back({"policy.context_order", "tokens of context per state",
                 [](RunConfig& r, const std::string& v) { r.context_order = static_cast<int>(ParseInt("policy.context_order", v)); },
                 [](const RunConfig& r) { return std::to_string(r.context_order); }});
    f.push_back({"policy.max_len", "output token limit",
                 [](RunConfig& r, const std::string& v) { r.max_len = static_cast<int>(ParseInt("policy.max_len", v)); },
                 [](const RunConfig& r) { return std::to_string(r.max_len); }});
    f.push_back({"sft.learning_rate", "",
                 [](RunConfig& r, const std::string& v) { r.sft.learning_rate = ParseDouble("sft.learning_rate", v); },
                 [](const RunConfig& r) { return Num(r.sft.learning_rate); }});
    f.push_back({"sft.epochs", "",
                 [](RunConfig& r, const std::string& v) { r.sft.epochs = static_cast<int>(ParseInt("sft.epochs", v)); },
                 [](const RunConfig& r) { return std::to_string(r.sft.epochs); }});
    f.push_back({"sft.target_order", "en_first | native_first",
                 [](RunConfig& r, const std::string& v) {
                   auto order = ParseTargetOrder(v);
                   if (!order) throw ValidationError("sft.target_order", "unknown order '" + v + "'");
                   r.sft.target_order = *order;
                 },
                 [](const RunConfig& r) { return std::string(ToString(r.sft.target_order)); }});
    f.push_back({"sft.batch_size", "0 = full batch",
                 [](RunConfig& r, const std::string& v) { r.sft.batch_size = ParseCount("sft.batch_size", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.sft.batch_size)); }});
    AddGrpoFields(f, [](RunConfig& r) -> GrpoConfig& { return r.grpo; },
                  [](const RunConfig& r) -> const GrpoConfig& { return r.grpo; });
    f.push_back({"attack.k", "benign questions on each side of a sandwich",
                 [](RunConfig& r, const std::string& v) { r.attack_k = ParseCount("attack.k", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.attack_k)); }});
    f.push_back({"attack.template", "JSON {header, footer}; built-in wording when empty",
                 [](RunConfig& r, const std::string& v) { r.attack_template = v; },
                 [](const RunConfig& r) { return r.attack_template.string(); }});
    f.push_back({"attack.benign_lang", "language of the generated benign corpus",
                 [](RunConfig& r, const std::string& v) { r.benign_lang = LanguageCode(v); },
                 [](const RunConfig& r) { return r.benign_lang.str(); }});
    f.push_back({"attack.benign_size", "",
                 [](RunConfig& r, const std::string& v) { r.benign_size = ParseCount("attack.benign_size", v); },
                 [](const RunConfig& r) { return Num(static_cast<std::uint64_t>(r.benign_size)); }});
    f.push_back({"eval.id_langs", "in-domain languages",
                 [](RunConfig& r, const std::string& v) {
                   auto langs = ParseLangs(v);
                   r.id_langs = {langs.begin(), langs.end()};
                 },
                 [](const RunConfig& r) { return LangList(r.id_langs); }});
    return f;
  }();
  return fields;
}

}  // namespace

RunConfig RunConfigFromKeyValue(const KeyValueConfig& kv) {
  RunConfig config;
  std::map<std::string, const Field*> by_key;
  for (const auto& field : Fields()) by_key[field.key] = &field;
  for (const auto& [key, value] : kv.entries()) {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ValidationError(key, "unknown config key");
    it->second->set(config, value);
  }
  return config;
}

KeyValueConfig RunConfigToKeyValue(const RunConfig& config) {
  KeyValueConfig kv;
  for (const auto& field : Fields()) kv.Set(field.key, field.get(config));
  return kv;
}

GrpoConfig GrpoConfigFromKeyValue(const KeyValueConfig& kv) {
  KeyValueConfig subset;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("grpo.", 0) == 0) subset.Set(key, value);
  }
  return RunConfigFromKeyValue(subset).grpo;
}

RewardConfig RewardConfigFromKeyValue(const KeyValueConfig& kv) {
  KeyValueConfig subset;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("reward.", 0) == 0) subset.Set(key, value);
  }
  return RunConfigFromKeyValue(subset).reward;
}

std::string ReferenceConfigText() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "# polyguard run configuration\n";
  std::string section;
  for (const auto& field : Fields()) {
    const std::string head = field.key.substr(0, field.key.find('.'));
    if (head != section) {
      out << "\n# [" << head << "]\n";
      section = head;
    }
    if (!field.comment.empty()) out << "# " << field.comment << "\n";
    out << field.key << " = " << field.get(defaults) << "\n";
  }
  return out.str();
}

void ValidateRunConfig(const RunConfig& config) {
  for (const auto& stage : config.stages) {
    if (std::find(StageOrder().begin(), StageOrder().end(), stage) ==
        StageOrder().end()) {
      throw ValidationError("run.stages", "unknown stage '" + stage + "'");
    }
  }
  if (config.backend != "toyworld" && config.backend != "remote") {
    throw ValidationError("run.backend", "expected toyworld or remote");
  }
  if (config.langs.empty()) throw ValidationError("synth.langs", "empty");
  ValidateDifficultyConfig(config.difficulty);
  ValidateRewardConfig(config.reward);
  ValidateSftConfig(config.sft);
  ValidateGrpoConfig(config.grpo);
  if (config.context_order < 1) {
    throw ValidationError("policy.context_order", "must be >= 1");
  }
  if (config.max_len < 1) throw ValidationError("policy.max_len", "must be >= 1");
  if (config.attack_k < 1) throw ValidationError("attack.k", "must be >= 1");
  if (config.toy.refusal_rate < 0 || config.toy.refusal_rate > 1) {
    throw ValidationError("toy.refusal_rate", "must lie in [0, 1]");
  }
  if (config.toy.flip_rate < 0 || config.toy.flip_rate > 1) {
    throw ValidationError("toy.flip_rate", "must lie in [0, 1]");
  }
}

std::uint64_t StageSeed(std::uint64_t master, std::string_view stage) {
  return DeriveSeed(master, stage);
}

Backend MakeBackend(const std::string& name, const ToySettings& toy) {
  Backend backend;
  if (name == "toyworld") {
    ToyWorldOptions world;
    world.seed = toy.world_seed;
    ToyBackendOptions options;
    options.refusal_rate = toy.refusal_rate;
    options.flip_rate = toy.flip_rate;
    backend.toy = std::make_shared<const ToyBackend>(ToyWorld(world), options);
    backend.clients = MakeToyClientSet(backend.toy);
  } else if (name == "remote") {
    backend.clients = MakeRemoteClientSet(
        std::make_shared<const RemoteBackend>(Endpoint::FromEnvironment()));
  } else {
    throw ValidationError("backend", "expected toyworld or remote");
  }
  return backend;
}

std::vector<std::string> PolicyWords(
    const Backend& backend, const std::vector<const Dataset*>& datasets) {
  if (backend.toy) return backend.toy->world().Inventory();
  std::set<std::string> seen;
  std::vector<std::string> words;
  auto add = [&](const std::string& text) {
    for (const auto& token : SplitTokens(text)) {
      if (seen.insert(token).second) words.push_back(token);
    }
  };
  for (const Dataset* data : datasets) {
    for (const auto& example : *data) {
      add(example.text);
      if (example.reasoning_en) add(*example.reasoning_en);
      if (example.reasoning_native) add(*example.reasoning_native);
    }
  }
  return words;
}

fs::path NextRunDir(const fs::path& out_dir) {
  for (int i = 1; i < 100000; ++i) {
    std::ostringstream name;
    name << "run-" << std::setw(4) << std::setfill('0') << i;
    const fs::path candidate = out_dir / name.str();
    if (!fs::exists(candidate)) return candidate;
  }
  throw Error("no free run directory under " + out_dir.string());
}

namespace {

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << text;
}

class PipelineRun {
 public:
  PipelineRun(const RunConfig& config, fs::path run_dir)
      : config_(config), run_dir_(std::move(run_dir)) {}

  nlohmann::ordered_json Execute() {
    const KeyValueConfig kv = RunConfigToKeyValue(config_);
    const std::string canonical = kv.Canonical();
    manifest_["config_hash"] = Sha256Hex(canonical);
    manifest_["config"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : kv.entries()) manifest_["config"][key] = value;
    manifest_["seeds"] = nlohmann::ordered_json::object();
    for (const auto& stage : StageOrder()) {
      manifest_["seeds"][stage] = StageSeed(config_.seed, stage);
    }
    manifest_["stages"] = nlohmann::ordered_json::array();
    WriteText(run_dir_ / "config.txt", canonical);

    for (const auto& stage : StageOrder()) {
      if (config_.stages.count(stage) == 0) continue;
      current_ = nlohmann::ordered_json::object();
      current_["name"] = stage;
      current_["seed"] = StageSeed(config_.seed, stage);
      current_["inputs"] = nlohmann::ordered_json::object();
      current_["outputs"] = nlohmann::ordered_json::object();
      current_["metrics"] = nlohmann::ordered_json::object();
      try {
        if (stage == "synth") Synth();
        if (stage == "sft") Sft();
        if (stage == "curriculum") BuildCurriculum();
        if (stage == "grpo") Grpo();
        if (stage == "attack") Attack();
        if (stage == "eval") Eval();
      } catch (const std::exception& e) {
        throw Error("stage " + stage + ": " + e.what());
      }
      manifest_["stages"].push_back(current_);
    }
    WriteText(run_dir_ / "manifest.json", manifest_.dump(2) + "\n");
    return manifest_;
  }

 private:
  const Backend& backend() {
    if (!backend_) backend_ = MakeBackend(config_.backend, config_.toy);
    return *backend_;
  }
  const ClientSet& clients() { return backend().clients; }

  fs::path Output(const std::string& rel) {
    const fs::path path = run_dir_ / rel;
    fs::create_directories(path.parent_path());
    return path;
  }
  void Record(const std::string& rel) {
    current_["outputs"][rel] = Sha256File(run_dir_ / rel);
  }
  void RecordInput(const fs::path& path) {
    current_["inputs"][path.string()] = Sha256File(path);
  }

  const Dataset& MultiDataset() {
    if (!multi_) {
      if (config_.input.synth_dataset.empty()) {
        throw Error("stage synth required");
      }
      RecordInput(config_.input.synth_dataset);
      multi_ = ReadDatasetFile(config_.input.synth_dataset);
    }
    return *multi_;
  }

  const Dataset* Heldout() {
    if (!heldout_ && !config_.input.synth_heldout.empty()) {
      RecordInput(config_.input.synth_heldout);
      heldout_ = ReadDatasetFile(config_.input.synth_heldout);
    }
    return heldout_ ? &*heldout_ : nullptr;
  }

  Dataset LoadSeeds() {
    Dataset seeds;
    if (!config_.input.seed_file.empty()) {
      RecordInput(config_.input.seed_file);
      seeds = IngestCorpusFile(config_.input.seed_file,
                               {config_.input.min_toxicity});
    } else if (backend().toy) {
      seeds = MakeToyCorpus(backend().toy->world(), config_.toy.corpus_size,
                            StageSeed(config_.seed, "corpus"));
    } else {
      throw Error("input.seed_file is required for the remote backend");
    }
    for (const auto& example : seeds) {
      if (!example.lang.is_english()) {
        throw Error("seed " + example.id + " is not English");
      }
    }
    return seeds;
  }

  void Synth() {
    const Dataset seeds = LoadSeeds();
    const std::uint64_t seed = StageSeed(config_.seed, "synth");
    if (config_.holdout + config_.synth_n + config_.curriculum_n >
        seeds.size()) {
      throw ValidationError("split.holdout",
                            "holdout + synth.n + curriculum.n exceeds the " +
                                std::to_string(seeds.size()) + " seeds");
    }
    Rng split(DeriveSeed(seed, "holdout"));
    std::set<std::string> holdout_ids;
    for (auto i : split.SampleWithoutReplacement(seeds.size(), config_.holdout)) {
      holdout_ids.insert(seeds.examples()[i].id);
    }

    SynthReport report;
    const Dataset annotated =
        AnnotateReasoning(seeds, *clients().generator, report);
    Dataset train_en, heldout_en;
    for (const auto& example : annotated) {
      (holdout_ids.count(example.id) ? heldout_en : train_en).Add(example);
    }
    SynthConfig sc{config_.langs, config_.synth_n, DeriveSeed(seed, "sft"),
                   config_.drop_on_conflict, holdout_ids};
    const Dataset translated =
        TranslateAndFilter(annotated, sc, *clients().generator, report);
    multi_ = AssembleMultilingualDataset(train_en, translated,
                                         *clients().generator, report);
    ValidateDataset(*multi_);

    SynthReport heldout_report;
    SynthConfig hc{config_.langs, heldout_en.size(),
                   DeriveSeed(seed, "heldout-translate"),
                   config_.drop_on_conflict, {}};
    const Dataset heldout_tr = TranslateAndFilter(
        heldout_en, hc, *clients().generator, heldout_report);
    heldout_ = AssembleMultilingualDataset(heldout_en, heldout_tr,
                                           *clients().generator,
                                           heldout_report);

    WriteDatasetFile(*multi_, Output("synth/dataset.jsonl"));
    WriteDatasetFile(*heldout_, Output("synth/heldout.jsonl"));
    nlohmann::ordered_json combined;
    combined["train"] = report.ToJson();
    combined["heldout"] = heldout_report.ToJson();
    WriteText(Output("synth/report.json"), combined.dump(2) + "\n");
    Record("synth/dataset.jsonl");
    Record("synth/heldout.jsonl");
    Record("synth/report.json");
    current_["metrics"]["seeds"] = seeds.size();
    current_["metrics"]["train_examples"] = multi_->size();
    current_["metrics"]["heldout_examples"] = heldout_->size();
    current_["metrics"]["labels_conserved"] =
        LabelsConserved(*multi_) && LabelsConserved(*heldout_);
  }

  void Sft() {
    const Dataset& data = MultiDataset();
    PolicySnapshot init(Vocabulary(PolicyWords(backend(), {&data})),
                        config_.context_order, config_.max_len);
    std::vector<SftEpochStats> stats;
    ref_ = TrainSft(init, data, config_.sft, StageSeed(config_.seed, "sft"),
                    &stats);
    SavePolicy(*ref_, Output("sft/policy.bin"));
    std::string lines;
    nlohmann::ordered_json losses = nlohmann::ordered_json::array();
    for (const auto& s : stats) {
      nlohmann::ordered_json j{{"epoch", s.epoch}, {"mean_nll", s.mean_nll}};
      lines += j.dump() + "\n";
      losses.push_back(s.mean_nll);
    }
    WriteText(Output("sft/metrics.jsonl"), lines);
    Record("sft/policy.bin");
    Record("sft/metrics.jsonl");
    current_["metrics"]["mean_nll"] = losses;
  }

  void BuildCurriculum() {
    const Dataset& data = MultiDataset();
    Dataset english;
    std::set<std::string> used;
    for (const auto& example : data) {
      if (example.lang.is_english()) {
        english.Add(example);
      } else if (example.parallel_id) {
        used.insert(*example.parallel_id);
      }
    }
    const std::uint64_t seed = StageSeed(config_.seed, "curriculum");
    SynthReport report;
    SynthConfig cc{config_.langs, config_.curriculum_n, seed,
                   config_.drop_on_conflict, used};
    const Dataset translated =
        TranslateAndFilter(english, cc, *clients().generator, report);
    Dataset stage_seeds;
    for (const auto& id : report.subsampled_ids) {
      stage_seeds.Add(*english.Find(id));
    }
    ScoredPool pool = PrepareCurriculumPool(translated, stage_seeds, clients(),
                                            config_.difficulty);
    curriculum_ = BuildSchedule(pool.examples, stage_seeds, pool.cosines);
    WriteCurriculumFile(*curriculum_, Output("curriculum/curriculum.jsonl"));
    Record("curriculum/curriculum.jsonl");
    current_["metrics"]["stage_sizes"] = {curriculum_->stage(1).size(),
                                          curriculum_->stage(2).size(),
                                          curriculum_->stage(3).size()};
    current_["metrics"]["variant_refusals"] = pool.report.variant_refusals;
    current_["metrics"]["excluded"] = pool.report.excluded;

    if (const Dataset* heldout = Heldout()) {
      Dataset heldout_en, heldout_tr;
      for (const auto& example : *heldout) {
        (example.lang.is_english() ? heldout_en : heldout_tr).Add(example);
      }
      ScoredPool scored = PrepareCurriculumPool(heldout_tr, heldout_en,
                                                clients(), config_.difficulty);
      Dataset out;
      for (auto example : heldout_en) {
        example.difficulty = 0;
        out.Add(std::move(example));
      }
      out.Append(scored.examples);
      heldout_scored_ = std::move(out);
      WriteDatasetFile(*heldout_scored_,
                       Output("curriculum/heldout_scored.jsonl"));
      Record("curriculum/heldout_scored.jsonl");
      current_["metrics"]["heldout_levels"] = {scored.report.per_level[0],
                                               scored.report.per_level[1],
                                               scored.report.per_level[2]};
    }
  }

  void Grpo() {
    if (!ref_) {
      if (config_.input.ref_policy.empty()) throw Error("stage sft required");
      RecordInput(config_.input.ref_policy);
      ref_ = LoadPolicy(config_.input.ref_policy);
    }
    if (!curriculum_) {
      if (config_.input.curriculum.empty()) {
        throw Error("stage curriculum required");
      }
      RecordInput(config_.input.curriculum);
      curriculum_ = ReadCurriculumFile(config_.input.curriculum);
    }
    const RewardEngine engine(config_.reward, *clients().scorer,
                              *clients().detector);
    std::span<const LabeledExample> eval;
    if (heldout_scored_) eval = heldout_scored_->examples();
    GrpoResult result = TrainGrpo(*ref_, *curriculum_, engine, config_.grpo,
                                  StageSeed(config_.seed, "grpo"), eval);
    policy_ = std::move(result.policy);
    SavePolicy(*policy_, Output("grpo/policy.bin"));
    std::string lines;
    nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
    for (const auto& m : result.metrics) {
      lines += m.ToJson().dump() + "\n";
      epochs.push_back(m.ToJson());
    }
    WriteText(Output("grpo/metrics.jsonl"), lines);
    Record("grpo/policy.bin");
    Record("grpo/metrics.jsonl");
    current_["metrics"]["epochs"] = epochs;
  }

  void Attack() {
    const Dataset* heldout = Heldout();
    if (heldout == nullptr) throw Error("stage synth required");
    const std::uint64_t seed = StageSeed(config_.seed, "attack");
    AttackReport csrt_report;
    csrt_ = MakeCsrtAttacks(*heldout, *clients().generator, &csrt_report);

    SandwichConfig sandwich;
    sandwich.k = config_.attack_k;
    if (!config_.attack_template.empty()) {
      RecordInput(config_.attack_template);
      sandwich.tmpl = LoadSandwichTemplate(config_.attack_template);
    }
    Dataset benign;
    if (!config_.input.benign_file.empty()) {
      RecordInput(config_.input.benign_file);
      benign = ReadDatasetFile(config_.input.benign_file);
    } else if (backend().toy) {
      benign = MakeToyBenignCorpus(backend().toy->world(), config_.benign_lang,
                                   config_.benign_size,
                                   DeriveSeed(seed, "benign"));
    } else {
      throw Error("input.benign_file is required for the remote backend");
    }
    sandwich.benign_corpus = BenignFromDataset(benign);
    AttackReport sandwich_report;
    sandwich_ = MakeSandwichAttacks(*heldout, sandwich,
                                    DeriveSeed(seed, "sandwich"),
                                    &sandwich_report);
    WriteDatasetFile(*csrt_, Output("attack/csrt.jsonl"));
    WriteDatasetFile(*sandwich_, Output("attack/sandwich.jsonl"));
    Record("attack/csrt.jsonl");
    Record("attack/sandwich.jsonl");
    current_["metrics"]["csrt"] = csrt_report.generated;
    current_["metrics"]["csrt_refusals"] = csrt_report.refusals;
    current_["metrics"]["sandwich"] = sandwich_report.generated;
  }

  EvalReport WriteReport(const std::string& name, const PredictionSet& preds,
                         const Dataset& gold) {
    EvalReport report = BreakdownReport(preds, gold, config_.id_langs);
    WritePredictionsFile(preds, Output("eval/" + name + "_predictions.jsonl"));
    Record("eval/" + name + "_predictions.jsonl");
    return report;
  }

  void SaveReport(const std::string& name, const EvalReport& report) {
    WriteText(Output("eval/" + name + "_report.json"),
              report.ToJson().dump(2) + "\n");
    WriteText(Output("eval/" + name + "_report.txt"), report.TextTable());
    WriteText(Output("eval/" + name + "_cells.csv"), report.Csv());
    for (const char* suffix : {"_report.json", "_report.txt", "_cells.csv"}) {
      Record("eval/" + name + suffix);
    }
    current_["metrics"][name] = report.ToJson();
  }

  void Eval() {
    if (!config_.input.predictions.empty()) {
      if (config_.input.gold.empty()) {
        throw Error("input.gold is required with input.predictions");
      }
      RecordInput(config_.input.predictions);
      RecordInput(config_.input.gold);
      const PredictionSet preds =
          ReadPredictionsFile(config_.input.predictions);
      const Dataset gold = ReadDatasetFile(config_.input.gold);
      SaveReport("ingested", BreakdownReport(preds, gold, config_.id_langs));
      return;
    }
    std::optional<PolicySnapshot> policy = policy_ ? policy_ : ref_;
    if (!policy) {
      fs::path path = !config_.input.policy.empty() ? config_.input.policy
                                                     : config_.input.ref_policy;
      if (path.empty()) throw Error("stage sft required");
      RecordInput(path);
      policy = LoadPolicy(path);
    }
    const Dataset* gold = heldout_scored_ ? &*heldout_scored_ : Heldout();
    std::optional<Dataset> loaded;
    if (gold == nullptr) {
      if (config_.input.gold.empty()) throw Error("stage synth required");
      RecordInput(config_.input.gold);
      loaded = ReadDatasetFile(config_.input.gold);
      gold = &*loaded;
    }
    const PolicyGuardrail guardrail(*policy);
    EvalReport heldout = WriteReport("heldout", RunGuardrail(guardrail, *gold),
                                     *gold);
    std::optional<EvalReport> csrt, sandwich;
    if (csrt_ && !csrt_->empty()) {
      csrt = WriteReport("csrt", RunGuardrail(guardrail, *csrt_), *csrt_);
      if (heldout.Language("en") != nullptr) {
        heldout.deltas["csrt"] = AttackDelta(heldout, *csrt, AttackKind::kCsrt);
      }
    }
    if (sandwich_ && !sandwich_->empty()) {
      sandwich =
          WriteReport("sandwich", RunGuardrail(guardrail, *sandwich_), *sandwich_);
      heldout.deltas["sandwich"] =
          AttackDelta(heldout, *sandwich, AttackKind::kSandwich);
    }
    SaveReport("heldout", heldout);
    if (csrt) SaveReport("csrt", *csrt);
    if (sandwich) SaveReport("sandwich", *sandwich);
  }

  const RunConfig& config_;
  fs::path run_dir_;
  std::optional<Backend> backend_;
  nlohmann::ordered_json manifest_;
  nlohmann::ordered_json current_;
  std::optional<Dataset> multi_, heldout_, heldout_scored_, csrt_, sandwich_;
  std::optional<PolicySnapshot> ref_, policy_;
  std::optional<Curriculum> curriculum_;
};

}  // namespace

RunResult RunPipeline(const RunConfig& config) {
  ValidateRunConfig(config);
  const fs::path run_dir = NextRunDir(config.out_dir);
  fs::create_directories(run_dir);
  PipelineRun run(config, run_dir);
  return {run_dir, run.Execute()};
}

}  // namespace polyguard
