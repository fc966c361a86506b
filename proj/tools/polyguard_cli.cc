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

// Command-line entry point: one subcommand per pipeline stage plus `run`.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polyguard/attacks.h"
#include "polyguard/config.h"
#include "polyguard/curriculum.h"
#include "polyguard/dataset.h"
#include "polyguard/error.h"
#include "polyguard/eval.h"
#include "polyguard/grpo.h"
#include "polyguard/hashing.h"
#include "polyguard/pipeline.h"
#include "polyguard/policy.h"
#include "polyguard/sft.h"
#include "polyguard/synthgen.h"
#include "polyguard/toyworld.h"

namespace pg = polyguard;

namespace {

struct Globals {
  std::string backend = "toyworld";
  pg::ToySettings toy;
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pg::Error("cannot open for writing: " + path);
  out << text;
}

std::vector<pg::LanguageCode> ParseLangs(const std::string& csv) {
  std::vector<pg::LanguageCode> langs;
  for (const auto& code : pg::SplitList(csv)) langs.emplace_back(code);
  return langs;
}

int Fail(const std::string& command, const std::string& kind,
         const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = message;
  j["kind"] = kind;
  if (!command.empty()) j["command"] = command;
  std::cerr << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyguard: multilingual guardrail training pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--backend", g.backend, "toyworld | remote")
      ->check(CLI::IsMember({"toyworld", "remote"}));
  app.add_option("--world-seed", g.toy.world_seed, "toyworld alphabet seed");
  app.add_option("--refusal-rate", g.toy.refusal_rate, "toyworld refusals");
  app.add_option("--flip-rate", g.toy.flip_rate, "toyworld reassessment flips");

  std::function<void()> action;

  // synth
  std::string synth_seed, synth_langs = "ar,es,zh,ru", synth_out, synth_report;
  std::size_t synth_n = 2000;
  std::uint64_t synth_rng = 7;
  bool keep_conflicts = false;
  std::optional<double> min_toxicity;
  auto* synth = app.add_subcommand("synth", "annotate, translate and filter");
  synth->add_option("--seed", synth_seed, "English seed JSONL")->required();
  synth->add_option("--langs", synth_langs, "target languages");
  synth->add_option("--n", synth_n, "seeds to translate");
  synth->add_option("--out", synth_out, "output dataset")->required();
  synth->add_option("--report", synth_report, "JSON report");
  synth->add_option("--rng-seed", synth_rng, "subsample seed");
  synth->add_option("--min-toxicity", min_toxicity, "ingest filter");
  synth->add_flag("--keep-conflicts", keep_conflicts,
                  "quarantine conflicts instead of dropping them");
  synth->callback([&] {
    action = [&] {
      const auto backend = pg::MakeBackend(g.backend, g.toy);
      const pg::Dataset seeds =
          pg::IngestCorpusFile(synth_seed, {min_toxicity});
      pg::SynthReport report;
      const pg::Dataset annotated =
          pg::AnnotateReasoning(seeds, *backend.clients.generator, report);
      pg::SynthConfig cfg{ParseLangs(synth_langs), synth_n, synth_rng,
                          !keep_conflicts, {}};
      const pg::Dataset translated = pg::TranslateAndFilter(
          annotated, cfg, *backend.clients.generator, report);
      const pg::Dataset out = pg::AssembleMultilingualDataset(
          annotated, translated, *backend.clients.generator, report);
      pg::WriteDatasetFile(out, synth_out);
      if (!synth_report.empty()) {
        WriteText(synth_report, report.ToJson().dump(2) + "\n");
      }
    };
  });

  // sft
  std::string sft_in, sft_out, sft_metrics, sft_order = "en_first";
  pg::SftConfig sft_cfg;
  int context_order = 2, max_len = 24;
  std::uint64_t sft_seed = 7;
  auto* sft = app.add_subcommand("sft", "supervised fine-tuning");
  sft->add_option("--in", sft_in, "training dataset")->required();
  sft->add_option("--out", sft_out, "output policy")->required();
  sft->add_option("--metrics", sft_metrics, "per-epoch loss JSONL");
  sft->add_option("--lr", sft_cfg.learning_rate, "learning rate");
  sft->add_option("--epochs", sft_cfg.epochs, "epochs");
  sft->add_option("--batch-size", sft_cfg.batch_size, "0 = full batch");
  sft->add_option("--target-order", sft_order, "en_first | native_first")
      ->check(CLI::IsMember({"en_first", "native_first"}));
  sft->add_option("--context-order", context_order, "policy context length");
  sft->add_option("--max-len", max_len, "output token limit");
  sft->add_option("--seed", sft_seed, "shuffle seed");
  sft->callback([&] {
    action = [&] {
      const auto backend = pg::MakeBackend(g.backend, g.toy);
      const pg::Dataset data = pg::ReadDatasetFile(sft_in);
      sft_cfg.target_order = *pg::ParseTargetOrder(sft_order);
      pg::PolicySnapshot init(pg::Vocabulary(pg::PolicyWords(backend, {&data})),
                              context_order, max_len);
      std::vector<pg::SftEpochStats> stats;
      const auto policy = pg::TrainSft(init, data, sft_cfg, sft_seed, &stats);
      pg::SavePolicy(policy, sft_out);
      if (!sft_metrics.empty()) {
        std::string lines;
        for (const auto& s : stats) {
          lines += nlohmann::ordered_json{{"epoch", s.epoch},
                                          {"mean_nll", s.mean_nll}}
                       .dump() +
                   "\n";
        }
        WriteText(sft_metrics, lines);
      }
    };
  });

  // curriculum
  std::string cur_in, cur_seed_en, cur_out;
  pg::DifficultyConfig diff;
  auto* curriculum =
      app.add_subcommand("curriculum", "score difficulty and build stages");
  curriculum->add_option("--in", cur_in, "translated examples")->required();
  curriculum->add_option("--seed-en", cur_seed_en, "English seeds")->required();
  curriculum->add_option("--t1", diff.t1, "level-0 threshold");
  curriculum->add_option("--t2", diff.t2, "level-1 threshold");
  curriculum->add_option("--out", cur_out, "curriculum JSONL")->required();
  curriculum->callback([&] {
    action = [&] {
      const auto backend = pg::MakeBackend(g.backend, g.toy);
      const pg::Dataset input = pg::ReadDatasetFile(cur_in);
      const pg::Dataset seeds = pg::ReadDatasetFile(cur_seed_en);
      pg::Dataset translated;
      for (const auto& example : input) {
        if (!example.lang.is_english()) translated.Add(example);
      }
      auto pool = pg::PrepareCurriculumPool(translated, seeds, backend.clients,
                                            diff);
      const auto schedule =
          pg::BuildSchedule(pool.examples, seeds, pool.cosines);
      pg::WriteCurriculumFile(schedule, cur_out);
    };
  });

  // grpo
  std::string grpo_ref, grpo_cur, grpo_config, grpo_out, grpo_metrics,
      grpo_eval;
  std::uint64_t grpo_seed = 7;
  auto* grpo = app.add_subcommand("grpo", "curriculum-guided GRPO");
  grpo->add_option("--ref", grpo_ref, "SFT policy")->required();
  grpo->add_option("--curriculum", grpo_cur, "curriculum JSONL")->required();
  grpo->add_option("--config", grpo_config, "key = value config");
  grpo->add_option("--seed", grpo_seed, "seed");
  grpo->add_option("--out", grpo_out, "output policy")->required();
  grpo->add_option("--metrics", grpo_metrics, "per-epoch JSONL");
  grpo->add_option("--eval", grpo_eval, "evaluation prompts");
  grpo->callback([&] {
    action = [&] {
      const auto backend = pg::MakeBackend(g.backend, g.toy);
      pg::KeyValueConfig kv;
      if (!grpo_config.empty()) kv = pg::KeyValueConfig::ParseFile(grpo_config);
      const pg::GrpoConfig cfg = pg::GrpoConfigFromKeyValue(kv);
      const pg::RewardConfig rcfg = pg::RewardConfigFromKeyValue(kv);
      const auto ref = pg::LoadPolicy(grpo_ref);
      const auto schedule = pg::ReadCurriculumFile(grpo_cur);
      std::optional<pg::Dataset> eval;
      if (!grpo_eval.empty()) eval = pg::ReadDatasetFile(grpo_eval);
      const pg::RewardEngine engine(rcfg, *backend.clients.scorer,
                                    *backend.clients.detector);
      std::ofstream metrics;
      if (!grpo_metrics.empty()) {
        metrics.open(grpo_metrics, std::ios::binary);
        if (!metrics) throw pg::Error("cannot open for writing: " + grpo_metrics);
      }
      std::span<const pg::LabeledExample> eval_span;
      if (eval) eval_span = eval->examples();
      auto result = pg::TrainGrpo(
          ref, schedule, engine, cfg, grpo_seed, eval_span,
          [&](const pg::GrpoEpochMetrics& m) {
            if (metrics.is_open()) metrics << m.ToJson().dump() << '\n';
          });
      pg::SavePolicy(result.policy, grpo_out);
    };
  });

  // attack
  std::string atk_in, atk_kind, atk_benign, atk_out, atk_template;
  std::size_t atk_k = 2;
  std::uint64_t atk_seed = 7;
  auto* attack = app.add_subcommand("attack", "CSRT or sandwich variants");
  attack->add_option("--in", atk_in, "dataset")->required();
  attack->add_option("--kind", atk_kind, "csrt | sandwich")
      ->required()
      ->check(CLI::IsMember({"csrt", "sandwich"}));
  attack->add_option("--benign", atk_benign, "benign question dataset");
  attack->add_option("--k", atk_k, "benign questions per side");
  attack->add_option("--seed", atk_seed, "seed");
  attack->add_option("--template", atk_template, "wrapper template JSON");
  attack->add_option("--out", atk_out, "output dataset")->required();
  attack->callback([&] {
    action = [&] {
      const pg::Dataset input = pg::ReadDatasetFile(atk_in);
      pg::Dataset out;
      if (atk_kind == "csrt") {
        const auto backend = pg::MakeBackend(g.backend, g.toy);
        out = pg::MakeCsrtAttacks(input, *backend.clients.generator);
      } else {
        if (atk_benign.empty()) throw pg::Error("--benign is required");
        pg::SandwichConfig cfg;
        cfg.k = atk_k;
        cfg.benign_corpus = pg::BenignFromDataset(pg::ReadDatasetFile(atk_benign));
        if (!atk_template.empty()) cfg.tmpl = pg::LoadSandwichTemplate(atk_template);
        out = pg::MakeSandwichAttacks(input, cfg, atk_seed);
      }
      pg::WriteDatasetFile(out, atk_out);
    };
  });

  // eval
  std::string ev_in, ev_policy, ev_preds, ev_preds_out, ev_report, ev_table,
      ev_csv, ev_id_langs = "en,ar,es,zh,ru";
  bool ev_remote = false;
  auto* eval = app.add_subcommand("eval", "F1 report for a guardrail");
  eval->add_option("--in", ev_in, "gold dataset");
  eval->add_option("--policy", ev_policy, "local policy");
  eval->add_flag("--remote", ev_remote, "POST /classify to the backend URL");
  eval->add_option("--predictions", ev_preds, "score an existing file");
  eval->add_option("--predictions-out", ev_preds_out, "write predictions");
  eval->add_option("--report", ev_report, "report JSON");
  eval->add_option("--table", ev_table, "text table");
  eval->add_option("--csv", ev_csv, "per-cell CSV");
  eval->add_option("--id-langs", ev_id_langs, "in-domain languages");
  std::string d_orig, d_attacked, d_mode;
  auto* delta = eval->add_subcommand("delta", "attack delta of two reports");
  delta->add_option("--orig", d_orig, "report before attack")->required();
  delta->add_option("--attacked", d_attacked, "report after attack")->required();
  delta->add_option("--mode", d_mode, "csrt | sandwich")
      ->required()
      ->check(CLI::IsMember({"csrt", "sandwich"}));
  delta->callback([&] {
    action = [&] {
      auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw pg::Error("cannot open: " + path);
        return pg::EvalReport::FromJson(nlohmann::json::parse(in));
      };
      const double d = pg::AttackDelta(load(d_orig), load(d_attacked),
                                       *pg::ParseAttackKind(d_mode));
      nlohmann::ordered_json j{{"mode", d_mode},
                               {"delta", d},
                               {"delta_pct", pg::FormatPercent(d)}};
      std::cout << j.dump() << std::endl;
    };
  });
  eval->callback([&] {
    if (*delta) return;
    action = [&] {
      if (ev_in.empty()) throw pg::Error("--in is required");
      const pg::Dataset gold = pg::ReadDatasetFile(ev_in);
      pg::PredictionSet preds;
      if (!ev_preds.empty()) {
        preds = pg::ReadPredictionsFile(ev_preds);
      } else if (!ev_policy.empty()) {
        preds = pg::RunGuardrail(pg::PolicyGuardrail(pg::LoadPolicy(ev_policy)),
                                 gold);
      } else if (ev_remote) {
        preds = pg::RunGuardrail(
            pg::RemoteGuardrail(pg::Endpoint::FromEnvironment()), gold);
      } else {
        throw pg::Error("one of --predictions, --policy or --remote is required");
      }
      if (!ev_preds_out.empty()) pg::WritePredictionsFile(preds, ev_preds_out);
      std::set<pg::LanguageCode> id_langs;
      for (const auto& lang : ParseLangs(ev_id_langs)) id_langs.insert(lang);
      const auto report = pg::BreakdownReport(preds, gold, id_langs);
      if (!ev_report.empty()) WriteText(ev_report, report.ToJson().dump(2) + "\n");
      if (!ev_table.empty()) WriteText(ev_table, report.TextTable());
      if (!ev_csv.empty()) WriteText(ev_csv, report.Csv());
      std::cout << report.TextTable();
    };
  });

  // run
  std::string run_config;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "full pipeline from one config");
  run->add_option("--config", run_config, "key = value config");
  run->add_option("--set", overrides, "key=value override")->take_all();
  run->callback([&] {
    action = [&] {
      pg::KeyValueConfig kv;
      if (!run_config.empty()) kv = pg::KeyValueConfig::ParseFile(run_config);
      for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
          throw pg::ValidationError("--set", "expected key=value: " + item);
        }
        kv.Set(item.substr(0, eq), item.substr(eq + 1));
      }
      const auto result = pg::RunPipeline(pg::RunConfigFromKeyValue(kv));
      nlohmann::ordered_json j{
          {"run_dir", result.run_dir.string()},
          {"manifest_sha256", pg::Sha256File(result.run_dir / "manifest.json")}};
      std::cout << j.dump() << std::endl;
    };
  });

  // config init
  std::string config_out;
  auto* config = app.add_subcommand("config", "configuration helpers");
  config->require_subcommand(1);
  auto* init = config->add_subcommand("init", "write the reference config");
  init->add_option("--out", config_out, "destination (stdout when omitted)");
  init->callback([&] {
    action = [&] {
      const std::string text = pg::ReferenceConfigText();
      if (config_out.empty()) {
        std::cout << text;
      } else {
        WriteText(config_out, text);
      }
    };
  });

  // toy data
  std::string toy_out, toy_lang = "ru";
  std::size_t toy_n = 500;
  std::uint64_t toy_seed = 7;
  auto* toy = app.add_subcommand("toy", "toyworld data generators");
  toy->require_subcommand(1);
  auto* corpus = toy->add_subcommand("corpus", "English seed corpus");
  corpus->add_option("--n", toy_n, "examples");
  corpus->add_option("--seed", toy_seed, "seed");
  corpus->add_option("--out", toy_out, "output dataset")->required();
  corpus->callback([&] {
    action = [&] {
      pg::ToyWorldOptions opts;
      opts.seed = g.toy.world_seed;
      pg::WriteDatasetFile(pg::MakeToyCorpus(pg::ToyWorld(opts), toy_n, toy_seed),
                           toy_out);
    };
  });
  auto* benign = toy->add_subcommand("benign", "benign questions");
  benign->add_option("--lang", toy_lang, "language");
  benign->add_option("--n", toy_n, "examples");
  benign->add_option("--seed", toy_seed, "seed");
  benign->add_option("--out", toy_out, "output dataset")->required();
  benign->callback([&] {
    action = [&] {
      pg::ToyWorldOptions opts;
      opts.seed = g.toy.world_seed;
      pg::WriteDatasetFile(
          pg::MakeToyBenignCorpus(pg::ToyWorld(opts), pg::LanguageCode(toy_lang),
                                  toy_n, toy_seed),
          toy_out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail("", "usage", e.what(), 2);
  }
  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  try {
    if (action) action();
  } catch (const pg::ValidationError& e) {
    return Fail(command, "validation", e.what(), 1);
  } catch (const std::exception& e) {
    return Fail(command, "error", e.what(), 1);
  }
  return 0;
}
