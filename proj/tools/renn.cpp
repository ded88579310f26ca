// Command-line front end: data splits, rule annotation, training, evaluation
// and result tables, plus a self-contained synthetic corpus generator.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "renn/corpus.hpp"
#include "renn/experiment.hpp"
#include "renn/metrics.hpp"
#include "renn/models.hpp"
#include "renn/rule_engine.hpp"
#include "renn/synthetic.hpp"

namespace {

using nlohmann::json;

int cmd_synth(std::uint64_t seed, const std::string& out_dir) {
  renn::SyntheticCorpus c = renn::generate_synthetic(seed, out_dir);
  std::cout << "train: " << c.train_path << " (" << c.train.sentences.size()
            << " sentences)\n"
            << "test:  " << c.test_path << " (" << c.test.sentences.size()
            << " sentences)\n"
            << "rules: " << c.intent_rule_path << ", " << c.slot_simple_rule_path
            << ", " << c.slot_full_rule_path << "\n"
            << "macros: " << c.macro_path << "\n";
  return 0;
}

int cmd_split(const std::string& data, const std::string& task, std::size_t k,
              std::uint64_t seed, bool partial, const std::string& out,
              const std::string& manifest) {
  renn::Dataset ds = renn::load_dataset(data);
  renn::Split split;
  if (partial) {
    split = renn::partial_few_shot_intent(ds, k, seed);
  } else if (task == "intent") {
    split = renn::few_shot_split_intent(ds, k, seed);
  } else if (task == "slot") {
    split = renn::few_shot_split_slot(ds, k, seed);
  } else {
    throw renn::Error("split: task must be intent or slot");
  }
  renn::save_dataset(split.data, out);
  if (!manifest.empty()) renn::save_split_manifest(split, manifest);
  std::cout << "selected " << split.data.sentences.size() << " of "
            << ds.sentences.size() << " sentences -> " << out << "\n";
  return 0;
}

int cmd_annotate(const std::string& rules_path, const std::string& macros_path,
                 const std::string& data, const std::string& out,
                 bool allow_ungrouped) {
  renn::CompileOptions opts;
  opts.allow_ungrouped_slot_rules = allow_ungrouped;
  renn::CompiledRuleSet rs = renn::compile_ruleset(rules_path, macros_path, opts);
  renn::Dataset ds = renn::load_dataset(data);
  json lines = json::array();
  for (const auto& s : ds.sentences) {
    json j;
    j["tokens"] = s.tokens;
    json itags = json::array();
    for (const auto& [tag, pol] : renn::annotate_intent(rs, s.tokens))
      itags.push_back({{"tag", tag},
                       {"polarity", pol == renn::Polarity::positive ? "positive" : "negative"}});
    j["intent_tags"] = itags;
    json stags = json::array();
    for (const auto& per_tok : renn::annotate_slots(rs, s.tokens)) {
      json cell = json::array();
      for (const auto& st : per_tok)
        cell.push_back({{"tag", st.tag}, {"rule", rs.rules[st.rule].spec.id}});
      stags.push_back(cell);
    }
    j["slot_tags"] = stags;
    lines.push_back(j);
  }
  std::ofstream os(out);
  if (!os) throw renn::Error("cannot write " + out);
  for (const auto& j : lines) os << j.dump() << "\n";
  std::cout << "annotated " << ds.sentences.size() << " sentences -> " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::int64_t seed_override) {
  renn::ExperimentConfig config = renn::ExperimentConfig::from_json_file(config_path);
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
  renn::RunReport report = renn::run_experiment(config, out_dir);
  std::cout << "run " << report.config_hash << " finished in " << report.wall_seconds
            << "s\n";
  if (config.task == renn::Task::intent)
    std::cout << "test macro-F1 " << report.eval.macro_f1 << ", accuracy "
              << report.eval.accuracy << "\n";
  else
    std::cout << "test macro-F1 " << report.eval.macro_f1 << ", micro-F1 "
              << report.eval.micro_f1 << "\n";
  std::cout << "report: " << out_dir << "/" << report.config_hash << "/report.json\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint, bool reo,
             const std::string& out) {
  renn::ExperimentConfig config = renn::ExperimentConfig::from_json_file(config_path);
  renn::Dataset test = renn::load_dataset(config.test_path);
  renn::EvalReport eval;
  if (reo) {
    renn::CompileOptions opts;
    opts.allow_ungrouped_slot_rules = config.allow_ungrouped_slot_rules;
    renn::CompiledRuleSet rs =
        renn::compile_ruleset(config.rule_file, config.macro_file, opts);
    eval = renn::evaluate_reo(rs, test,
                              config.task == renn::Task::intent
                                  ? renn::ReoTask::intent
                                  : renn::ReoTask::slot);
  } else {
    if (checkpoint.empty()) throw renn::Error("eval: --checkpoint required without --reo");
    eval = renn::evaluate_checkpoint(config, checkpoint);
  }
  json j = {{"accuracy", eval.accuracy},
            {"macro_f1", eval.macro_f1},
            {"micro_f1", eval.micro_f1},
            {"macro_precision", eval.macro_precision},
            {"macro_recall", eval.macro_recall},
            {"micro_precision", eval.micro_precision},
            {"micro_recall", eval.micro_recall}};
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(out);
    os << j.dump(2) << "\n";
    std::cout << "report -> " << out << "\n";
  }
  return 0;
}

int cmd_table(const std::vector<std::string>& report_paths, const std::string& out) {
  std::vector<renn::RunReport> reports;
  for (const auto& p : report_paths) reports.push_back(renn::load_report(p));
  std::string table = renn::emit_table(reports);
  if (out.empty()) {
    std::cout << table;
  } else {
    std::ofstream os(out);
    os << table;
    std::cout << "table -> " << out << "\n";
  }
  return 0;
}

int cmd_gradcheck() {
  auto results = renn::run_grad_check_suite();
  bool ok = true;
  for (const auto& r : results) {
    bool pass = r.max_rel_error <= 1e-4;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << renn::task_name(r.task) << "/"
              << renn::variant_name(r.variant) << "  max rel err " << r.max_rel_error
              << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regex-guided neural intent detection and slot filling"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  auto* synth = app.add_subcommand("synth", "generate the synthetic corpus and rules");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", out_dir, "output directory")->required();

  std::string data, task = "intent", out, manifest;
  std::size_t k = 5;
  bool partial = false;
  auto* split = app.add_subcommand("split", "build a few-shot training split");
  split->add_option("--data", data, "dataset file")->required();
  split->add_option("--task", task, "intent|slot");
  split->add_option("--k", k, "shot count");
  split->add_option("--seed", seed, "split seed");
  split->add_flag("--partial", partial, "partial few-shot (intent only)");
  split->add_option("--out", out, "output dataset file")->required();
  split->add_option("--manifest", manifest, "also write a JSON manifest");

  std::string rules_path, macros_path;
  bool allow_ungrouped = false;
  auto* annotate = app.add_subcommand("annotate", "dump rule annotations for a dataset");
  annotate->add_option("--rules", rules_path, "rule file (JSONL)")->required();
  annotate->add_option("--macros", macros_path, "macro file (JSON)");
  annotate->add_option("--data", data, "dataset file")->required();
  annotate->add_option("--out", out, "output JSONL file")->required();
  annotate->add_flag("--allow-ungrouped-slot-rules", allow_ungrouped,
                     "accept slot rules without group tags");

  std::string config_path;
  std::int64_t seed_override = -1;
  auto* train = app.add_subcommand("train", "run one experiment from a JSON config");
  train->add_option("--config", config_path, "experiment config JSON")->required();
  train->add_option("--out-dir", out_dir, "reports root directory");
  train->add_option("--seed", seed_override, "override the config seed");

  std::string checkpoint;
  bool reo = false;
  auto* eval = app.add_subcommand("eval", "evaluate rules (REO) on the test set");
  eval->add_option("--config", config_path, "experiment config JSON")->required();
  eval->add_option("--checkpoint", checkpoint, "model checkpoint");
  eval->add_flag("--reo", reo, "evaluate rule output directly");
  eval->add_option("--out", out, "write the report JSON here");

  std::vector<std::string> report_paths;
  auto* table = app.add_subcommand("table", "format run reports as a comparison grid");
  table->add_option("--reports", report_paths, "report.json files")->required();
  table->add_option("--out", out, "write the table here");

  app.add_subcommand("gradcheck", "finite-difference check of every model variant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(seed, out_dir);
    if (split->parsed()) return cmd_split(data, task, k, seed, partial, out, manifest);
    if (annotate->parsed())
      return cmd_annotate(rules_path, macros_path, data, out, allow_ungrouped);
    if (train->parsed()) return cmd_train(config_path, out_dir, seed_override);
    if (eval->parsed()) return cmd_eval(config_path, checkpoint, reo, out);
    if (table->parsed()) return cmd_table(report_paths, out);
    if (app.get_subcommand("gradcheck")->parsed()) return cmd_gradcheck();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
