#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "renn/corpus.hpp"
#include "renn/metrics.hpp"
#include "renn/models.hpp"
#include "renn/rule_engine.hpp"

namespace renn {

struct Hyper {
  std::size_t batch = 16;
  double dropout = 0.5;
  std::size_t hidden = 100;
  double lr = 1e-3;
  double beta_p = 1.0;
  double beta_n = 1.0;
  std::size_t tag_dim = 20;
  std::size_t epochs = 0;  // 0 = pick default for the split kind
  double clip = 5.0;
  std::size_t emb_dim = 100;
};

struct SplitSpec {
  enum class Kind { full, few_shot, partial };
  Kind kind = Kind::full;
  std::size_t k = 0;

  std::string name() const;
};

struct ExperimentConfig {
  Task task = Task::intent;
  Variant variant = Variant::base;
  SplitSpec split;
  std::uint64_t seed = 1;
  std::string rule_file, macro_file;
  std::string train_path, test_path;
  std::string embedding_path;  // optional
  bool allow_ungrouped_slot_rules = false;
  Hyper hyper;

  // Fills split-dependent defaults: attention loss weight 16 for few-shot
  // runs and 1 otherwise; 100 epochs for few-shot, 30 with a 10% held-out
  // slice otherwise.
  void resolve_defaults(bool beta_given, bool epochs_given);

  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;
  std::string hash() const;
};

struct RunReport {
  ExperimentConfig config;
  std::string config_hash;
  EvalReport eval;
  std::vector<double> loss_curve;      // mean per-sentence loss per epoch
  std::vector<double> val_curve;       // held-out metric per epoch (may be empty)
  std::size_t best_epoch = 0;          // 1-based; 0 = final model used
  double wall_seconds = 0;
  std::string checkpoint_path;

  std::string to_json() const;
  void save(const std::string& path) const;
};

RunReport run_experiment(const ExperimentConfig& config, const std::string& out_dir);
RunReport load_report(const std::string& path);

// Rebuilds the model a config describes, loads saved parameters into it and
// evaluates on the config's test set.
EvalReport evaluate_checkpoint(const ExperimentConfig& config,
                               const std::string& checkpoint_path);

// Rule evaluation outcome of one sentence mapped onto a model's id spaces.
AnnotatedSentence annotate_for_model(
    const Sentence& s, Task task, const CompiledRuleSet& rules,
    const CompiledRuleSet& rules_with_negatives,
    const std::unordered_map<std::string, std::size_t>& vocab,
    const std::vector<std::string>& intent_labels,
    const std::vector<std::string>& slot_labels,
    const std::unordered_map<std::string, std::size_t>& tag_index);

// Rule tag vocabulary for a compiled set (sorted; NONE is appended by the
// caller as the last row of the embedding table).
std::vector<std::string> rule_tag_vocab(const CompiledRuleSet& rules, Task task);

// "macroF1 / accuracy" cells for intent, "macroF1 / microF1" for slot;
// rows are variants and columns split settings, both in first-seen order.
std::string emit_table(const std::vector<RunReport>& reports);

struct GradCheckResult {
  Task task;
  Variant variant;
  double max_rel_error = 0;
};

// Checks every fusion variant on a small fixed instance (4 tokens, 3 labels);
// 0 checks every coordinate.
std::vector<GradCheckResult> run_grad_check_suite(std::size_t max_coords_per_tensor = 0);

}  // namespace renn
