#pragma once

#include <map>
#include <string>
#include <vector>

#include "renn/corpus.hpp"
#include "renn/rule_engine.hpp"

namespace renn {

struct LabelPRF {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
  double accuracy = 0;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
  double micro_precision = 0, micro_recall = 0, micro_f1 = 0;
  std::map<std::string, LabelPRF> per_label;
};

// Reserved prediction when no rule fires in REO mode; never equals a gold
// label, so it always counts as wrong.
inline const std::string kAbstain = "<abstain>";

double accuracy(const std::vector<std::string>& pred,
                const std::vector<std::string>& gold);

// Per-label precision/recall with the 0/0 := 0 convention; macro precision
// and recall are unweighted means, macro-F1 their harmonic mean.
EvalReport macro_f1(const std::vector<std::string>& pred,
                    const std::vector<std::string>& gold,
                    const std::vector<std::string>& label_set);

// Counts pooled over all positive labels ("O" excluded by the caller).
EvalReport micro_f1(const std::vector<std::string>& pred,
                    const std::vector<std::string>& gold,
                    const std::vector<std::string>& positive_labels);

// Token-level (default) or span-level slot evaluation over BIO sequences.
EvalReport evaluate_slot_sequences(const std::vector<std::vector<std::string>>& pred,
                                   const std::vector<std::vector<std::string>>& gold,
                                   const std::vector<std::string>& label_set,
                                   bool span_level = false);

// Deterministic adjudication when several rules fire: largest group count
// first, then lexicographically smallest tag; kAbstain when nothing fires.
std::string reo_intent_prediction(const CompiledRuleSet& rs,
                                  const std::vector<std::string>& tokens);
std::vector<std::string> reo_slot_prediction(const CompiledRuleSet& rs,
                                             const std::vector<std::string>& tokens);

enum class ReoTask { intent, slot };

EvalReport evaluate_reo(const CompiledRuleSet& rs, const Dataset& gold, ReoTask task,
                        bool span_level = false);

}  // namespace renn
