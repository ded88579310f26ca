#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "renn/tensor.hpp"

namespace renn {

enum class RuleScope { intent, slot };
enum class Polarity { positive, negative };

struct GroupTag {
  std::size_t group = 0;  // 1-based capture group index
  std::string tag;
};

// One annotated regular-expression rule as written by a rule author.
// target_labels maps a simplified tag (e.g. "city") onto the task labels it
// can stand for; when empty, the tag stands for itself.
struct RuleSpec {
  std::string id;
  RuleScope scope = RuleScope::intent;
  std::string pattern;  // may reference __MACRO word lists
  std::string retag;
  Polarity polarity = Polarity::positive;
  std::vector<GroupTag> group_tags;
  std::vector<std::size_t> clue_groups;
  std::vector<std::string> target_labels;
};

// Macro name -> word list. Names must match __[A-Z_]+ and lists be non-empty.
using MacroTable = std::map<std::string, std::vector<std::string>>;

struct RuleStats {
  std::size_t group_count = 0;
  // Disjunction separators written by the author (outside character classes,
  // before macro expansion); macro word lists are not counted.
  std::size_t or_clause_count = 0;
};

struct CompiledRule {
  RuleSpec spec;
  std::string expanded;  // macro-expanded pattern
  std::regex matcher;    // case-insensitive ECMAScript
  std::size_t group_count = 0;
  std::size_t source_index = 0;  // original rule index (self unless derived)
  RuleStats stats;
};

struct CompileOptions {
  // A slot rule with no tagged groups can only signal match/no-match; it is
  // rejected unless the rule set is declared input/output-level only.
  bool allow_ungrouped_slot_rules = false;
};

class CompiledRuleSet {
 public:
  std::vector<CompiledRule> rules;
  MacroTable macros;
  CompileOptions options;

  std::size_t size() const { return rules.size(); }
};

// [begin, end) character offsets into the space-joined token string.
struct MatchSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct RuleMatch {
  MatchSpan whole;
  std::vector<std::optional<MatchSpan>> groups;  // index 0 unused; 1-based
};

struct SlotTag {
  std::string tag;        // BIO form, e.g. "B-city"
  std::size_t rule = 0;   // index into CompiledRuleSet::rules
  bool operator==(const SlotTag&) const = default;
};

struct MatchAnnotation {
  std::vector<std::pair<std::string, Polarity>> intent_tags;  // sorted, unique
  std::vector<std::vector<SlotTag>> slot_tags;                // per-token multiset
};

enum class IndicatorGranularity { sentence, token };

std::string expand_macros(const std::string& pattern, const MacroTable& macros);

MacroTable load_macro_file(const std::string& path);
std::vector<RuleSpec> load_rule_file(const std::string& path);
void save_rule_file(const std::vector<RuleSpec>& rules, const std::string& path);
void save_macro_file(const MacroTable& macros, const std::string& path);

CompiledRuleSet compile_rules(std::vector<RuleSpec> rules, MacroTable macros,
                              CompileOptions opts = {});
CompiledRuleSet compile_ruleset(const std::string& rule_path,
                                const std::string& macro_path,
                                CompileOptions opts = {});

// All non-overlapping matches of one rule, scanning left to right from each
// match end, against the space-joined token string.
std::vector<RuleMatch> find_matches(const CompiledRule& rule, const std::string& text);

std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<MatchSpan> token_spans(const std::vector<std::string>& tokens);

std::vector<std::pair<std::string, Polarity>> annotate_intent(
    const CompiledRuleSet& rs, const std::vector<std::string>& tokens);

std::vector<std::vector<SlotTag>> annotate_slots(const CompiledRuleSet& rs,
                                                 const std::vector<std::string>& tokens);

MatchAnnotation annotate(const CompiledRuleSet& rs, const std::vector<std::string>& tokens);

// Attention targets for sentence classification: row k covers label_set[k];
// marked positions hold 1/l_k where l_k is the number of distinct clue tokens
// over all matched rules of the requested polarity for that label. Rows with
// no matched rule are all zero.
std::vector<std::vector<double>> clue_mask(const CompiledRuleSet& rs,
                                           const std::vector<std::string>& tokens,
                                           const std::vector<std::string>& label_set,
                                           Polarity which = Polarity::positive);

// Attention targets for sequence labeling, one row per token. A matched rule
// supports the tokens covered by its tagged groups; its clue tokens become
// positive targets for those rows and negative targets for all other rows.
std::vector<std::vector<double>> slot_clue_mask(const CompiledRuleSet& rs,
                                                const std::vector<std::string>& tokens,
                                                Polarity which = Polarity::positive);

// Sentence-level 0/1 indicators over target_labels from positive intent rules.
std::vector<double> label_indicators(const CompiledRuleSet& rs,
                                     const std::vector<std::string>& tokens,
                                     const std::vector<std::string>& target_labels);

// Token-level indicators from positive slot rules. Labels may be given either
// bare ("fromloc.city") or in BIO form ("B-fromloc.city"); BIO labels are set
// according to the token's position inside the tagged group span.
std::vector<std::vector<double>> label_indicators_tokens(
    const CompiledRuleSet& rs, const std::vector<std::string>& tokens,
    const std::vector<std::string>& target_labels);

// Registers every positive rule of label j as a negative rule for each other
// label in label_set. Originals are kept unchanged.
CompiledRuleSet derive_negatives(const CompiledRuleSet& rs,
                                 const std::vector<std::string>& label_set);

std::vector<RuleStats> rule_stats(const CompiledRuleSet& rs);

}  // namespace renn
