#include "renn/rule_engine.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace renn {

namespace {

bool is_macro_char(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }

bool valid_macro_name(const std::string& name) {
  if (name.size() < 3 || name[0] != '_' || name[1] != '_') return false;
  for (std::size_t i = 2; i < name.size(); ++i)
    if (!is_macro_char(name[i])) return false;
  return true;
}

std::string escape_regex_word(const std::string& word) {
  static const std::string special = "\\^$.|?*+()[]{}";
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    if (special.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

// Rejects constructs outside the supported dialect: backreferences and
// lookaround. Character classes are skipped during the scan.
void check_dialect(const std::string& pattern, const std::string& rule_id) {
  bool in_class = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '\\') {
      if (i + 1 < pattern.size() && !in_class && pattern[i + 1] >= '1' &&
          pattern[i + 1] <= '9') {
        throw Error("rule '" + rule_id + "': backreferences are not supported (\\" +
                    std::string(1, pattern[i + 1]) + ")");
      }
      ++i;  // skip escaped char
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[') {
      in_class = true;
      continue;
    }
    if (c == '(' && i + 1 < pattern.size() && pattern[i + 1] == '?') {
      if (i + 2 >= pattern.size() || pattern[i + 2] != ':')
        throw Error("rule '" + rule_id +
                    "': lookaround and special groups are not supported");
    }
  }
}

std::size_t count_or_clauses(const std::string& pattern) {
  bool in_class = false;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[')
      in_class = true;
    else if (c == '|')
      ++count;
  }
  return count;
}

std::vector<std::size_t> covered_tokens(const std::vector<MatchSpan>& toks,
                                        MatchSpan g) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < toks.size(); ++i)
    if (toks[i].begin >= g.begin && toks[i].end <= g.end && toks[i].begin < toks[i].end)
      out.push_back(i);
  return out;
}

// Lazily computed matches shared between a rule and its derived copies.
class MatchCache {
 public:
  MatchCache(const CompiledRuleSet& rs, const std::string& text) : rs_(rs), text_(text) {}

  const std::vector<RuleMatch>& get(std::size_t rule_idx) {
    std::size_t key = rs_.rules[rule_idx].source_index;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto [pos, ok] = cache_.emplace(key, find_matches(rs_.rules[rule_idx], text_));
    return pos->second;
  }

 private:
  const CompiledRuleSet& rs_;
  const std::string& text_;
  std::map<std::size_t, std::vector<RuleMatch>> cache_;
};

std::vector<std::vector<double>> rows_from_sets(
    const std::vector<std::set<std::size_t>>& marked, std::size_t n) {
  std::vector<std::vector<double>> t(marked.size(), std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < marked.size(); ++k) {
    if (marked[k].empty()) continue;
    double w = 1.0 / static_cast<double>(marked[k].size());
    for (std::size_t i : marked[k]) t[k][i] = w;
  }
  return t;
}

}  // namespace

std::string expand_macros(const std::string& pattern, const MacroTable& macros) {
  std::string out;
  out.reserve(pattern.size());
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '\\' && i + 1 < pattern.size()) {
      out.push_back(pattern[i]);
      out.push_back(pattern[i + 1]);
      i += 2;
      continue;
    }
    if (pattern[i] == '_' && i + 1 < pattern.size() && pattern[i + 1] == '_') {
      std::size_t j = i + 2;
      while (j < pattern.size() && is_macro_char(pattern[j])) ++j;
      if (j > i + 2) {
        std::string name = pattern.substr(i, j - i);
        auto it = macros.find(name);
        if (it == macros.end()) throw Error("undefined macro '" + name + "'");
        out += "(?:";
        for (std::size_t w = 0; w < it->second.size(); ++w) {
          if (w) out.push_back('|');
          out += escape_regex_word(it->second[w]);
        }
        out += ")";
        i = j;
        continue;
      }
    }
    out.push_back(pattern[i]);
    ++i;
  }
  return out;
}

MacroTable load_macro_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open macro file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error("macro file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Error("macro file " + path + ": expected a JSON object");
  MacroTable macros;
  for (auto& [name, words] : j.items()) {
    if (!valid_macro_name(name))
      throw Error("macro file " + path + ": bad macro name '" + name + "'");
    if (!words.is_array() || words.empty())
      throw Error("macro file " + path + ": macro '" + name + "' needs a non-empty word list");
    std::vector<std::string> list;
    for (const auto& w : words) list.push_back(w.get<std::string>());
    macros.emplace(name, std::move(list));
  }
  return macros;
}

std::vector<RuleSpec> load_rule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rule file: " + path);
  std::vector<RuleSpec> rules;
  std::string line;
  std::size_t lineno = 0;
  static const std::set<std::string> known_keys = {
      "id",          "scope",       "pattern",       "retag",
      "polarity",    "group_tags",  "clue_groups",   "target_labels"};
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object())
      throw Error(path + ":" + std::to_string(lineno) + ": expected a JSON object");
    for (auto& [key, val] : j.items()) {
      if (!known_keys.count(key))
        throw Error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    RuleSpec r;
    r.id = j.value("id", "line" + std::to_string(lineno));
    std::string scope = j.at("scope").get<std::string>();
    if (scope == "intent")
      r.scope = RuleScope::intent;
    else if (scope == "slot")
      r.scope = RuleScope::slot;
    else
      throw Error(path + ":" + std::to_string(lineno) + ": bad scope '" + scope + "'");
    r.pattern = j.at("pattern").get<std::string>();
    r.retag = j.at("retag").get<std::string>();
    std::string pol = j.value("polarity", "positive");
    if (pol == "positive")
      r.polarity = Polarity::positive;
    else if (pol == "negative")
      r.polarity = Polarity::negative;
    else
      throw Error(path + ":" + std::to_string(lineno) + ": bad polarity '" + pol + "'");
    if (j.contains("group_tags")) {
      for (const auto& gt : j.at("group_tags")) {
        if (!gt.is_array() || gt.size() != 2)
          throw Error(path + ":" + std::to_string(lineno) + ": group_tags entries are [index, tag]");
        r.group_tags.push_back({gt[0].get<std::size_t>(), gt[1].get<std::string>()});
      }
    }
    if (j.contains("clue_groups"))
      r.clue_groups = j.at("clue_groups").get<std::vector<std::size_t>>();
    if (j.contains("target_labels"))
      r.target_labels = j.at("target_labels").get<std::vector<std::string>>();
    rules.push_back(std::move(r));
  }
  return rules;
}

void save_rule_file(const std::vector<RuleSpec>& rules, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write rule file: " + path);
  for (const auto& r : rules) {
    nlohmann::json j;
    j["id"] = r.id;
    j["scope"] = r.scope == RuleScope::intent ? "intent" : "slot";
    j["pattern"] = r.pattern;
    j["retag"] = r.retag;
    if (r.polarity == Polarity::negative) j["polarity"] = "negative";
    if (!r.group_tags.empty()) {
      nlohmann::json gts = nlohmann::json::array();
      for (const auto& gt : r.group_tags) gts.push_back({gt.group, gt.tag});
      j["group_tags"] = gts;
    }
    if (!r.clue_groups.empty()) j["clue_groups"] = r.clue_groups;
    if (!r.target_labels.empty()) j["target_labels"] = r.target_labels;
    out << j.dump() << "\n";
  }
}

void save_macro_file(const MacroTable& macros, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write macro file: " + path);
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, words] : macros) j[name] = words;
  out << j.dump(2) << "\n";
}

CompiledRuleSet compile_rules(std::vector<RuleSpec> rules, MacroTable macros,
                              CompileOptions opts) {
  for (const auto& [name, words] : macros) {
    if (!valid_macro_name(name)) throw Error("bad macro name '" + name + "'");
    if (words.empty()) throw Error("macro '" + name + "' has an empty word list");
  }
  CompiledRuleSet rs;
  rs.macros = std::move(macros);
  rs.options = opts;
  rs.rules.reserve(rules.size());
  for (std::size_t idx = 0; idx < rules.size(); ++idx) {
    RuleSpec& spec = rules[idx];
    if (spec.retag.empty()) throw Error("rule '" + spec.id + "': empty retag");
    check_dialect(spec.pattern, spec.id);
    CompiledRule cr;
    cr.expanded = expand_macros(spec.pattern, rs.macros);
    try {
      cr.matcher = std::regex(cr.expanded,
                              std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error("rule '" + spec.id + "' (rule #" + std::to_string(idx + 1) +
                  "): cannot compile pattern: " + e.what());
    }
    cr.group_count = cr.matcher.mark_count();
    for (const auto& gt : spec.group_tags) {
      if (gt.group == 0 || gt.group > cr.group_count)
        throw Error("rule '" + spec.id + "': group_tags references group " +
                    std::to_string(gt.group) + " but pattern has " +
                    std::to_string(cr.group_count) + " groups");
      if (gt.tag.empty()) throw Error("rule '" + spec.id + "': empty group tag");
    }
    for (std::size_t g : spec.clue_groups) {
      if (g == 0 || g > cr.group_count)
        throw Error("rule '" + spec.id + "': clue_groups references group " +
                    std::to_string(g) + " but pattern has " +
                    std::to_string(cr.group_count) + " groups");
    }
    if (spec.scope == RuleScope::slot && spec.group_tags.empty() &&
        !opts.allow_ungrouped_slot_rules)
      throw Error("rule '" + spec.id +
                  "': slot rule without group_tags (enable "
                  "allow_ungrouped_slot_rules for input/output-level rule sets)");
    cr.stats.group_count = cr.group_count;
    cr.stats.or_clause_count = count_or_clauses(spec.pattern);
    cr.source_index = idx;
    cr.spec = std::move(spec);
    rs.rules.push_back(std::move(cr));
  }
  return rs;
}

CompiledRuleSet compile_ruleset(const std::string& rule_path,
                                const std::string& macro_path, CompileOptions opts) {
  MacroTable macros = macro_path.empty() ? MacroTable{} : load_macro_file(macro_path);
  return compile_rules(load_rule_file(rule_path), std::move(macros), opts);
}

std::vector<RuleMatch> find_matches(const CompiledRule& rule, const std::string& text) {
  std::vector<RuleMatch> out;
  const char* base = text.data();
  std::size_t n = text.size();
  std::size_t pos = 0;
  while (pos <= n) {
    std::cmatch m;
    auto flags = std::regex_constants::match_default;
    if (pos > 0) flags |= std::regex_constants::match_prev_avail;
    if (!std::regex_search(base + pos, base + n, m, rule.matcher, flags)) break;
    std::size_t abs_begin = pos + static_cast<std::size_t>(m.position(0));
    std::size_t len = static_cast<std::size_t>(m.length(0));
    RuleMatch rm;
    rm.whole = {abs_begin, abs_begin + len};
    rm.groups.resize(rule.group_count + 1);
    for (std::size_t gidx = 1; gidx <= rule.group_count; ++gidx) {
      if (m[gidx].matched) {
        std::size_t gb = pos + static_cast<std::size_t>(m.position(gidx));
        rm.groups[gidx] = MatchSpan{gb, gb + static_cast<std::size_t>(m.length(gidx))};
      }
    }
    out.push_back(std::move(rm));
    pos = len == 0 ? abs_begin + 1 : abs_begin + len;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<MatchSpan> token_spans(const std::vector<std::string>& tokens) {
  std::vector<MatchSpan> spans;
  spans.reserve(tokens.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) ++pos;  // separating space
    spans.push_back({pos, pos + tokens[i].size()});
    pos += tokens[i].size();
  }
  return spans;
}

std::vector<std::pair<std::string, Polarity>> annotate_intent(
    const CompiledRuleSet& rs, const std::vector<std::string>& tokens) {
  std::string text = join_tokens(tokens);
  MatchCache cache(rs, text);
  std::set<std::pair<std::string, Polarity>> found;
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const CompiledRule& rule = rs.rules[r];
    if (rule.spec.scope != RuleScope::intent) continue;
    if (!cache.get(r).empty()) found.insert({rule.spec.retag, rule.spec.polarity});
  }
  return {found.begin(), found.end()};
}

std::vector<std::vector<SlotTag>> annotate_slots(const CompiledRuleSet& rs,
                                                 const std::vector<std::string>& tokens) {
  std::string text = join_tokens(tokens);
  std::vector<MatchSpan> toks = token_spans(tokens);
  MatchCache cache(rs, text);
  std::vector<std::vector<SlotTag>> tags(tokens.size());
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const CompiledRule& rule = rs.rules[r];
    if (rule.spec.scope != RuleScope::slot) continue;
    if (rule.spec.polarity != Polarity::positive) continue;
    for (const RuleMatch& m : cache.get(r)) {
      for (const auto& gt : rule.spec.group_tags) {
        const auto& span = m.groups[gt.group];
        if (!span) continue;
        std::vector<std::size_t> cov = covered_tokens(toks, *span);
        for (std::size_t j = 0; j < cov.size(); ++j) {
          std::string prefix = j == 0 ? "B-" : "I-";
          tags[cov[j]].push_back({prefix + gt.tag, r});
        }
      }
    }
  }
  return tags;
}

MatchAnnotation annotate(const CompiledRuleSet& rs,
                         const std::vector<std::string>& tokens) {
  MatchAnnotation ann;
  ann.intent_tags = annotate_intent(rs, tokens);
  ann.slot_tags = annotate_slots(rs, tokens);
  return ann;
}

std::vector<std::vector<double>> clue_mask(const CompiledRuleSet& rs,
                                           const std::vector<std::string>& tokens,
                                           const std::vector<std::string>& label_set,
                                           Polarity which) {
  std::string text = join_tokens(tokens);
  std::vector<MatchSpan> toks = token_spans(tokens);
  MatchCache cache(rs, text);
  std::vector<std::set<std::size_t>> marked(label_set.size());
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const CompiledRule& rule = rs.rules[r];
    if (rule.spec.scope != RuleScope::intent) continue;
    if (rule.spec.polarity != which) continue;
    if (rule.spec.clue_groups.empty()) continue;
    auto label_it = std::find(label_set.begin(), label_set.end(), rule.spec.retag);
    if (label_it == label_set.end()) continue;
    std::size_t k = static_cast<std::size_t>(label_it - label_set.begin());
    for (const RuleMatch& m : cache.get(r)) {
      for (std::size_t gidx : rule.spec.clue_groups) {
        const auto& span = m.groups[gidx];
        if (!span) continue;
        for (std::size_t tok : covered_tokens(toks, *span)) marked[k].insert(tok);
      }
    }
  }
  return rows_from_sets(marked, tokens.size());
}

std::vector<std::vector<double>> slot_clue_mask(const CompiledRuleSet& rs,
                                                const std::vector<std::string>& tokens,
                                                Polarity which) {
  std::string text = join_tokens(tokens);
  std::vector<MatchSpan> toks = token_spans(tokens);
  MatchCache cache(rs, text);
  std::vector<std::set<std::size_t>> marked(tokens.size());
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const CompiledRule& rule = rs.rules[r];
    if (rule.spec.scope != RuleScope::slot) continue;
    if (rule.spec.polarity != Polarity::positive) continue;
    if (rule.spec.clue_groups.empty()) continue;
    for (const RuleMatch& m : cache.get(r)) {
      std::set<std::size_t> covered;
      for (const auto& gt : rule.spec.group_tags) {
        const auto& span = m.groups[gt.group];
        if (!span) continue;
        for (std::size_t tok : covered_tokens(toks, *span)) covered.insert(tok);
      }
      std::set<std::size_t> clues;
      for (std::size_t gidx : rule.spec.clue_groups) {
        const auto& span = m.groups[gidx];
        if (!span) continue;
        for (std::size_t tok : covered_tokens(toks, *span)) clues.insert(tok);
      }
      if (clues.empty()) continue;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        bool inside = covered.count(i) > 0;
        if ((which == Polarity::positive) == inside)
          marked[i].insert(clues.begin(), clues.end());
      }
    }
  }
  return rows_from_sets(marked, tokens.size());
}

std::vector<double> label_indicators(const CompiledRuleSet& rs,
                                     const std::vector<std::string>& tokens,
                                     const std::vector<std::string>& target_labels) {
  std::string text = join_tokens(tokens);
  MatchCache cache(rs, text);
  std::vector<double> z(target_labels.size(), 0.0);
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const CompiledRule& rule = rs.rules[r];
    if (rule.spec.scope != RuleScope::intent) continue;
    if (rule.spec.polarity != Polarity::positive) continue;
    if (cache.get(r).empty()) continue;
    std::vector<std::string> targets = rule.spec.target_labels;
    if (targets.empty()) targets.push_back(rule.spec.retag);
    for (const std::string& t : targets) {
      auto it = std::find(target_labels.begin(), target_labels.end(), t);
      if (it != target_labels.end()) z[static_cast<std::size_t>(it - target_labels.begin())] = 1.0;
    }
  }
  return z;
}

std::vector<std::vector<double>> label_indicators_tokens(
    const CompiledRuleSet& rs, const std::vector<std::string>& tokens,
    const std::vector<std::string>& target_labels) {
  std::string text = join_tokens(tokens);
  std::vector<MatchSpan> toks = token_spans(tokens);
  MatchCache cache(rs, text);
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < target_labels.size(); ++i)
    label_index.emplace(target_labels[i], i);
  std::vector<std::vector<double>> z(tokens.size(),
                                     std::vector<double>(target_labels.size(), 0.0));
  auto mark = [&](std::size_t tok, const std::string& prefix,
                  const std::vector<std::string>& targets) {
    for (const std::string& lbl : targets) {
      auto bio = label_index.find(prefix + lbl);
      if (bio != label_index.end()) z[tok][bio->second] = 1.0;
      auto bare = label_index.find(lbl);
      if (bare != label_index.end()) z[tok][bare->second] = 1.0;
    }
  };
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const CompiledRule& rule = rs.rules[r];
    if (rule.spec.scope != RuleScope::slot) continue;
    if (rule.spec.polarity != Polarity::positive) continue;
    for (const RuleMatch& m : cache.get(r)) {
      if (rule.spec.group_tags.empty()) {
        // Input/output-level rule without groups: the whole match stands in.
        std::vector<std::string> targets = rule.spec.target_labels;
        if (targets.empty()) targets.push_back(rule.spec.retag);
        std::vector<std::size_t> cov = covered_tokens(toks, m.whole);
        for (std::size_t j = 0; j < cov.size(); ++j)
          mark(cov[j], j == 0 ? "B-" : "I-", targets);
        continue;
      }
      for (const auto& gt : rule.spec.group_tags) {
        const auto& span = m.groups[gt.group];
        if (!span) continue;
        std::vector<std::string> targets = rule.spec.target_labels;
        if (targets.empty()) targets.push_back(gt.tag);
        std::vector<std::size_t> cov = covered_tokens(toks, *span);
        for (std::size_t j = 0; j < cov.size(); ++j)
          mark(cov[j], j == 0 ? "B-" : "I-", targets);
      }
    }
  }
  return z;
}

CompiledRuleSet derive_negatives(const CompiledRuleSet& rs,
                                 const std::vector<std::string>& label_set) {
  for (const auto& rule : rs.rules)
    if (rule.spec.polarity != Polarity::positive)
      throw Error("derive_negatives: rule set already contains negative rules");
  CompiledRuleSet out = rs;
  std::size_t n_orig = rs.rules.size();
  for (const std::string& label : label_set) {
    for (std::size_t r = 0; r < n_orig; ++r) {
      const CompiledRule& rule = rs.rules[r];
      if (rule.spec.retag == label) continue;
      CompiledRule neg = rule;
      neg.spec.id = rule.spec.id + "~neg:" + label;
      neg.spec.retag = label;
      neg.spec.polarity = Polarity::negative;
      neg.spec.target_labels = {label};
      neg.source_index = r;
      out.rules.push_back(std::move(neg));
    }
  }
  return out;
}

std::vector<RuleStats> rule_stats(const CompiledRuleSet& rs) {
  std::vector<RuleStats> stats;
  stats.reserve(rs.rules.size());
  for (const auto& rule : rs.rules) stats.push_back(rule.stats);
  return stats;
}

}  // namespace renn
