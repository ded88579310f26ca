#include "renn/metrics.hpp"

#include <algorithm>
#include <set>

namespace renn {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

struct Span {
  std::string label;
  std::size_t begin = 0, end = 0;
  auto operator<=>(const Span&) const = default;
};

// conll-style decoding: an I-x without a live x span opens a new span.
std::vector<Span> decode_spans(const std::vector<std::string>& tags) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t.size() <= 2 || t[1] != '-') continue;
    std::string type = t.substr(2);
    bool cont = t[0] == 'I' && !spans.empty() && spans.back().label == type &&
                spans.back().end == i;
    if (cont)
      spans.back().end = i + 1;
    else
      spans.push_back({type, i, i + 1});
  }
  return spans;
}

EvalReport prf_from_counts(const std::map<std::string, LabelPRF>& per_label) {
  EvalReport rep;
  rep.per_label = per_label;
  std::size_t tp = 0, fp = 0, fn = 0;
  double psum = 0, rsum = 0;
  for (auto& [label, c] : rep.per_label) {
    LabelPRF& x = rep.per_label[label];
    x.precision = safe_div(static_cast<double>(x.tp), static_cast<double>(x.tp + x.fp));
    x.recall = safe_div(static_cast<double>(x.tp), static_cast<double>(x.tp + x.fn));
    x.f1 = harmonic(x.precision, x.recall);
    psum += x.precision;
    rsum += x.recall;
    tp += x.tp;
    fp += x.fp;
    fn += x.fn;
  }
  std::size_t n = rep.per_label.size();
  if (n > 0) {
    rep.macro_precision = psum / static_cast<double>(n);
    rep.macro_recall = rsum / static_cast<double>(n);
    rep.macro_f1 = harmonic(rep.macro_precision, rep.macro_recall);
  }
  rep.micro_precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
  rep.micro_recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
  rep.micro_f1 = harmonic(rep.micro_precision, rep.micro_recall);
  return rep;
}

}  // namespace

double accuracy(const std::vector<std::string>& pred,
                const std::vector<std::string>& gold) {
  if (pred.size() != gold.size()) throw Error("accuracy: length mismatch");
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == gold[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

EvalReport macro_f1(const std::vector<std::string>& pred,
                    const std::vector<std::string>& gold,
                    const std::vector<std::string>& label_set) {
  if (pred.size() != gold.size()) throw Error("macro_f1: length mismatch");
  if (label_set.empty()) throw Error("macro_f1: empty label set");
  std::map<std::string, LabelPRF> counts;
  for (const auto& l : label_set) counts[l];
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i]) {
      auto it = counts.find(gold[i]);
      if (it != counts.end()) ++it->second.tp;
    } else {
      auto ip = counts.find(pred[i]);
      if (ip != counts.end()) ++ip->second.fp;
      auto ig = counts.find(gold[i]);
      if (ig != counts.end()) ++ig->second.fn;
    }
  }
  EvalReport rep = prf_from_counts(counts);
  rep.accuracy = accuracy(pred, gold);
  return rep;
}

EvalReport micro_f1(const std::vector<std::string>& pred,
                    const std::vector<std::string>& gold,
                    const std::vector<std::string>& positive_labels) {
  if (pred.size() != gold.size()) throw Error("micro_f1: length mismatch");
  std::set<std::string> pos(positive_labels.begin(), positive_labels.end());
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool p_pos = pos.count(pred[i]) > 0;
    bool g_pos = pos.count(gold[i]) > 0;
    if (p_pos && pred[i] == gold[i]) {
      ++tp;
    } else {
      if (p_pos) ++fp;
      if (g_pos) ++fn;
    }
  }
  EvalReport rep;
  rep.micro_precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
  rep.micro_recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
  rep.micro_f1 = harmonic(rep.micro_precision, rep.micro_recall);
  rep.accuracy = accuracy(pred, gold);
  return rep;
}

EvalReport evaluate_slot_sequences(const std::vector<std::vector<std::string>>& pred,
                                   const std::vector<std::vector<std::string>>& gold,
                                   const std::vector<std::string>& label_set,
                                   bool span_level) {
  if (pred.size() != gold.size()) throw Error("evaluate_slot_sequences: size mismatch");
  std::vector<std::string> positives;
  for (const auto& l : label_set)
    if (l != "O") positives.push_back(l);

  if (!span_level) {
    std::vector<std::string> flat_pred, flat_gold;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i].size() != gold[i].size())
        throw Error("evaluate_slot_sequences: sentence length mismatch");
      flat_pred.insert(flat_pred.end(), pred[i].begin(), pred[i].end());
      flat_gold.insert(flat_gold.end(), gold[i].begin(), gold[i].end());
    }
    EvalReport macro = macro_f1(flat_pred, flat_gold, positives);
    EvalReport micro = micro_f1(flat_pred, flat_gold, positives);
    macro.micro_precision = micro.micro_precision;
    macro.micro_recall = micro.micro_recall;
    macro.micro_f1 = micro.micro_f1;
    return macro;
  }

  // Span level: exact (label, begin, end) matches, labels without BIO prefix.
  std::set<std::string> types;
  for (const auto& l : positives)
    if (l.size() > 2 && l[1] == '-') types.insert(l.substr(2));
  std::map<std::string, LabelPRF> counts;
  for (const auto& t : types) counts[t];
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto ps = decode_spans(pred[i]);
    auto gs = decode_spans(gold[i]);
    std::set<Span> gold_set(gs.begin(), gs.end());
    for (const auto& sp : ps) {
      if (gold_set.count(sp))
        ++counts[sp.label].tp;
      else
        ++counts[sp.label].fp;
    }
    std::set<Span> pred_set(ps.begin(), ps.end());
    for (const auto& sp : gs)
      if (!pred_set.count(sp)) ++counts[sp.label].fn;
  }
  return prf_from_counts(counts);
}

std::string reo_intent_prediction(const CompiledRuleSet& rs,
                                  const std::vector<std::string>& tokens) {
  std::string text = join_tokens(tokens);
  std::string best;
  std::size_t best_groups = 0;
  for (const auto& rule : rs.rules) {
    if (rule.spec.scope != RuleScope::intent) continue;
    if (rule.spec.polarity != Polarity::positive) continue;
    if (find_matches(rule, text).empty()) continue;
    bool better = best.empty() || rule.group_count > best_groups ||
                  (rule.group_count == best_groups && rule.spec.retag < best);
    if (better) {
      best = rule.spec.retag;
      best_groups = rule.group_count;
    }
  }
  return best.empty() ? kAbstain : best;
}

std::vector<std::string> reo_slot_prediction(const CompiledRuleSet& rs,
                                             const std::vector<std::string>& tokens) {
  auto tags = annotate_slots(rs, tokens);
  std::vector<std::string> pred(tokens.size(), "O");
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::string best;
    std::size_t best_groups = 0;
    for (const auto& st : tags[i]) {
      std::size_t groups = rs.rules[st.rule].group_count;
      bool better = best.empty() || groups > best_groups ||
                    (groups == best_groups && st.tag < best);
      if (better) {
        best = st.tag;
        best_groups = groups;
      }
    }
    if (!best.empty()) pred[i] = best;
  }
  return pred;
}

EvalReport evaluate_reo(const CompiledRuleSet& rs, const Dataset& gold, ReoTask task,
                        bool span_level) {
  if (task == ReoTask::intent) {
    std::vector<std::string> pred, truth;
    for (const auto& s : gold.sentences) {
      pred.push_back(reo_intent_prediction(rs, s.tokens));
      truth.push_back(s.intent);
    }
    return macro_f1(pred, truth, gold.intent_labels);
  }
  std::vector<std::vector<std::string>> pred, truth;
  for (const auto& s : gold.sentences) {
    pred.push_back(reo_slot_prediction(rs, s.tokens));
    truth.push_back(s.slots);
  }
  return evaluate_slot_sequences(pred, truth, gold.slot_labels, span_level);
}

}  // namespace renn
