#include "renn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "renn/neural.hpp"

namespace renn {

namespace {

using nlohmann::json;

std::vector<std::string> union_sorted(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
  std::set<std::string> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

std::string two_dec(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << x * 100.0;
  return os.str();
}

json eval_to_json(const EvalReport& e) {
  json pl = json::object();
  for (const auto& [label, c] : e.per_label)
    pl[label] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
  return {{"accuracy", e.accuracy},
          {"macro_precision", e.macro_precision},
          {"macro_recall", e.macro_recall},
          {"macro_f1", e.macro_f1},
          {"micro_precision", e.micro_precision},
          {"micro_recall", e.micro_recall},
          {"micro_f1", e.micro_f1},
          {"per_label", pl}};
}

EvalReport eval_from_json(const json& j) {
  EvalReport e;
  e.accuracy = j.value("accuracy", 0.0);
  e.macro_precision = j.value("macro_precision", 0.0);
  e.macro_recall = j.value("macro_recall", 0.0);
  e.macro_f1 = j.value("macro_f1", 0.0);
  e.micro_precision = j.value("micro_precision", 0.0);
  e.micro_recall = j.value("micro_recall", 0.0);
  e.micro_f1 = j.value("micro_f1", 0.0);
  return e;
}

json config_to_json_obj(const ExperimentConfig& c) {
  return {{"task", task_name(c.task)},
          {"variant", variant_name(c.variant)},
          {"split",
           {{"kind", c.split.kind == SplitSpec::Kind::full
                         ? "full"
                         : c.split.kind == SplitSpec::Kind::few_shot ? "few_shot"
                                                                     : "partial"},
            {"k", c.split.k}}},
          {"seed", c.seed},
          {"rule_file", c.rule_file},
          {"macro_file", c.macro_file},
          {"train_path", c.train_path},
          {"test_path", c.test_path},
          {"embedding_path", c.embedding_path},
          {"allow_ungrouped_slot_rules", c.allow_ungrouped_slot_rules},
          {"hyper",
           {{"batch", c.hyper.batch},
            {"dropout", c.hyper.dropout},
            {"hidden", c.hyper.hidden},
            {"lr", c.hyper.lr},
            {"beta_p", c.hyper.beta_p},
            {"beta_n", c.hyper.beta_n},
            {"tag_dim", c.hyper.tag_dim},
            {"epochs", c.hyper.epochs},
            {"clip", c.hyper.clip},
            {"emb_dim", c.hyper.emb_dim}}}};
}

ExperimentConfig config_from_json_obj(const json& j) {
  ExperimentConfig c;
  c.task = parse_task(j.at("task").get<std::string>());
  c.variant = parse_variant(j.at("variant").get<std::string>());
  bool beta_given = false, epochs_given = false;
  if (j.contains("split")) {
    const auto& s = j.at("split");
    std::string kind = s.value("kind", "full");
    if (kind == "full")
      c.split.kind = SplitSpec::Kind::full;
    else if (kind == "few_shot")
      c.split.kind = SplitSpec::Kind::few_shot;
    else if (kind == "partial")
      c.split.kind = SplitSpec::Kind::partial;
    else
      throw Error("config: unknown split kind '" + kind + "'");
    c.split.k = s.value("k", std::size_t{0});
  }
  c.seed = j.value("seed", std::uint64_t{1});
  c.rule_file = j.value("rule_file", std::string{});
  c.macro_file = j.value("macro_file", std::string{});
  c.train_path = j.at("train_path").get<std::string>();
  c.test_path = j.at("test_path").get<std::string>();
  c.embedding_path = j.value("embedding_path", std::string{});
  c.allow_ungrouped_slot_rules = j.value("allow_ungrouped_slot_rules", false);
  if (j.contains("hyper")) {
    const auto& h = j.at("hyper");
    c.hyper.batch = h.value("batch", c.hyper.batch);
    c.hyper.dropout = h.value("dropout", c.hyper.dropout);
    c.hyper.hidden = h.value("hidden", c.hyper.hidden);
    c.hyper.lr = h.value("lr", c.hyper.lr);
    beta_given = h.contains("beta_p") || h.contains("beta_n");
    c.hyper.beta_p = h.value("beta_p", c.hyper.beta_p);
    c.hyper.beta_n = h.value("beta_n", c.hyper.beta_n);
    c.hyper.tag_dim = h.value("tag_dim", c.hyper.tag_dim);
    epochs_given = h.contains("epochs");
    c.hyper.epochs = h.value("epochs", c.hyper.epochs);
    c.hyper.clip = h.value("clip", c.hyper.clip);
    c.hyper.emb_dim = h.value("emb_dim", c.hyper.emb_dim);
  }
  c.resolve_defaults(beta_given, epochs_given);
  return c;
}

}  // namespace

std::string SplitSpec::name() const {
  switch (kind) {
    case Kind::full: return "full";
    case Kind::few_shot: return std::to_string(k) + "-shot";
    case Kind::partial: return "partial-" + std::to_string(k);
  }
  return "?";
}

void ExperimentConfig::resolve_defaults(bool beta_given, bool epochs_given) {
  if (!beta_given) {
    double beta = split.kind == SplitSpec::Kind::few_shot ? 16.0 : 1.0;
    hyper.beta_p = beta;
    hyper.beta_n = beta;
  }
  if (!epochs_given || hyper.epochs == 0)
    hyper.epochs = split.kind == SplitSpec::Kind::few_shot ? 100 : 30;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error("config parse error in " + path + ": " + e.what());
  }
  return config_from_json_obj(j);
}

std::string ExperimentConfig::to_json() const { return config_to_json_obj(*this).dump(); }

std::string ExperimentConfig::hash() const {
  std::uint64_t h = fnv1a64(to_json());
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::string RunReport::to_json() const {
  json j;
  j["config"] = config_to_json_obj(config);
  j["config_hash"] = config_hash;
  j["eval"] = eval_to_json(eval);
  j["loss_curve"] = loss_curve;
  j["val_curve"] = val_curve;
  j["best_epoch"] = best_epoch;
  j["wall_seconds"] = wall_seconds;
  j["checkpoint_path"] = checkpoint_path;
  return j.dump(2);
}

void RunReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report: " + path);
  out << to_json() << "\n";
}

RunReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report: " + path);
  json j;
  in >> j;
  RunReport r;
  r.config = config_from_json_obj(j.at("config"));
  r.config_hash = j.value("config_hash", "");
  r.eval = eval_from_json(j.at("eval"));
  r.loss_curve = j.value("loss_curve", std::vector<double>{});
  r.val_curve = j.value("val_curve", std::vector<double>{});
  r.best_epoch = j.value("best_epoch", std::size_t{0});
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.checkpoint_path = j.value("checkpoint_path", "");
  return r;
}

std::vector<std::string> rule_tag_vocab(const CompiledRuleSet& rules, Task task) {
  std::set<std::string> tags;
  for (const auto& r : rules.rules) {
    if (r.spec.polarity != Polarity::positive) continue;
    if (task == Task::intent && r.spec.scope == RuleScope::intent)
      tags.insert(r.spec.retag);
    if (task == Task::slot && r.spec.scope == RuleScope::slot) {
      for (const auto& gt : r.spec.group_tags) {
        tags.insert("B-" + gt.tag);
        tags.insert("I-" + gt.tag);
      }
    }
  }
  return {tags.begin(), tags.end()};
}

AnnotatedSentence annotate_for_model(
    const Sentence& s, Task task, const CompiledRuleSet& rules,
    const CompiledRuleSet& rules_with_negatives,
    const std::unordered_map<std::string, std::size_t>& vocab,
    const std::vector<std::string>& intent_labels,
    const std::vector<std::string>& slot_labels,
    const std::unordered_map<std::string, std::size_t>& tag_index) {
  AnnotatedSentence a;
  for (const auto& tok : s.tokens) {
    auto it = vocab.find(tok);
    if (it == vocab.end()) throw Error("annotate_for_model: token not in vocab: " + tok);
    a.word_ids.push_back(it->second);
  }
  auto find_label = [](const std::vector<std::string>& labels, const std::string& l) {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) throw Error("annotate_for_model: unknown label " + l);
    return static_cast<std::size_t>(it - labels.begin());
  };
  if (!s.intent.empty()) a.gold_intent = find_label(intent_labels, s.intent);
  for (const auto& t : s.slots) a.gold_slots.push_back(find_label(slot_labels, t));

  if (task == Task::intent) {
    std::set<std::size_t> ids;
    for (const auto& [tag, pol] : annotate_intent(rules, s.tokens)) {
      if (pol != Polarity::positive) continue;
      auto it = tag_index.find(tag);
      if (it != tag_index.end()) ids.insert(it->second);
    }
    a.intent_tag_ids.assign(ids.begin(), ids.end());
    a.z_intent = label_indicators(rules, s.tokens, intent_labels);
    a.t_pos = clue_mask(rules_with_negatives, s.tokens, intent_labels, Polarity::positive);
    a.t_neg = clue_mask(rules_with_negatives, s.tokens, intent_labels, Polarity::negative);
  } else {
    a.slot_tag_ids.resize(s.tokens.size());
    auto tags = annotate_slots(rules, s.tokens);
    for (std::size_t i = 0; i < tags.size(); ++i) {
      for (const auto& st : tags[i]) {
        auto it = tag_index.find(st.tag);
        if (it != tag_index.end()) a.slot_tag_ids[i].push_back(it->second);
      }
      std::sort(a.slot_tag_ids[i].begin(), a.slot_tag_ids[i].end());
    }
    a.z_slot = label_indicators_tokens(rules, s.tokens, slot_labels);
    a.t_pos = slot_clue_mask(rules, s.tokens, Polarity::positive);
    a.t_neg = slot_clue_mask(rules, s.tokens, Polarity::negative);
  }
  return a;
}

namespace {

EvalReport evaluate_model(Model& model, const std::vector<AnnotatedSentence>& anns,
                          const std::vector<Sentence>& gold, Task task,
                          const std::vector<std::string>& intent_labels,
                          const std::vector<std::string>& slot_labels) {
  if (task == Task::intent) {
    std::vector<std::string> pred, truth;
    for (std::size_t i = 0; i < anns.size(); ++i) {
      pred.push_back(intent_labels[model.predict(anns[i])[0]]);
      truth.push_back(gold[i].intent);
    }
    return macro_f1(pred, truth, intent_labels);
  }
  std::vector<std::vector<std::string>> pred, truth;
  for (std::size_t i = 0; i < anns.size(); ++i) {
    std::vector<std::string> tags;
    for (std::size_t id : model.predict(anns[i])) tags.push_back(slot_labels[id]);
    pred.push_back(std::move(tags));
    truth.push_back(gold[i].slots);
  }
  return evaluate_slot_sequences(pred, truth, slot_labels, false);
}

double heldout_metric(Model& model, const std::vector<AnnotatedSentence>& anns,
                      const std::vector<Sentence>& gold, Task task,
                      const std::vector<std::string>& intent_labels,
                      const std::vector<std::string>& slot_labels) {
  EvalReport e = evaluate_model(model, anns, gold, task, intent_labels, slot_labels);
  return task == Task::intent ? e.accuracy : e.micro_f1;
}

std::vector<std::vector<double>> snapshot_params(ParamMap& params) {
  std::vector<std::vector<double>> snap;
  for (const auto& [name, t] : params.items()) snap.push_back(t->v);
  return snap;
}

void restore_params(ParamMap& params, const std::vector<std::vector<double>>& snap) {
  const auto& items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) items[i].second->v = snap[i];
}

}  // namespace

namespace {

// Everything a run needs before any training step.
struct Prepared {
  Dataset train_full, test;
  std::vector<Sentence> train_sents;
  std::vector<std::string> intent_labels, slot_labels, tag_vocab;
  CompiledRuleSet rules, rules_neg;
  EmbeddingTable emb;
  std::vector<AnnotatedSentence> train_ann, test_ann;
  std::unique_ptr<Model> model;
};

Prepared prepare_experiment(const ExperimentConfig& config) {
  Prepared p;
  p.train_full = load_dataset(config.train_path);
  p.test = load_dataset(config.test_path);
  p.intent_labels = union_sorted(p.train_full.intent_labels, p.test.intent_labels);
  p.slot_labels = union_sorted(p.train_full.slot_labels, p.test.slot_labels);

  switch (config.split.kind) {
    case SplitSpec::Kind::full:
      p.train_sents = p.train_full.sentences;
      break;
    case SplitSpec::Kind::few_shot: {
      Split sp = config.task == Task::intent
                     ? few_shot_split_intent(p.train_full, config.split.k, config.seed)
                     : few_shot_split_slot(p.train_full, config.split.k, config.seed);
      p.train_sents = sp.data.sentences;
      break;
    }
    case SplitSpec::Kind::partial: {
      if (config.task != Task::intent)
        throw Error("partial few-shot applies to intent only");
      Split sp = partial_few_shot_intent(p.train_full, config.split.k, config.seed);
      p.train_sents = sp.data.sentences;
      break;
    }
  }
  if (p.train_sents.empty()) throw Error("run_experiment: empty training split");

  CompileOptions copts;
  copts.allow_ungrouped_slot_rules = config.allow_ungrouped_slot_rules;
  p.rules = compile_ruleset(config.rule_file, config.macro_file, copts);
  bool two_family = config.variant == Variant::two || config.variant == Variant::two_posi ||
                    config.variant == Variant::two_neg ||
                    config.variant == Variant::two_both || config.variant == Variant::mixed;
  p.rules_neg = (two_family && config.task == Task::intent)
                    ? derive_negatives(p.rules, p.intent_labels)
                    : p.rules;

  std::set<std::string> vocab_set;
  for (const auto& s : p.train_full.sentences)
    vocab_set.insert(s.tokens.begin(), s.tokens.end());
  for (const auto& s : p.test.sentences)
    vocab_set.insert(s.tokens.begin(), s.tokens.end());
  std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
  p.emb = load_embeddings(config.embedding_path, vocab, config.seed);

  p.tag_vocab = rule_tag_vocab(p.rules, config.task);
  std::unordered_map<std::string, std::size_t> tag_index;
  for (std::size_t i = 0; i < p.tag_vocab.size(); ++i) tag_index.emplace(p.tag_vocab[i], i);

  auto annotate_all = [&](const std::vector<Sentence>& ss) {
    std::vector<AnnotatedSentence> out;
    out.reserve(ss.size());
    for (const auto& s : ss)
      out.push_back(annotate_for_model(s, config.task, p.rules, p.rules_neg, p.emb.index,
                                       p.intent_labels, p.slot_labels, tag_index));
    return out;
  };
  p.train_ann = annotate_all(p.train_sents);
  p.test_ann = annotate_all(p.test.sentences);

  ModelDims dims;
  dims.vocab = p.emb.words.size();
  dims.emb_dim = p.emb.dim;
  dims.hidden = config.hyper.hidden;
  dims.tag_dim = config.hyper.tag_dim;
  dims.n_labels =
      config.task == Task::intent ? p.intent_labels.size() : p.slot_labels.size();
  dims.n_tags = p.tag_vocab.size() + 1;  // + NONE
  dims.dropout = config.hyper.dropout;
  dims.beta_p = config.hyper.beta_p;
  dims.beta_n = config.hyper.beta_n;
  p.model = build_model(config.variant, config.task, dims, config.seed, &p.emb.matrix);
  return p;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  Prepared p = prepare_experiment(config);
  Model& model_ref = *p.model;
  std::vector<AnnotatedSentence>& train_ann = p.train_ann;
  const std::vector<std::string>& intent_labels = p.intent_labels;
  const std::vector<std::string>& slot_labels = p.slot_labels;

  // Held-out slice for best-epoch selection outside few-shot runs.
  std::vector<std::size_t> order(train_ann.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::size_t> val_idx;
  bool use_heldout =
      config.split.kind != SplitSpec::Kind::few_shot && train_ann.size() >= 10;
  if (use_heldout) {
    std::mt19937_64 split_rng(config.seed ^ 0xa5a5a5a5a5a5a5a5ull);
    shuffle_vec(order, split_rng);
    std::size_t n_val = std::max<std::size_t>(1, order.size() / 10);
    val_idx.assign(order.end() - static_cast<long>(n_val), order.end());
    order.resize(order.size() - n_val);
  }
  std::vector<AnnotatedSentence> val_ann;
  std::vector<Sentence> val_sents;
  for (std::size_t i : val_idx) {
    val_ann.push_back(train_ann[i]);
    val_sents.push_back(p.train_sents[i]);
  }

  AdamConfig acfg;
  acfg.lr = config.hyper.lr;
  Adam adam(model_ref.params(), acfg);
  std::mt19937_64 rng(config.seed);

  RunReport report;
  report.config = config;
  report.config_hash = config.hash();

  double best_val = -1.0;
  std::vector<std::vector<double>> best_snapshot;
  for (std::size_t epoch = 1; epoch <= config.hyper.epochs; ++epoch) {
    shuffle_vec(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.hyper.batch) {
      std::size_t end = std::min(order.size(), start + config.hyper.batch);
      for (std::size_t b = start; b < end; ++b) {
        Graph g(true, &rng);
        Var loss = model_ref.loss(g, train_ann[order[b]]);
        g.backward(loss);
        epoch_loss += g.value0(loss);
      }
      adam.scale_grads(1.0 / static_cast<double>(end - start));
      adam.clip_global_norm(config.hyper.clip);
      adam.step();
    }
    report.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
    if (use_heldout) {
      double metric = heldout_metric(model_ref, val_ann, val_sents, config.task,
                                     intent_labels, slot_labels);
      report.val_curve.push_back(metric);
      if (metric > best_val) {
        best_val = metric;
        best_snapshot = snapshot_params(model_ref.params());
        report.best_epoch = epoch;
      }
    }
  }
  if (use_heldout && !best_snapshot.empty())
    restore_params(model_ref.params(), best_snapshot);

  report.eval = evaluate_model(model_ref, p.test_ann, p.test.sentences, config.task,
                               intent_labels, slot_labels);

  std::filesystem::path dir = std::filesystem::path(out_dir) / report.config_hash;
  std::filesystem::create_directories(dir);
  report.checkpoint_path = (dir / "model.json").string();
  model_ref.params().save(report.checkpoint_path);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.save((dir / "report.json").string());
  return report;
}

EvalReport evaluate_checkpoint(const ExperimentConfig& config,
                               const std::string& checkpoint_path) {
  Prepared p = prepare_experiment(config);
  p.model->params().load(checkpoint_path);
  return evaluate_model(*p.model, p.test_ann, p.test.sentences, config.task,
                        p.intent_labels, p.slot_labels);
}

std::string emit_table(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw Error("emit_table: no reports");
  Task task = reports[0].config.task;
  for (const auto& r : reports)
    if (r.config.task != task) throw Error("emit_table: mixed tasks");

  std::vector<std::string> row_keys, col_keys;
  std::map<std::pair<std::string, std::string>, std::string> cells;
  auto display = [](Variant v) {
    switch (v) {
      case Variant::base: return std::string("BLSTM");
      case Variant::feat: return std::string("+feat");
      case Variant::logit: return std::string("+logit");
      case Variant::two: return std::string("+two");
      case Variant::two_posi: return std::string("+two+posi");
      case Variant::two_neg: return std::string("+two+neg");
      case Variant::two_both: return std::string("+two+both");
      case Variant::mixed: return std::string("+mixed");
    }
    return std::string("?");
  };
  for (const auto& r : reports) {
    std::string row = display(r.config.variant);
    std::string col = r.config.split.name();
    if (std::find(row_keys.begin(), row_keys.end(), row) == row_keys.end())
      row_keys.push_back(row);
    if (std::find(col_keys.begin(), col_keys.end(), col) == col_keys.end())
      col_keys.push_back(col);
    double second = task == Task::intent ? r.eval.accuracy : r.eval.micro_f1;
    cells[{row, col}] = two_dec(r.eval.macro_f1) + " / " + two_dec(second);
  }

  std::size_t w0 = std::string("Model").size();
  for (const auto& r : row_keys) w0 = std::max(w0, r.size());
  std::vector<std::size_t> widths;
  for (const auto& c : col_keys) {
    std::size_t w = c.size();
    for (const auto& r : row_keys) {
      auto it = cells.find({r, c});
      w = std::max(w, it == cells.end() ? 1 : it->second.size());
    }
    widths.push_back(w);
  }
  std::ostringstream os;
  auto pad = [&](const std::string& s, std::size_t w) {
    os << s << std::string(w - s.size(), ' ');
  };
  os << "# " << (task == Task::intent ? "intent: macro-F1 / accuracy"
                                      : "slot: macro-F1 / micro-F1")
     << "\n";
  pad("Model", w0);
  for (std::size_t c = 0; c < col_keys.size(); ++c) {
    os << " | ";
    pad(col_keys[c], widths[c]);
  }
  os << "\n";
  for (const auto& r : row_keys) {
    pad(r, w0);
    for (std::size_t c = 0; c < col_keys.size(); ++c) {
      os << " | ";
      auto it = cells.find({r, col_keys[c]});
      pad(it == cells.end() ? "-" : it->second, widths[c]);
    }
    os << "\n";
  }
  return os.str();
}

std::vector<GradCheckResult> run_grad_check_suite(std::size_t max_coords_per_tensor) {
  ModelDims dims;
  dims.vocab = 6;
  dims.emb_dim = 7;
  dims.hidden = 5;
  dims.tag_dim = 4;
  dims.n_labels = 3;
  dims.n_tags = 3;
  dims.dropout = 0.5;
  dims.beta_p = 1.0;
  dims.beta_n = 1.0;

  AnnotatedSentence s;
  s.word_ids = {1, 2, 3, 4};
  s.gold_intent = 1;
  s.gold_slots = {0, 1, 2, 0};
  s.intent_tag_ids = {0};
  s.slot_tag_ids = {{0}, {}, {1, 0}, {1}};
  s.z_intent = {1, 0, 0};
  s.z_slot = {{1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  s.t_pos = {{0.5, 0.5, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0}};
  s.t_neg = {{0, 0, 0, 0}, {0, 0, 0.5, 0.5}, {1, 0, 0, 0}};
  AnnotatedSentence s_slot = s;
  s_slot.t_pos = {{0.5, 0.5, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0.5, 0.5, 0}};
  s_slot.t_neg = {{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}};

  std::vector<Variant> variants = {Variant::base,    Variant::feat,
                                   Variant::logit,   Variant::two,
                                   Variant::two_posi, Variant::two_neg,
                                   Variant::two_both, Variant::mixed};
  std::vector<GradCheckResult> results;
  for (Task task : {Task::intent, Task::slot}) {
    const AnnotatedSentence& inst = task == Task::intent ? s : s_slot;
    for (Variant v : variants) {
      auto model = build_model(v, task, dims, 7, nullptr);
      auto loss_fn = [&](bool with_grad) {
        std::mt19937_64 rng(99);  // fixed dropout masks on every call
        Graph g(true, &rng);
        Var loss = model->loss(g, inst);
        if (with_grad) g.backward(loss);
        return g.value0(loss);
      };
      double err = grad_check(loss_fn, model->params(), 1e-5, max_coords_per_tensor,
                              /*sample_seed=*/13);
      results.push_back({task, v, err});
    }
  }
  return results;
}

}  // namespace renn
