#include "renn/models.hpp"

#include <algorithm>
#include <cmath>

namespace renn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

std::vector<double> zero_row(std::size_t n) { return std::vector<double>(n, 0.0); }

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(
      std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Task parse_task(const std::string& s) {
  if (s == "intent") return Task::intent;
  if (s == "slot") return Task::slot;
  throw Error("unknown task '" + s + "' (expected intent|slot)");
}

Variant parse_variant(const std::string& s) {
  if (s == "base") return Variant::base;
  if (s == "feat") return Variant::feat;
  if (s == "logit") return Variant::logit;
  if (s == "two") return Variant::two;
  if (s == "two_posi") return Variant::two_posi;
  if (s == "two_neg") return Variant::two_neg;
  if (s == "two_both") return Variant::two_both;
  if (s == "mixed") return Variant::mixed;
  throw Error("unknown variant '" + s + "'");
}

std::string task_name(Task t) { return t == Task::intent ? "intent" : "slot"; }

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::base: return "base";
    case Variant::feat: return "feat";
    case Variant::logit: return "logit";
    case Variant::two: return "two";
    case Variant::two_posi: return "two_posi";
    case Variant::two_neg: return "two_neg";
    case Variant::two_both: return "two_both";
    case Variant::mixed: return "mixed";
  }
  throw Error("bad variant enum");
}

std::pair<Var, Var> attention_pool(Graph& g, const std::vector<Var>& h, Var w, Var c) {
  Var wc = g.matvec(w, c);
  std::vector<Var> scores;
  scores.reserve(h.size());
  for (Var hi : h) scores.push_back(g.dot(hi, wc));
  Var alpha = g.softmax(g.stack(scores));
  Var pooled = g.weighted_sum(h, alpha);
  return {alpha, pooled};
}

double attention_loss(const std::vector<std::vector<double>>& alpha,
                      const std::vector<std::vector<double>>& t) {
  require(alpha.size() == t.size(), "attention_loss: row count mismatch");
  double loss = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    require(alpha[k].size() == t[k].size(), "attention_loss: row length mismatch");
    double sum = 0.0;
    for (double x : t[k]) sum += x;
    require(sum < 1e-12 || std::abs(sum - 1.0) <= 1e-6,
            "attention_loss: target row must be all-zero or sum to 1");
    for (std::size_t i = 0; i < t[k].size(); ++i) {
      if (t[k][i] > 0.0)
        loss -= t[k][i] * std::log(std::max(alpha[k][i], 1e-12));
    }
  }
  return loss;
}

double total_loss(double loss_c, double loss_att_p, double loss_att_n,
                  double beta_p, double beta_n) {
  require(beta_p >= 0.0 && beta_n >= 0.0, "total_loss: weights must be >= 0");
  require(std::isfinite(loss_c) && std::isfinite(loss_att_p) && std::isfinite(loss_att_n),
          "total_loss: non-finite component");
  return loss_c + beta_p * loss_att_p + beta_n * loss_att_n;
}

std::vector<double> fuse_logits(const std::vector<double>& logits,
                                const std::vector<double>& z,
                                const std::vector<double>& w) {
  require(logits.size() == z.size() && logits.size() == w.size(),
          "fuse_logits: size mismatch");
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    require(z[k] == 0.0 || z[k] == 1.0, "fuse_logits: indicators must be 0/1");
    out[k] = logits[k] + w[k] * z[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intent model

struct IntentModel::Build {
  Var logits;
  std::vector<Var> alpha_pos, alpha_neg;
  Var loss_c, loss_att_p, loss_att_n, total;
};

IntentModel::IntentModel(Variant variant, ModelDims dims, std::uint64_t seed,
                         const Tensor* pretrained_emb) {
  task_ = Task::intent;
  variant_ = variant;
  dims_ = dims;
  use_feat_ = variant == Variant::feat || variant == Variant::mixed;
  use_logit_ = variant == Variant::logit || variant == Variant::mixed;
  two_side_ = variant == Variant::two || variant == Variant::two_posi ||
              variant == Variant::two_neg || variant == Variant::two_both ||
              variant == Variant::mixed;
  if (variant == Variant::two) dims_.beta_p = dims_.beta_n = 0.0;
  if (variant == Variant::two_posi) dims_.beta_n = 0.0;
  if (variant == Variant::two_neg) dims_.beta_p = 0.0;
  require(dims_.vocab > 0 && dims_.n_labels > 0 && dims_.hidden > 0,
          "IntentModel: bad dimensions");

  std::mt19937_64 rng(seed);
  std::size_t h2 = 2 * dims_.hidden;
  std::size_t cls_in = h2 + (use_feat_ ? dims_.tag_dim : 0);
  std::size_t k = dims_.n_labels;

  emb_ = &params_.create("emb", {dims_.vocab, dims_.emb_dim});
  if (pretrained_emb) {
    require(pretrained_emb->shape == emb_->shape,
            "IntentModel: pretrained embedding shape mismatch");
    emb_->v = pretrained_emb->v;
  } else {
    uniform_init(*emb_, rng, -0.25, 0.25);
  }
  if (use_feat_) {
    require(dims_.n_tags >= 1, "IntentModel: tag table needs the NONE row");
    tag_table_ = &params_.create("tags", {dims_.n_tags, dims_.tag_dim});
    glorot_init(*tag_table_, rng);
  }
  enc_.create(params_, "enc", dims_.emb_dim, dims_.hidden, rng);

  if (!two_side_) {
    w_att_ = &params_.create("att.W", {h2, h2});
    glorot_init(*w_att_, rng);
    c_att_ = &params_.create("att.c", {h2});
    uniform_init(*c_att_, rng, -0.1, 0.1);
    w_cls_ = &params_.create("cls.W", {k, cls_in});
    glorot_init(*w_cls_, rng);
    b_cls_ = &params_.create("cls.b", {k});
  } else {
    w_a_ = &params_.create("two.Wa", {h2, h2});
    glorot_init(*w_a_, rng);
    c_pos_ = &params_.create("two.c_pos", {k, h2});
    uniform_init(*c_pos_, rng, -0.1, 0.1);
    c_neg_ = &params_.create("two.c_neg", {k, h2});
    uniform_init(*c_neg_, rng, -0.1, 0.1);
    w_out_pos_ = &params_.create("two.w_pos", {k, cls_in});
    glorot_init(*w_out_pos_, rng);
    w_out_neg_ = &params_.create("two.w_neg", {k, cls_in});
    glorot_init(*w_out_neg_, rng);
    b_pos_ = &params_.create("two.b_pos", {k});
    b_neg_ = &params_.create("two.b_neg", {k});
  }
  if (use_logit_) {
    w_fuse_ = &params_.create("fuse.w", {k});
    constant_init(*w_fuse_, 1.0);
  }
}

IntentModel::Build IntentModel::build(Graph& g, const AnnotatedSentence& s,
                                      bool with_loss) {
  std::size_t n = s.word_ids.size();
  require(n >= 1, "IntentModel: empty sentence");
  for (std::size_t w : s.word_ids) require(w < dims_.vocab, "IntentModel: word id out of range");

  Var emb = g.param(*emb_);
  std::vector<Var> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = g.dropout(g.row(emb, s.word_ids[i]), dims_.dropout);
  std::vector<Var> h = encoder_forward(g, enc_, xs);
  for (Var& hi : h) hi = g.dropout(hi, dims_.dropout);

  Var agg;
  if (use_feat_) {
    std::vector<std::size_t> ids = s.intent_tag_ids;
    for (std::size_t t : ids) require(t < dims_.n_tags, "IntentModel: tag id out of range");
    if (ids.empty()) ids.push_back(dims_.n_tags - 1);  // NONE
    agg = g.rows_mean(g.param(*tag_table_), ids);
  }

  Build out;
  std::vector<Var> lsm_pos, lsm_neg;
  if (!two_side_) {
    auto [alpha, pooled] = attention_pool(g, h, g.param(*w_att_), g.param(*c_att_));
    out.alpha_pos.push_back(alpha);
    Var cls_in = use_feat_ ? g.concat(pooled, agg) : pooled;
    out.logits = g.add(g.matvec(g.param(*w_cls_), cls_in), g.param(*b_cls_));
  } else {
    Var wa = g.param(*w_a_);
    Var cpos = g.param(*c_pos_);
    Var cneg = g.param(*c_neg_);
    Var wpos = g.param(*w_out_pos_);
    Var wneg = g.param(*w_out_neg_);
    Var bpos = g.param(*b_pos_);
    Var bneg = g.param(*b_neg_);
    std::vector<Var> label_logits;
    for (std::size_t k = 0; k < dims_.n_labels; ++k) {
      auto side = [&](Var ctx_table, Var w_out, Var bias,
                      std::vector<Var>& alphas, std::vector<Var>& lsms) {
        Var wc = g.matvec(wa, g.row(ctx_table, k));
        std::vector<Var> scores;
        scores.reserve(n);
        for (Var hi : h) scores.push_back(g.dot(hi, wc));
        Var u = g.stack(scores);
        Var alpha = g.softmax(u);
        alphas.push_back(alpha);
        if (with_loss) lsms.push_back(g.log_softmax(u));
        Var pooled = g.weighted_sum(h, alpha);
        Var in_k = use_feat_ ? g.concat(pooled, agg) : pooled;
        return g.add(g.dot(g.row(w_out, k), in_k), g.pick(bias, k));
      };
      Var lp = side(cpos, wpos, bpos, out.alpha_pos, lsm_pos);
      Var ln = side(cneg, wneg, bneg, out.alpha_neg, lsm_neg);
      label_logits.push_back(g.sub(lp, ln));
    }
    out.logits = g.stack(label_logits);
  }

  if (use_logit_) {
    std::vector<double> z = s.z_intent.empty() ? zero_row(dims_.n_labels) : s.z_intent;
    require(z.size() == dims_.n_labels, "IntentModel: z_intent size mismatch");
    out.logits = g.add_weighted(out.logits, g.param(*w_fuse_), z);
  }

  if (with_loss) {
    require(s.gold_intent < dims_.n_labels, "IntentModel: gold label out of range");
    out.loss_c = g.pick_nll(out.logits, s.gold_intent);
    out.total = out.loss_c;
    if (two_side_) {
      auto att_sum = [&](const std::vector<Var>& lsms,
                         const std::vector<std::vector<double>>& t) {
        std::vector<Var> terms;
        for (std::size_t k = 0; k < lsms.size(); ++k) {
          std::vector<double> row = k < t.size() ? t[k] : zero_row(n);
          require(row.size() == n, "IntentModel: attention target length mismatch");
          terms.push_back(g.weighted_nll(lsms[k], row));
        }
        return g.sum(terms);
      };
      out.loss_att_p = att_sum(lsm_pos, s.t_pos);
      out.loss_att_n = att_sum(lsm_neg, s.t_neg);
      out.total = g.axpy(g.axpy(out.loss_c, dims_.beta_p, out.loss_att_p),
                         dims_.beta_n, out.loss_att_n);
    }
  }
  return out;
}

Var IntentModel::loss(Graph& g, const AnnotatedSentence& s) {
  return build(g, s, true).total;
}

std::vector<std::size_t> IntentModel::predict(const AnnotatedSentence& s) {
  Graph g(false, nullptr);
  Build b = build(g, s, false);
  return {argmax(g.value(b.logits))};
}

IntentTrace IntentModel::trace(const AnnotatedSentence& s, bool training,
                               std::mt19937_64* rng) {
  Graph g(training, rng);
  Build b = build(g, s, true);
  IntentTrace tr;
  tr.logits = g.value(b.logits);
  tr.probs = softmax_values(tr.logits);
  for (Var a : b.alpha_pos) tr.alpha_pos.push_back(g.value(a));
  for (Var a : b.alpha_neg) tr.alpha_neg.push_back(g.value(a));
  tr.loss_c = g.value0(b.loss_c);
  if (b.loss_att_p.ok()) tr.loss_att_p = g.value0(b.loss_att_p);
  if (b.loss_att_n.ok()) tr.loss_att_n = g.value0(b.loss_att_n);
  tr.total = g.value0(b.total);
  return tr;
}

Var IntentModel::attention_loss_only(Graph& g, const AnnotatedSentence& s) {
  require(two_side_, "attention_loss_only: variant has no attention loss");
  Build b = build(g, s, true);
  return b.loss_att_p;
}

// ---------------------------------------------------------------------------
// Slot model

struct SlotModel::Build {
  std::vector<Var> logits;               // per token
  std::vector<Var> alpha_pos, alpha_neg; // per token, two-side only
  Var loss_c, loss_att_p, loss_att_n, total;
};

SlotModel::SlotModel(Variant variant, ModelDims dims, std::uint64_t seed,
                     const Tensor* pretrained_emb) {
  task_ = Task::slot;
  variant_ = variant;
  dims_ = dims;
  use_feat_ = variant == Variant::feat || variant == Variant::mixed;
  use_logit_ = variant == Variant::logit || variant == Variant::mixed;
  two_side_ = variant == Variant::two || variant == Variant::two_posi ||
              variant == Variant::two_neg || variant == Variant::two_both ||
              variant == Variant::mixed;
  if (variant == Variant::two) dims_.beta_p = dims_.beta_n = 0.0;
  if (variant == Variant::two_posi) dims_.beta_n = 0.0;
  if (variant == Variant::two_neg) dims_.beta_p = 0.0;
  require(dims_.vocab > 0 && dims_.n_labels > 0 && dims_.hidden > 0,
          "SlotModel: bad dimensions");

  std::mt19937_64 rng(seed);
  std::size_t h2 = 2 * dims_.hidden;
  std::size_t l = dims_.n_labels;
  std::size_t in_dim = dims_.emb_dim + (use_feat_ ? dims_.tag_dim : 0);

  emb_ = &params_.create("emb", {dims_.vocab, dims_.emb_dim});
  if (pretrained_emb) {
    require(pretrained_emb->shape == emb_->shape,
            "SlotModel: pretrained embedding shape mismatch");
    emb_->v = pretrained_emb->v;
  } else {
    uniform_init(*emb_, rng, -0.25, 0.25);
  }
  if (use_feat_) {
    require(dims_.n_tags >= 1, "SlotModel: tag table needs the NONE row");
    tag_table_ = &params_.create("tags", {dims_.n_tags, dims_.tag_dim});
    glorot_init(*tag_table_, rng);
  }
  enc_.create(params_, "enc", in_dim, dims_.hidden, rng);

  if (!two_side_) {
    w_cls_ = &params_.create("cls.W", {l, h2});
    glorot_init(*w_cls_, rng);
    b_cls_ = &params_.create("cls.b", {l});
  } else {
    w_sp_ = &params_.create("two.Wsp", {h2, h2});
    glorot_init(*w_sp_, rng);
    w_sn_ = &params_.create("two.Wsn", {h2, h2});
    glorot_init(*w_sn_, rng);
    w_p_ = &params_.create("two.Wp", {l, 2 * h2});
    glorot_init(*w_p_, rng);
    w_n_ = &params_.create("two.Wn", {l, 2 * h2});
    glorot_init(*w_n_, rng);
    b_p_ = &params_.create("two.bp", {l});
    b_n_ = &params_.create("two.bn", {l});
  }
  if (use_logit_) {
    w_fuse_ = &params_.create("fuse.w", {l});
    constant_init(*w_fuse_, 1.0);
  }
}

SlotModel::Build SlotModel::build(Graph& g, const AnnotatedSentence& s,
                                  bool with_loss) {
  std::size_t n = s.word_ids.size();
  require(n >= 1, "SlotModel: empty sentence");
  for (std::size_t w : s.word_ids) require(w < dims_.vocab, "SlotModel: word id out of range");

  Var emb = g.param(*emb_);
  Var tags;
  if (use_feat_) {
    require(s.slot_tag_ids.empty() || s.slot_tag_ids.size() == n,
            "SlotModel: slot_tag_ids length mismatch");
    tags = g.param(*tag_table_);
  }
  std::vector<Var> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Var x = g.row(emb, s.word_ids[i]);
    if (use_feat_) {
      std::vector<std::size_t> ids =
          s.slot_tag_ids.empty() ? std::vector<std::size_t>{} : s.slot_tag_ids[i];
      for (std::size_t t : ids) require(t < dims_.n_tags, "SlotModel: tag id out of range");
      if (ids.empty()) ids.push_back(dims_.n_tags - 1);  // NONE
      x = g.concat(x, g.rows_mean(tags, ids));
    }
    xs[i] = g.dropout(x, dims_.dropout);
  }
  std::vector<Var> h = encoder_forward(g, enc_, xs);
  for (Var& hi : h) hi = g.dropout(hi, dims_.dropout);

  Build out;
  std::vector<Var> lsm_pos, lsm_neg;
  if (!two_side_) {
    Var w = g.param(*w_cls_);
    Var b = g.param(*b_cls_);
    for (std::size_t i = 0; i < n; ++i)
      out.logits.push_back(g.add(g.matvec(w, h[i]), b));
  } else {
    Var wsp = g.param(*w_sp_);
    Var wsn = g.param(*w_sn_);
    Var wp = g.param(*w_p_);
    Var wn = g.param(*w_n_);
    Var bp = g.param(*b_p_);
    Var bn = g.param(*b_n_);
    for (std::size_t i = 0; i < n; ++i) {
      auto side = [&](Var wbil, Var w_out, Var bias, std::vector<Var>& alphas,
                      std::vector<Var>& lsms) {
        Var wh = g.matvec(wbil, h[i]);
        std::vector<Var> scores;
        scores.reserve(n);
        for (Var hj : h) scores.push_back(g.dot(hj, wh));
        Var u = g.stack(scores);
        Var alpha = g.softmax(u);
        alphas.push_back(alpha);
        if (with_loss) lsms.push_back(g.log_softmax(u));
        Var pooled = g.weighted_sum(h, alpha);
        return g.add(g.matvec(w_out, g.concat(pooled, h[i])), bias);
      };
      Var pl = side(wsp, wp, bp, out.alpha_pos, lsm_pos);
      Var nl = side(wsn, wn, bn, out.alpha_neg, lsm_neg);
      out.logits.push_back(g.sub(pl, nl));
    }
  }

  if (use_logit_) {
    require(s.z_slot.empty() || s.z_slot.size() == n, "SlotModel: z_slot length mismatch");
    Var w = g.param(*w_fuse_);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> z = s.z_slot.empty() ? zero_row(dims_.n_labels) : s.z_slot[i];
      require(z.size() == dims_.n_labels, "SlotModel: z_slot row size mismatch");
      out.logits[i] = g.add_weighted(out.logits[i], w, z);
    }
  }

  if (with_loss) {
    require(s.gold_slots.size() == n, "SlotModel: gold_slots length mismatch");
    std::vector<Var> nlls;
    for (std::size_t i = 0; i < n; ++i) {
      require(s.gold_slots[i] < dims_.n_labels, "SlotModel: gold label out of range");
      nlls.push_back(g.pick_nll(out.logits[i], s.gold_slots[i]));
    }
    out.loss_c = g.sum(nlls);
    out.total = out.loss_c;
    if (two_side_) {
      auto att_sum = [&](const std::vector<Var>& lsms,
                         const std::vector<std::vector<double>>& t) {
        std::vector<Var> terms;
        for (std::size_t i = 0; i < lsms.size(); ++i) {
          std::vector<double> row = i < t.size() ? t[i] : zero_row(n);
          require(row.size() == n, "SlotModel: attention target length mismatch");
          terms.push_back(g.weighted_nll(lsms[i], row));
        }
        return g.sum(terms);
      };
      out.loss_att_p = att_sum(lsm_pos, s.t_pos);
      out.loss_att_n = att_sum(lsm_neg, s.t_neg);
      out.total = g.axpy(g.axpy(out.loss_c, dims_.beta_p, out.loss_att_p),
                         dims_.beta_n, out.loss_att_n);
    }
  }
  return out;
}

Var SlotModel::loss(Graph& g, const AnnotatedSentence& s) {
  return build(g, s, true).total;
}

std::vector<std::size_t> SlotModel::predict(const AnnotatedSentence& s) {
  Graph g(false, nullptr);
  Build b = build(g, s, false);
  std::vector<std::size_t> out;
  out.reserve(b.logits.size());
  for (Var l : b.logits) out.push_back(argmax(g.value(l)));
  return out;
}

SlotTrace SlotModel::trace(const AnnotatedSentence& s, bool training,
                           std::mt19937_64* rng) {
  Graph g(training, rng);
  Build b = build(g, s, true);
  SlotTrace tr;
  for (Var l : b.logits) {
    tr.logits.push_back(g.value(l));
    tr.probs.push_back(softmax_values(g.value(l)));
  }
  for (Var a : b.alpha_pos) tr.alpha_pos.push_back(g.value(a));
  for (Var a : b.alpha_neg) tr.alpha_neg.push_back(g.value(a));
  tr.loss_c = g.value0(b.loss_c);
  if (b.loss_att_p.ok()) tr.loss_att_p = g.value0(b.loss_att_p);
  if (b.loss_att_n.ok()) tr.loss_att_n = g.value0(b.loss_att_n);
  tr.total = g.value0(b.total);
  return tr;
}

std::unique_ptr<Model> build_model(Variant variant, Task task, ModelDims dims,
                                   std::uint64_t seed, const Tensor* pretrained_emb) {
  if (task == Task::intent)
    return std::make_unique<IntentModel>(variant, dims, seed, pretrained_emb);
  return std::make_unique<SlotModel>(variant, dims, seed, pretrained_emb);
}

}  // namespace renn
