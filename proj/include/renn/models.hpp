#pragma once

#include <memory>
#include <string>
#include <vector>

#include "renn/graph.hpp"
#include "renn/neural.hpp"
#include "renn/tensor.hpp"

namespace renn {

enum class Task { intent, slot };
enum class Variant { base, feat, logit, two, two_posi, two_neg, two_both, mixed };

Task parse_task(const std::string& s);
Variant parse_variant(const std::string& s);
std::string task_name(Task t);
std::string variant_name(Variant v);

struct ModelDims {
  std::size_t vocab = 0;
  std::size_t emb_dim = 100;
  std::size_t hidden = 100;
  std::size_t tag_dim = 20;
  std::size_t n_labels = 0;  // intents, or slot classes (BIO tags incl. "O")
  std::size_t n_tags = 1;    // rule tag vocabulary incl. the reserved NONE row (last)
  double dropout = 0.5;
  double beta_p = 0.0;
  double beta_n = 0.0;
};

// One sentence with everything the models consume: word ids, gold labels and
// the precomputed rule evaluation outcome (tag features, output indicators,
// attention guidance targets). Unused fields may be left empty.
struct AnnotatedSentence {
  std::vector<std::size_t> word_ids;
  std::size_t gold_intent = 0;
  std::vector<std::size_t> gold_slots;
  std::vector<std::size_t> intent_tag_ids;             // fired intent tags, dedup'd
  std::vector<std::vector<std::size_t>> slot_tag_ids;  // per-token BIO tag multiset
  std::vector<double> z_intent;                        // [n_labels]
  std::vector<std::vector<double>> z_slot;             // [n][n_labels]
  std::vector<std::vector<double>> t_pos, t_neg;       // intent: [K][n]; slot: [n][n]
};

// Attention weights and pooled vector for score_i = h_i' (W c).
std::pair<Var, Var> attention_pool(Graph& g, const std::vector<Var>& h, Var w, Var c);

// Value-level fusion helpers.
double attention_loss(const std::vector<std::vector<double>>& alpha,
                      const std::vector<std::vector<double>>& t);
double total_loss(double loss_c, double loss_att_p, double loss_att_n,
                  double beta_p, double beta_n);
std::vector<double> fuse_logits(const std::vector<double>& logits,
                                const std::vector<double>& z,
                                const std::vector<double>& w);

struct IntentTrace {
  std::vector<double> logits, probs;
  std::vector<std::vector<double>> alpha_pos, alpha_neg;  // base: one row in alpha_pos
  double loss_c = 0, loss_att_p = 0, loss_att_n = 0, total = 0;
};

struct SlotTrace {
  std::vector<std::vector<double>> logits, probs;          // per token
  std::vector<std::vector<double>> alpha_pos, alpha_neg;   // per token (two-side only)
  double loss_c = 0, loss_att_p = 0, loss_att_n = 0, total = 0;
};

class Model {
 public:
  virtual ~Model() = default;

  // Training loss for one sentence (classification plus weighted attention
  // losses where the variant has them).
  virtual Var loss(Graph& g, const AnnotatedSentence& s) = 0;

  // Deterministic label ids; one entry for intent, one per token for slot.
  virtual std::vector<std::size_t> predict(const AnnotatedSentence& s) = 0;

  ParamMap& params() { return params_; }
  Task task() const { return task_; }
  Variant variant() const { return variant_; }
  const ModelDims& dims() const { return dims_; }

 protected:
  ParamMap params_;
  Task task_ = Task::intent;
  Variant variant_ = Variant::base;
  ModelDims dims_;
};

class IntentModel : public Model {
 public:
  IntentModel(Variant variant, ModelDims dims, std::uint64_t seed,
              const Tensor* pretrained_emb = nullptr);

  Var loss(Graph& g, const AnnotatedSentence& s) override;
  std::vector<std::size_t> predict(const AnnotatedSentence& s) override;

  IntentTrace trace(const AnnotatedSentence& s, bool training = false,
                    std::mt19937_64* rng = nullptr);
  // Positive attention loss alone, for attention-guidance experiments.
  Var attention_loss_only(Graph& g, const AnnotatedSentence& s);

 private:
  struct Build;
  Build build(Graph& g, const AnnotatedSentence& s, bool with_loss);

  bool use_feat_ = false, use_logit_ = false, two_side_ = false;
  EncoderParams enc_;
  Tensor* emb_ = nullptr;
  Tensor* tag_table_ = nullptr;
  Tensor* w_att_ = nullptr;    // base attention bilinear
  Tensor* c_att_ = nullptr;    // base attention context
  Tensor* w_cls_ = nullptr;    // base classifier
  Tensor* b_cls_ = nullptr;
  Tensor* w_a_ = nullptr;      // shared two-side bilinear
  Tensor* c_pos_ = nullptr;    // [K x 2H] per-label contexts
  Tensor* c_neg_ = nullptr;
  Tensor* w_out_pos_ = nullptr;  // [K x width] per-label logit weights
  Tensor* w_out_neg_ = nullptr;
  Tensor* b_pos_ = nullptr;
  Tensor* b_neg_ = nullptr;
  Tensor* w_fuse_ = nullptr;   // output fusion confidence per label
};

class SlotModel : public Model {
 public:
  SlotModel(Variant variant, ModelDims dims, std::uint64_t seed,
            const Tensor* pretrained_emb = nullptr);

  Var loss(Graph& g, const AnnotatedSentence& s) override;
  std::vector<std::size_t> predict(const AnnotatedSentence& s) override;

  SlotTrace trace(const AnnotatedSentence& s, bool training = false,
                  std::mt19937_64* rng = nullptr);

 private:
  struct Build;
  Build build(Graph& g, const AnnotatedSentence& s, bool with_loss);

  bool use_feat_ = false, use_logit_ = false, two_side_ = false;
  EncoderParams enc_;
  Tensor* emb_ = nullptr;
  Tensor* tag_table_ = nullptr;
  Tensor* w_cls_ = nullptr;
  Tensor* b_cls_ = nullptr;
  Tensor* w_sp_ = nullptr;  // positive/negative attention bilinears
  Tensor* w_sn_ = nullptr;
  Tensor* w_p_ = nullptr;   // classifiers over [s_i; h_i]
  Tensor* w_n_ = nullptr;
  Tensor* b_p_ = nullptr;
  Tensor* b_n_ = nullptr;
  Tensor* w_fuse_ = nullptr;
};

std::unique_ptr<Model> build_model(Variant variant, Task task, ModelDims dims,
                                   std::uint64_t seed,
                                   const Tensor* pretrained_emb = nullptr);

}  // namespace renn
