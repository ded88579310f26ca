// Independent reference implementations used as test oracles. Everything here
// recomputes results with plain loops and direct formulas, deliberately
// avoiding the graph/tape code paths under test.
#pragma once

#include <cmath>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "renn/neural.hpp"
#include "renn/rule_engine.hpp"
#include "renn/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline Vec matvec(const renn::Tensor& w, const Vec& x) {
  Vec y(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) y[r] += w.at(r, c) * x[c];
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec softmax_direct(const Vec& x) {
  Vec p(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i]);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Step-by-step recurrence for one direction, plain loops.
inline Mat lstm_dir(const renn::LstmDirParams& p, const Mat& xs, bool reversed) {
  std::size_t h = p.bi->size();
  Mat out(xs.size());
  Vec hprev(h, 0.0), cprev(h, 0.0);
  for (std::size_t step = 0; step < xs.size(); ++step) {
    std::size_t t = reversed ? xs.size() - 1 - step : step;
    Vec i_g = matvec(*p.Wi, xs[t]), f_g = matvec(*p.Wf, xs[t]),
        o_g = matvec(*p.Wo, xs[t]), g_g = matvec(*p.Wg, xs[t]);
    Vec iu = matvec(*p.Ui, hprev), fu = matvec(*p.Uf, hprev),
        ou = matvec(*p.Uo, hprev), gu = matvec(*p.Ug, hprev);
    Vec c(h), hh(h);
    for (std::size_t k = 0; k < h; ++k) {
      double ig = sigmoid(i_g[k] + iu[k] + p.bi->v[k]);
      double fg = sigmoid(f_g[k] + fu[k] + p.bf->v[k]);
      double og = sigmoid(o_g[k] + ou[k] + p.bo->v[k]);
      double gg = std::tanh(g_g[k] + gu[k] + p.bg->v[k]);
      c[k] = fg * cprev[k] + ig * gg;
      hh[k] = og * std::tanh(c[k]);
    }
    out[t] = hh;
    hprev = hh;
    cprev = c;
  }
  return out;
}

inline Mat encoder(const renn::EncoderParams& enc, const Mat& xs) {
  Mat f = lstm_dir(enc.fwd, xs, false);
  Mat b = lstm_dir(enc.bwd, xs, true);
  Mat out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = f[i];
    out[i].insert(out[i].end(), b[i].begin(), b[i].end());
  }
  return out;
}

// alpha_i = softmax_i(h_i' W c); s = sum alpha_i h_i
inline std::pair<Vec, Vec> intent_attention(const Mat& h, const renn::Tensor& w,
                                            const Vec& c) {
  Vec wc = matvec(w, c);
  Vec scores(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) scores[i] = dot(h[i], wc);
  Vec alpha = softmax_direct(scores);
  Vec s(h[0].size(), 0.0);
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t d = 0; d < s.size(); ++d) s[d] += alpha[i] * h[i][d];
  return {alpha, s};
}

struct TwoSideOut {
  Vec logits;
  Mat alpha_pos, alpha_neg;
};

// Per-label positive/negative attention, logit difference.
inline TwoSideOut intent_two_side(const Mat& h, const renn::Tensor& wa,
                                  const renn::Tensor& c_pos, const renn::Tensor& c_neg,
                                  const renn::Tensor& w_pos, const renn::Tensor& w_neg,
                                  const renn::Tensor& b_pos, const renn::Tensor& b_neg) {
  std::size_t k_count = c_pos.rows();
  TwoSideOut out;
  out.logits.resize(k_count);
  auto side = [&](const renn::Tensor& ctx, const renn::Tensor& w_out,
                  const renn::Tensor& bias, std::size_t k, Mat& alphas) {
    Vec c(ctx.cols());
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = ctx.at(k, d);
    auto [alpha, s] = intent_attention(h, wa, c);
    alphas.push_back(alpha);
    Vec wk(w_out.cols());
    for (std::size_t d = 0; d < wk.size(); ++d) wk[d] = w_out.at(k, d);
    return dot(wk, s) + bias.v[k];
  };
  for (std::size_t k = 0; k < k_count; ++k) {
    double lp = side(c_pos, w_pos, b_pos, k, out.alpha_pos);
    double ln = side(c_neg, w_neg, b_neg, k, out.alpha_neg);
    out.logits[k] = lp - ln;
  }
  return out;
}

struct SlotTwoSideOut {
  Mat probs;             // per token
  Mat alpha_pos, alpha_neg;
};

// Shared positive/negative attention per target word, then the classifier
// difference over [pooled; h_i].
inline SlotTwoSideOut slot_two_side(const Mat& h, const renn::Tensor& wsp,
                                    const renn::Tensor& wsn, const renn::Tensor& wp,
                                    const renn::Tensor& wn, const renn::Tensor& bp,
                                    const renn::Tensor& bn) {
  SlotTwoSideOut out;
  std::size_t n = h.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto pool = [&](const renn::Tensor& wbil, Mat& alphas) {
      Vec wh = matvec(wbil, h[i]);
      Vec scores(n);
      for (std::size_t j = 0; j < n; ++j) scores[j] = dot(h[j], wh);
      Vec alpha = softmax_direct(scores);
      alphas.push_back(alpha);
      Vec s(h[0].size(), 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t d = 0; d < s.size(); ++d) s[d] += alpha[j] * h[j][d];
      return s;
    };
    Vec sp = pool(wsp, out.alpha_pos);
    Vec sn = pool(wsn, out.alpha_neg);
    Vec in_p = sp;
    in_p.insert(in_p.end(), h[i].begin(), h[i].end());
    Vec in_n = sn;
    in_n.insert(in_n.end(), h[i].begin(), h[i].end());
    Vec lp = matvec(wp, in_p), ln = matvec(wn, in_n);
    Vec diff(lp.size());
    for (std::size_t k = 0; k < lp.size(); ++k)
      diff[k] = (lp[k] + bp.v[k]) - (ln[k] + bn.v[k]);
    out.probs.push_back(softmax_direct(diff));
  }
  return out;
}

// Tries every substring of the joined sentence as a full match, with flags
// emulating in-context anchor behavior. Valid for the supported dialect
// (no word-boundary assertions, no lookaround).
inline bool brute_force_rule_fires(const renn::CompiledRule& rule,
                                   const std::string& text) {
  std::size_t n = text.size();
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      auto flags = std::regex_constants::match_default;
      if (i > 0) flags |= std::regex_constants::match_not_bol;
      if (j < n) flags |= std::regex_constants::match_not_eol;
      if (std::regex_match(text.begin() + static_cast<long>(i),
                           text.begin() + static_cast<long>(j), rule.matcher, flags))
        return true;
    }
  }
  return false;
}

inline std::vector<std::pair<std::string, renn::Polarity>> brute_force_intent_tags(
    const renn::CompiledRuleSet& rs, const std::vector<std::string>& tokens) {
  std::string text = renn::join_tokens(tokens);
  std::set<std::pair<std::string, renn::Polarity>> found;
  for (const auto& rule : rs.rules) {
    if (rule.spec.scope != renn::RuleScope::intent) continue;
    if (brute_force_rule_fires(rule, text))
      found.insert({rule.spec.retag, rule.spec.polarity});
  }
  return {found.begin(), found.end()};
}

// Counts capture groups with a plain parenthesis scan of the expanded pattern.
inline std::size_t count_capture_groups(const std::string& pattern) {
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
    if (c == '[') {
      in_class = true;
    } else if (c == '(') {
      if (!(i + 1 < pattern.size() && pattern[i + 1] == '?')) ++count;
    }
  }
  return count;
}

}  // namespace oracle
