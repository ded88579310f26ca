#include "renn/neural.hpp"

#include <algorithm>
#include <cmath>

namespace renn {

namespace {

LstmDirParams create_dir(ParamMap& params, const std::string& prefix,
                         std::size_t in, std::size_t h, std::mt19937_64& rng) {
  LstmDirParams d;
  auto mat = [&](const std::string& name, std::size_t r, std::size_t c) {
    Tensor& t = params.create(prefix + name, {r, c});
    glorot_init(t, rng);
    return &t;
  };
  auto bias = [&](const std::string& name, double fill) {
    Tensor& t = params.create(prefix + name, {h});
    constant_init(t, fill);
    return &t;
  };
  d.Wi = mat("Wi", h, in); d.Ui = mat("Ui", h, h); d.bi = bias("bi", 0.0);
  d.Wf = mat("Wf", h, in); d.Uf = mat("Uf", h, h); d.bf = bias("bf", 1.0);
  d.Wo = mat("Wo", h, in); d.Uo = mat("Uo", h, h); d.bo = bias("bo", 0.0);
  d.Wg = mat("Wg", h, in); d.Ug = mat("Ug", h, h); d.bg = bias("bg", 0.0);
  return d;
}

struct DirVars {
  Var Wi, Ui, bi, Wf, Uf, bf, Wo, Uo, bo, Wg, Ug, bg;
};

DirVars bind_dir(Graph& g, const LstmDirParams& d) {
  return {g.param(*d.Wi), g.param(*d.Ui), g.param(*d.bi),
          g.param(*d.Wf), g.param(*d.Uf), g.param(*d.bf),
          g.param(*d.Wo), g.param(*d.Uo), g.param(*d.bo),
          g.param(*d.Wg), g.param(*d.Ug), g.param(*d.bg)};
}

std::vector<Var> run_dir(Graph& g, const DirVars& p, const std::vector<Var>& xs,
                         std::size_t h, bool reversed) {
  std::vector<Var> out(xs.size());
  Var hprev = g.input(std::vector<double>(h, 0.0), {h});
  Var cprev = hprev;
  for (std::size_t step = 0; step < xs.size(); ++step) {
    std::size_t t = reversed ? xs.size() - 1 - step : step;
    Var x = xs[t];
    Var ig = g.sigmoid_(g.add(g.add(g.matvec(p.Wi, x), g.matvec(p.Ui, hprev)), p.bi));
    Var fg = g.sigmoid_(g.add(g.add(g.matvec(p.Wf, x), g.matvec(p.Uf, hprev)), p.bf));
    Var og = g.sigmoid_(g.add(g.add(g.matvec(p.Wo, x), g.matvec(p.Uo, hprev)), p.bo));
    Var cand = g.tanh_(g.add(g.add(g.matvec(p.Wg, x), g.matvec(p.Ug, hprev)), p.bg));
    Var c = g.add(g.cmul(fg, cprev), g.cmul(ig, cand));
    Var hh = g.cmul(og, g.tanh_(c));
    out[t] = hh;
    hprev = hh;
    cprev = c;
  }
  return out;
}

}  // namespace

void EncoderParams::create(ParamMap& params, const std::string& prefix,
                           std::size_t in, std::size_t h, std::mt19937_64& rng) {
  in_dim = in;
  hidden = h;
  fwd = create_dir(params, prefix + ".fwd.", in, h, rng);
  bwd = create_dir(params, prefix + ".bwd.", in, h, rng);
}

std::vector<Var> encoder_forward(Graph& g, const EncoderParams& enc,
                                 const std::vector<Var>& xs) {
  if (xs.empty()) throw Error("encoder_forward: empty input sequence");
  for (Var x : xs) {
    if (g.shape(x) != std::vector<std::size_t>{enc.in_dim})
      throw Error("encoder_forward: input width mismatch");
  }
  DirVars f = bind_dir(g, enc.fwd);
  DirVars b = bind_dir(g, enc.bwd);
  std::vector<Var> hf = run_dir(g, f, xs, enc.hidden, false);
  std::vector<Var> hb = run_dir(g, b, xs, enc.hidden, true);
  std::vector<Var> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = g.concat(hf[i], hb[i]);
  return out;
}

std::vector<double> softmax_values(const std::vector<double>& logits) {
  if (logits.empty()) throw Error("softmax_values: empty input");
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

double cross_entropy(const std::vector<double>& probs, std::size_t gold) {
  if (gold >= probs.size()) throw Error("cross_entropy: gold index out of range");
  return -std::log(std::max(probs[gold], 1e-300));
}

Adam::Adam(ParamMap& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
  for (const auto& [name, t] : params_.items()) {
    m_.emplace_back(t->size(), 0.0);
    v_.emplace_back(t->size(), 0.0);
  }
}

void Adam::step() {
  const auto& items = params_.items();
  if (items.size() != m_.size())
    throw Error("Adam: parameter set changed after construction");
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < items.size(); ++p) {
    Tensor& t = *items[p].second;
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t k = 0; k < t.size(); ++k) {
      double grad = t.g[k];
      if (!std::isfinite(grad))
        throw Error("Adam: non-finite gradient in '" + items[p].first + "'");
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * grad;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * grad * grad;
      double mhat = m[k] / bc1;
      double vhat = v[k] / bc2;
      t.v[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      t.g[k] = 0.0;
    }
  }
}

void Adam::scale_grads(double k) {
  for (const auto& [name, t] : params_.items())
    for (double& gk : t->g) gk *= k;
}

double Adam::clip_global_norm(double max_norm) {
  double sq = 0.0;
  for (const auto& [name, t] : params_.items())
    for (double gk : t->g) sq += gk * gk;
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double k = max_norm / norm;
    scale_grads(k);
  }
  return norm;
}

double grad_check(const std::function<double(bool)>& loss_fn, ParamMap& params,
                  double eps, std::size_t max_coords_per_tensor,
                  std::uint64_t sample_seed) {
  params.zero_grads();
  loss_fn(true);
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, t] : params.items()) analytic.push_back(t->g);
  params.zero_grads();

  std::mt19937_64 rng(sample_seed ^ 0x9e3779b97f4a7c15ull);
  double max_rel = 0.0;
  const auto& items = params.items();
  for (std::size_t p = 0; p < items.size(); ++p) {
    Tensor& t = *items[p].second;
    std::vector<std::size_t> coords(t.size());
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = k;
    if (max_coords_per_tensor > 0 && coords.size() > max_coords_per_tensor) {
      shuffle_vec(coords, rng);
      coords.resize(max_coords_per_tensor);
    }
    for (std::size_t k : coords) {
      double save = t.v[k];
      t.v[k] = save + eps;
      double fp = loss_fn(false);
      t.v[k] = save - eps;
      double fm = loss_fn(false);
      t.v[k] = save;
      double numeric = (fp - fm) / (2.0 * eps);
      double ana = analytic[p][k];
      double denom = std::max(std::abs(numeric) + std::abs(ana), 1e-8);
      double rel = std::abs(numeric - ana) / denom;
      max_rel = std::max(max_rel, rel);
    }
  }
  params.zero_grads();
  return max_rel;
}

}  // namespace renn
