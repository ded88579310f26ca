#include "renn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace renn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("graph: ") + what);
}

}  // namespace

Graph::Graph(bool training, std::mt19937_64* rng) : training_(training), rng_(rng) {
  nodes_.reserve(512);
}

Graph::Node& Graph::at(Var x) {
  require(x.idx >= 0 && x.idx < static_cast<int>(nodes_.size()), "invalid Var");
  return nodes_[static_cast<std::size_t>(x.idx)];
}

const Graph::Node& Graph::at(Var x) const {
  require(x.idx >= 0 && x.idx < static_cast<int>(nodes_.size()), "invalid Var");
  return nodes_[static_cast<std::size_t>(x.idx)];
}

int Graph::new_node(std::vector<std::size_t> shape, const char* name) {
  Node n;
  n.shape = std::move(shape);
  n.v.assign(Tensor::count(n.shape), 0.0);
  n.g.assign(n.v.size(), 0.0);
  n.name = name;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::check_finite(int idx) {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  for (double x : n.v) {
    if (!std::isfinite(x))
      throw Error(std::string("non-finite value produced by op '") + n.name + "'");
  }
}

const std::vector<double>& Graph::value(Var x) const { return at(x).v; }
const std::vector<double>& Graph::grad(Var x) const { return at(x).g; }
const std::vector<std::size_t>& Graph::shape(Var x) const { return at(x).shape; }

double Graph::value0(Var x) const {
  const Node& n = at(x);
  require(n.v.size() == 1, "value0 on non-scalar");
  return n.v[0];
}

Var Graph::input(std::vector<double> v, std::vector<std::size_t> shape) {
  require(v.size() == Tensor::count(shape), "input: size/shape mismatch");
  int i = new_node(std::move(shape), "input");
  nodes_[i].v = std::move(v);
  check_finite(i);
  return {i};
}

Var Graph::scalar_input(double v) { return input({v}, {}); }

Var Graph::param(Tensor& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return {it->second};
  int i = new_node(p.shape, "param");
  nodes_[i].v = p.v;
  Tensor* tp = &p;
  nodes_[i].back = [i, tp](Graph& g) {
    const Node& n = g.nodes_[i];
    for (std::size_t k = 0; k < n.g.size(); ++k) tp->g[k] += n.g[k];
  };
  check_finite(i);
  param_nodes_.emplace(&p, i);
  return {i};
}

Var Graph::matvec(Var w, Var x) {
  const Node& nw = at(w);
  const Node& nx = at(x);
  require(nw.shape.size() == 2 && nx.shape.size() == 1, "matvec: need matrix, vector");
  std::size_t m = nw.shape[0], n = nw.shape[1];
  require(nx.v.size() == n, "matvec: inner dimension mismatch");
  int i = new_node({m}, "matvec");
  {
    Node& out = nodes_[i];
    const double* W = nw.v.data();
    const double* X = nx.v.data();
    for (std::size_t r = 0; r < m; ++r) {
      double acc = 0.0;
      const double* Wr = W + r * n;
      for (std::size_t c = 0; c < n; ++c) acc += Wr[c] * X[c];
      out.v[r] = acc;
    }
  }
  check_finite(i);
  int wi = w.idx, xi = x.idx;
  nodes_[i].back = [i, wi, xi, m, n](Graph& g) {
    const double* go = g.nodes_[i].g.data();
    const double* W = g.nodes_[wi].v.data();
    const double* X = g.nodes_[xi].v.data();
    double* gw = g.nodes_[wi].g.data();
    double* gx = g.nodes_[xi].g.data();
    for (std::size_t r = 0; r < m; ++r) {
      double gr = go[r];
      if (gr == 0.0) continue;
      double* gwr = gw + r * n;
      const double* Wr = W + r * n;
      for (std::size_t c = 0; c < n; ++c) {
        gwr[c] += gr * X[c];
        gx[c] += gr * Wr[c];
      }
    }
  };
  return {i};
}

Var Graph::add(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require(na.shape == nb.shape, "add: shape mismatch");
  int i = new_node(na.shape, "add");
  for (std::size_t k = 0; k < na.v.size(); ++k) nodes_[i].v[k] = na.v[k] + nb.v[k];
  check_finite(i);
  int ai = a.idx, bi = b.idx;
  nodes_[i].back = [i, ai, bi](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < go.size(); ++k) {
      g.nodes_[ai].g[k] += go[k];
      g.nodes_[bi].g[k] += go[k];
    }
  };
  return {i};
}

Var Graph::sub(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require(na.shape == nb.shape, "sub: shape mismatch");
  int i = new_node(na.shape, "sub");
  for (std::size_t k = 0; k < na.v.size(); ++k) nodes_[i].v[k] = na.v[k] - nb.v[k];
  check_finite(i);
  int ai = a.idx, bi = b.idx;
  nodes_[i].back = [i, ai, bi](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < go.size(); ++k) {
      g.nodes_[ai].g[k] += go[k];
      g.nodes_[bi].g[k] -= go[k];
    }
  };
  return {i};
}

Var Graph::cmul(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require(na.shape == nb.shape, "cmul: shape mismatch");
  int i = new_node(na.shape, "cmul");
  for (std::size_t k = 0; k < na.v.size(); ++k) nodes_[i].v[k] = na.v[k] * nb.v[k];
  check_finite(i);
  int ai = a.idx, bi = b.idx;
  nodes_[i].back = [i, ai, bi](Graph& g) {
    const auto& go = g.nodes_[i].g;
    const auto& va = g.nodes_[ai].v;
    const auto& vb = g.nodes_[bi].v;
    for (std::size_t k = 0; k < go.size(); ++k) {
      g.nodes_[ai].g[k] += go[k] * vb[k];
      g.nodes_[bi].g[k] += go[k] * va[k];
    }
  };
  return {i};
}

Var Graph::scale(Var a, double kf) {
  const Node& na = at(a);
  int i = new_node(na.shape, "scale");
  for (std::size_t k = 0; k < na.v.size(); ++k) nodes_[i].v[k] = na.v[k] * kf;
  check_finite(i);
  int ai = a.idx;
  nodes_[i].back = [i, ai, kf](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < go.size(); ++k) g.nodes_[ai].g[k] += go[k] * kf;
  };
  return {i};
}

Var Graph::tanh_(Var a) {
  const Node& na = at(a);
  int i = new_node(na.shape, "tanh");
  for (std::size_t k = 0; k < na.v.size(); ++k) nodes_[i].v[k] = std::tanh(na.v[k]);
  check_finite(i);
  int ai = a.idx;
  nodes_[i].back = [i, ai](Graph& g) {
    const Node& n = g.nodes_[i];
    for (std::size_t k = 0; k < n.g.size(); ++k)
      g.nodes_[ai].g[k] += n.g[k] * (1.0 - n.v[k] * n.v[k]);
  };
  return {i};
}

Var Graph::sigmoid_(Var a) {
  const Node& na = at(a);
  int i = new_node(na.shape, "sigmoid");
  for (std::size_t k = 0; k < na.v.size(); ++k) {
    double x = na.v[k];
    nodes_[i].v[k] = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                            : std::exp(x) / (1.0 + std::exp(x));
  }
  check_finite(i);
  int ai = a.idx;
  nodes_[i].back = [i, ai](Graph& g) {
    const Node& n = g.nodes_[i];
    for (std::size_t k = 0; k < n.g.size(); ++k)
      g.nodes_[ai].g[k] += n.g[k] * n.v[k] * (1.0 - n.v[k]);
  };
  return {i};
}

Var Graph::concat(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require(na.shape.size() == 1 && nb.shape.size() == 1, "concat: vectors only");
  std::size_t la = na.v.size(), lb = nb.v.size();
  int i = new_node({la + lb}, "concat");
  std::copy(na.v.begin(), na.v.end(), nodes_[i].v.begin());
  std::copy(nb.v.begin(), nb.v.end(), nodes_[i].v.begin() + static_cast<long>(la));
  int ai = a.idx, bi = b.idx;
  nodes_[i].back = [i, ai, bi, la, lb](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < la; ++k) g.nodes_[ai].g[k] += go[k];
    for (std::size_t k = 0; k < lb; ++k) g.nodes_[bi].g[k] += go[la + k];
  };
  return {i};
}

Var Graph::dot(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require(na.shape == nb.shape && na.shape.size() == 1, "dot: vector shape mismatch");
  int i = new_node({}, "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < na.v.size(); ++k) acc += na.v[k] * nb.v[k];
  nodes_[i].v[0] = acc;
  check_finite(i);
  int ai = a.idx, bi = b.idx;
  nodes_[i].back = [i, ai, bi](Graph& g) {
    double go = g.nodes_[i].g[0];
    if (go == 0.0) return;
    const auto& va = g.nodes_[ai].v;
    const auto& vb = g.nodes_[bi].v;
    for (std::size_t k = 0; k < va.size(); ++k) {
      g.nodes_[ai].g[k] += go * vb[k];
      g.nodes_[bi].g[k] += go * va[k];
    }
  };
  return {i};
}

Var Graph::row(Var m, std::size_t r) {
  const Node& nm = at(m);
  require(nm.shape.size() == 2, "row: need matrix");
  require(r < nm.shape[0], "row: index out of range");
  std::size_t c = nm.shape[1];
  int i = new_node({c}, "row");
  std::copy(nm.v.begin() + static_cast<long>(r * c),
            nm.v.begin() + static_cast<long>((r + 1) * c), nodes_[i].v.begin());
  int mi = m.idx;
  nodes_[i].back = [i, mi, r, c](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < c; ++k) g.nodes_[mi].g[r * c + k] += go[k];
  };
  return {i};
}

Var Graph::pick(Var v, std::size_t idx) {
  const Node& nv = at(v);
  require(nv.shape.size() == 1 && idx < nv.v.size(), "pick: bad index");
  int i = new_node({}, "pick");
  nodes_[i].v[0] = nv.v[idx];
  int vi = v.idx;
  nodes_[i].back = [i, vi, idx](Graph& g) { g.nodes_[vi].g[idx] += g.nodes_[i].g[0]; };
  return {i};
}

Var Graph::stack(const std::vector<Var>& scalars) {
  require(!scalars.empty(), "stack: empty");
  for (Var s : scalars) require(at(s).v.size() == 1, "stack: scalars only");
  std::size_t n = scalars.size();
  int i = new_node({n}, "stack");
  std::vector<int> parents(n);
  for (std::size_t k = 0; k < n; ++k) {
    parents[k] = scalars[k].idx;
    nodes_[i].v[k] = nodes_[parents[k]].v[0];
  }
  nodes_[i].back = [i, parents](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < parents.size(); ++k) g.nodes_[parents[k]].g[0] += go[k];
  };
  return {i};
}

Var Graph::weighted_sum(const std::vector<Var>& hs, Var alpha) {
  require(!hs.empty(), "weighted_sum: empty");
  const Node& nal = at(alpha);
  require(nal.shape.size() == 1 && nal.v.size() == hs.size(),
          "weighted_sum: weight length mismatch");
  std::size_t d = at(hs[0]).v.size();
  std::vector<int> parents(hs.size());
  for (std::size_t k = 0; k < hs.size(); ++k) {
    require(at(hs[k]).v.size() == d, "weighted_sum: ragged inputs");
    parents[k] = hs[k].idx;
  }
  int i = new_node({d}, "weighted_sum");
  for (std::size_t k = 0; k < hs.size(); ++k) {
    double a = nal.v[k];
    const auto& hv = nodes_[parents[k]].v;
    for (std::size_t c = 0; c < d; ++c) nodes_[i].v[c] += a * hv[c];
  }
  check_finite(i);
  int ali = alpha.idx;
  nodes_[i].back = [i, ali, parents, d](Graph& g) {
    const auto& go = g.nodes_[i].g;
    const auto& av = g.nodes_[ali].v;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      const auto& hv = g.nodes_[parents[k]].v;
      auto& hg = g.nodes_[parents[k]].g;
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        hg[c] += av[k] * go[c];
        acc += hv[c] * go[c];
      }
      g.nodes_[ali].g[k] += acc;
    }
  };
  return {i};
}

Var Graph::softmax(Var x) {
  const Node& nx = at(x);
  require(nx.shape.size() == 1 && !nx.v.empty(), "softmax: need vector");
  int i = new_node(nx.shape, "softmax");
  double mx = *std::max_element(nx.v.begin(), nx.v.end());
  double z = 0.0;
  for (std::size_t k = 0; k < nx.v.size(); ++k) {
    nodes_[i].v[k] = std::exp(nx.v[k] - mx);
    z += nodes_[i].v[k];
  }
  for (double& p : nodes_[i].v) p /= z;
  check_finite(i);
  int xi = x.idx;
  nodes_[i].back = [i, xi](Graph& g) {
    const Node& n = g.nodes_[i];
    double dotpg = 0.0;
    for (std::size_t k = 0; k < n.v.size(); ++k) dotpg += n.v[k] * n.g[k];
    for (std::size_t k = 0; k < n.v.size(); ++k)
      g.nodes_[xi].g[k] += n.v[k] * (n.g[k] - dotpg);
  };
  return {i};
}

Var Graph::log_softmax(Var x) {
  const Node& nx = at(x);
  require(nx.shape.size() == 1 && !nx.v.empty(), "log_softmax: need vector");
  int i = new_node(nx.shape, "log_softmax");
  double mx = *std::max_element(nx.v.begin(), nx.v.end());
  double z = 0.0;
  for (double xv : nx.v) z += std::exp(xv - mx);
  double lse = mx + std::log(z);
  for (std::size_t k = 0; k < nx.v.size(); ++k) nodes_[i].v[k] = nx.v[k] - lse;
  check_finite(i);
  int xi = x.idx;
  nodes_[i].back = [i, xi](Graph& g) {
    const Node& n = g.nodes_[i];
    double gsum = 0.0;
    for (double gv : n.g) gsum += gv;
    for (std::size_t k = 0; k < n.v.size(); ++k)
      g.nodes_[xi].g[k] += n.g[k] - std::exp(n.v[k]) * gsum;
  };
  return {i};
}

Var Graph::pick_nll(Var logits, std::size_t gold) {
  const Node& nx = at(logits);
  require(nx.shape.size() == 1 && gold < nx.v.size(), "pick_nll: bad gold index");
  int i = new_node({}, "pick_nll");
  double mx = *std::max_element(nx.v.begin(), nx.v.end());
  double z = 0.0;
  for (double xv : nx.v) z += std::exp(xv - mx);
  double lse = mx + std::log(z);
  nodes_[i].v[0] = lse - nx.v[gold];
  check_finite(i);
  int xi = logits.idx;
  nodes_[i].back = [i, xi, gold, lse](Graph& g) {
    double go = g.nodes_[i].g[0];
    if (go == 0.0) return;
    const auto& xv = g.nodes_[xi].v;
    for (std::size_t k = 0; k < xv.size(); ++k) {
      double p = std::exp(xv[k] - lse);
      g.nodes_[xi].g[k] += go * (p - (k == gold ? 1.0 : 0.0));
    }
  };
  return {i};
}

Var Graph::weighted_nll(Var log_probs, std::vector<double> weights) {
  const Node& nx = at(log_probs);
  require(nx.shape.size() == 1 && nx.v.size() == weights.size(),
          "weighted_nll: length mismatch");
  int i = new_node({}, "weighted_nll");
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) acc -= weights[k] * nx.v[k];
  nodes_[i].v[0] = acc;
  check_finite(i);
  int xi = log_probs.idx;
  auto w = std::move(weights);
  nodes_[i].back = [i, xi, w](Graph& g) {
    double go = g.nodes_[i].g[0];
    if (go == 0.0) return;
    for (std::size_t k = 0; k < w.size(); ++k) g.nodes_[xi].g[k] -= go * w[k];
  };
  return {i};
}

Var Graph::add_weighted(Var logits, Var w, std::vector<double> mask) {
  const Node& nl = at(logits);
  const Node& nw = at(w);
  require(nl.shape == nw.shape && nl.shape.size() == 1, "add_weighted: shape mismatch");
  require(nl.v.size() == mask.size(), "add_weighted: mask length mismatch");
  int i = new_node(nl.shape, "add_weighted");
  for (std::size_t k = 0; k < nl.v.size(); ++k)
    nodes_[i].v[k] = nl.v[k] + nw.v[k] * mask[k];
  check_finite(i);
  int li = logits.idx, wi = w.idx;
  auto m = std::move(mask);
  nodes_[i].back = [i, li, wi, m](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < go.size(); ++k) {
      g.nodes_[li].g[k] += go[k];
      g.nodes_[wi].g[k] += go[k] * m[k];
    }
  };
  return {i};
}

Var Graph::rows_mean(Var table, std::vector<std::size_t> rows) {
  const Node& nt = at(table);
  require(nt.shape.size() == 2, "rows_mean: need matrix");
  require(!rows.empty(), "rows_mean: empty row list");
  std::size_t c = nt.shape[1];
  for (std::size_t r : rows) require(r < nt.shape[0], "rows_mean: row out of range");
  int i = new_node({c}, "rows_mean");
  double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows)
    for (std::size_t k = 0; k < c; ++k) nodes_[i].v[k] += nt.v[r * c + k] * inv;
  check_finite(i);
  int ti = table.idx;
  auto rs = std::move(rows);
  nodes_[i].back = [i, ti, rs, c, inv](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t r : rs)
      for (std::size_t k = 0; k < c; ++k) g.nodes_[ti].g[r * c + k] += go[k] * inv;
  };
  return {i};
}

Var Graph::dropout(Var x, double p) {
  require(p >= 0.0 && p < 1.0, "dropout: p must be in [0,1)");
  const Node& nx = at(x);
  if (!training_ || p == 0.0) {
    int i = new_node(nx.shape, "dropout");
    nodes_[i].v = nx.v;
    int xi = x.idx;
    nodes_[i].back = [i, xi](Graph& g) {
      const auto& go = g.nodes_[i].g;
      for (std::size_t k = 0; k < go.size(); ++k) g.nodes_[xi].g[k] += go[k];
    };
    return {i};
  }
  require(rng_ != nullptr, "dropout: training mode needs an RNG");
  int i = new_node(nx.shape, "dropout");
  std::vector<double> mask(nx.v.size());
  double keep = 1.0 / (1.0 - p);
  for (std::size_t k = 0; k < mask.size(); ++k)
    mask[k] = rand_uniform(*rng_, 0.0, 1.0) < p ? 0.0 : keep;
  for (std::size_t k = 0; k < mask.size(); ++k) nodes_[i].v[k] = nx.v[k] * mask[k];
  int xi = x.idx;
  nodes_[i].back = [i, xi, mask](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < go.size(); ++k) g.nodes_[xi].g[k] += go[k] * mask[k];
  };
  return {i};
}

Var Graph::sum(const std::vector<Var>& xs) {
  require(!xs.empty(), "sum: empty");
  const Node& n0 = at(xs[0]);
  std::vector<int> parents(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    require(at(xs[k]).shape == n0.shape, "sum: shape mismatch");
    parents[k] = xs[k].idx;
  }
  int i = new_node(n0.shape, "sum");
  for (int pi : parents)
    for (std::size_t k = 0; k < nodes_[i].v.size(); ++k)
      nodes_[i].v[k] += nodes_[pi].v[k];
  check_finite(i);
  nodes_[i].back = [i, parents](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (int pi : parents)
      for (std::size_t k = 0; k < go.size(); ++k) g.nodes_[pi].g[k] += go[k];
  };
  return {i};
}

Var Graph::axpy(Var a, double beta, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require(na.shape == nb.shape, "axpy: shape mismatch");
  int i = new_node(na.shape, "axpy");
  for (std::size_t k = 0; k < na.v.size(); ++k)
    nodes_[i].v[k] = na.v[k] + beta * nb.v[k];
  check_finite(i);
  int ai = a.idx, bi = b.idx;
  nodes_[i].back = [i, ai, bi, beta](Graph& g) {
    const auto& go = g.nodes_[i].g;
    for (std::size_t k = 0; k < go.size(); ++k) {
      g.nodes_[ai].g[k] += go[k];
      g.nodes_[bi].g[k] += go[k] * beta;
    }
  };
  return {i};
}

void Graph::backward(Var loss) {
  Node& ln = at(loss);
  require(ln.v.size() == 1, "backward: loss must be scalar");
  ln.g[0] = 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.back) n.back(*this);
  }
}

}  // namespace renn
