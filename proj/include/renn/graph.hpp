#pragma once

#include <functional>
#include <random>
#include <unordered_map>
#include <vector>

#include "renn/tensor.hpp"

namespace renn {

// Handle to a node on the tape.
struct Var {
  int idx = -1;
  bool ok() const { return idx >= 0; }
};

// Dynamic computation tape, double precision throughout. A graph is built for
// one example, backward() is run once, and gradients accumulate into the
// parameter tensors bound through param(). Every op checks its output for
// NaN/Inf and throws on the first non-finite value.
class Graph {
 public:
  explicit Graph(bool training = false, std::mt19937_64* rng = nullptr);

  Var input(std::vector<double> v, std::vector<std::size_t> shape);
  Var scalar_input(double v);
  Var param(Tensor& p);  // bound once per graph; repeated calls return the same node

  Var matvec(Var w, Var x);                   // [m x n] * [n] -> [m]
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);                     // elementwise
  Var scale(Var a, double k);
  Var tanh_(Var a);
  Var sigmoid_(Var a);
  Var concat(Var a, Var b);                   // vectors
  Var dot(Var a, Var b);                      // -> scalar
  Var row(Var m, std::size_t r);              // matrix row -> vector
  Var pick(Var v, std::size_t i);             // vector element -> scalar
  Var stack(const std::vector<Var>& scalars); // n scalars -> [n]
  Var weighted_sum(const std::vector<Var>& hs, Var alpha);  // sum_i alpha_i * h_i
  Var softmax(Var x);                         // stable, max-subtraction
  Var log_softmax(Var x);
  Var pick_nll(Var logits, std::size_t gold); // -log softmax(logits)[gold]
  Var weighted_nll(Var log_probs, std::vector<double> weights);  // -sum w_i * lp_i
  Var add_weighted(Var logits, Var w, std::vector<double> mask); // logits + w .* mask
  Var rows_mean(Var table, std::vector<std::size_t> rows);       // mean of matrix rows
  Var dropout(Var x, double p);               // inverted dropout; identity in eval mode
  Var sum(const std::vector<Var>& xs);        // same-shape sum
  Var axpy(Var a, double beta, Var b);        // a + beta * b

  void backward(Var loss);

  const std::vector<double>& value(Var x) const;
  const std::vector<double>& grad(Var x) const;
  double value0(Var x) const;
  const std::vector<std::size_t>& shape(Var x) const;

  bool training() const { return training_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<std::size_t> shape;
    std::vector<double> v;
    std::vector<double> g;
    std::function<void(Graph&)> back;  // null for inputs
    const char* name = "";
  };

  int new_node(std::vector<std::size_t> shape, const char* name);
  void check_finite(int idx);
  Node& at(Var x);
  const Node& at(Var x) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, int> param_nodes_;
  bool training_ = false;
  std::mt19937_64* rng_ = nullptr;
};

}  // namespace renn
