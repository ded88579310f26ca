#pragma once

#include <functional>
#include <string>
#include <vector>

#include "renn/graph.hpp"
#include "renn/tensor.hpp"

namespace renn {

// One LSTM direction: input/forget/output gates and the cell candidate.
struct LstmDirParams {
  Tensor* Wi = nullptr; Tensor* Ui = nullptr; Tensor* bi = nullptr;
  Tensor* Wf = nullptr; Tensor* Uf = nullptr; Tensor* bf = nullptr;
  Tensor* Wo = nullptr; Tensor* Uo = nullptr; Tensor* bo = nullptr;
  Tensor* Wg = nullptr; Tensor* Ug = nullptr; Tensor* bg = nullptr;
};

// Bidirectional recurrent encoder. Output per token is the concatenation of
// the forward state and the backward state, width 2*hidden.
struct EncoderParams {
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  LstmDirParams fwd, bwd;

  // Creates and initializes all tensors inside `params` under `prefix.`.
  // Matrices are Glorot-uniform, biases zero except the forget gate at 1.0.
  void create(ParamMap& params, const std::string& prefix, std::size_t in,
              std::size_t h, std::mt19937_64& rng);
};

std::vector<Var> encoder_forward(Graph& g, const EncoderParams& enc,
                                 const std::vector<Var>& xs);

// Value-level helpers (no graph), used by metrics and tests.
std::vector<double> softmax_values(const std::vector<double>& logits);
double cross_entropy(const std::vector<double>& probs, std::size_t gold);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every tensor in a ParamMap. step() consumes and
// zeroes the accumulated gradients; non-finite gradients raise an error.
class Adam {
 public:
  explicit Adam(ParamMap& params, AdamConfig cfg = {});

  void step();
  void scale_grads(double k);
  double clip_global_norm(double max_norm);  // returns the pre-clip norm
  std::size_t steps() const { return t_; }

 private:
  ParamMap& params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

// Central-difference gradient check. `loss_fn(with_grad)` must rebuild the
// same deterministic computation on every call; when with_grad is true it
// must also accumulate analytic gradients into `params`. Returns the max
// relative error over the checked coordinates (all coordinates when
// max_coords_per_tensor is 0, otherwise a seeded sample per tensor).
double grad_check(const std::function<double(bool)>& loss_fn, ParamMap& params,
                  double eps = 1e-5, std::size_t max_coords_per_tensor = 0,
                  std::uint64_t sample_seed = 0);

}  // namespace renn
