#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace renn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense value/gradient pair. Rank 0 (scalar), 1 (vector) or 2 (row-major matrix).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;
  std::vector<double> g;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);

  std::size_t size() const { return v.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t r, std::size_t c) { return v[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols() + c]; }

  void zero_grad();

  static std::size_t count(const std::vector<std::size_t>& dims);
};

// Deterministic RNG helpers. Distribution objects from <random> are not
// guaranteed to produce the same sequence across standard libraries, so all
// randomness in the project goes through these.
double rand_uniform(std::mt19937_64& rng, double lo, double hi);
std::size_t rand_index(std::mt19937_64& rng, std::size_t n);

template <typename T>
void shuffle_vec(std::vector<T>& xs, std::mt19937_64& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) {
    std::size_t j = rand_index(rng, i);
    std::swap(xs[i - 1], xs[j]);
  }
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 1469598103934665603ull);

void glorot_init(Tensor& t, std::mt19937_64& rng);
void uniform_init(Tensor& t, std::mt19937_64& rng, double lo, double hi);
void constant_init(Tensor& t, double value);

// Named parameter collection. Tensors have stable addresses; iteration order
// is creation order, which keeps optimizer state and checkpoints aligned.
class ParamMap {
 public:
  Tensor& create(const std::string& name, std::vector<std::size_t> shape);
  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor*>>& items() const { return ordered_; }
  std::size_t total_values() const;
  void zero_grads();

  // Checkpoint file: JSON {"version":1, "params":{name:{"shape":[...],"values":[...]}}}
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::deque<Tensor> store_;
  std::vector<std::pair<std::string, Tensor*>> ordered_;
  std::unordered_map<std::string, Tensor*> index_;
};

}  // namespace renn
