#include "renn/tensor.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace renn {

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
  v.assign(count(shape), 0.0);
  g.assign(v.size(), 0.0);
}

std::size_t Tensor::rows() const { return shape.empty() ? 1 : shape[0]; }

std::size_t Tensor::cols() const { return shape.size() < 2 ? 1 : shape[1]; }

void Tensor::zero_grad() { g.assign(v.size(), 0.0); }

std::size_t Tensor::count(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

double rand_uniform(std::mt19937_64& rng, double lo, double hi) {
  // 53-bit mantissa, uniform in [0,1)
  double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return lo + (hi - lo) * u;
}

std::size_t rand_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw Error("rand_index: empty range");
  return static_cast<std::size_t>(rng() % n);
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void glorot_init(Tensor& t, std::mt19937_64& rng) {
  double fan_in = static_cast<double>(t.cols());
  double fan_out = static_cast<double>(t.rows());
  double lim = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& x : t.v) x = rand_uniform(rng, -lim, lim);
}

void uniform_init(Tensor& t, std::mt19937_64& rng, double lo, double hi) {
  for (double& x : t.v) x = rand_uniform(rng, lo, hi);
}

void constant_init(Tensor& t, double value) {
  for (double& x : t.v) x = value;
}

Tensor& ParamMap::create(const std::string& name, std::vector<std::size_t> shape) {
  if (index_.count(name)) throw Error("ParamMap: duplicate parameter '" + name + "'");
  store_.emplace_back(std::move(shape));
  Tensor* t = &store_.back();
  ordered_.emplace_back(name, t);
  index_.emplace(name, t);
  return *t;
}

Tensor* ParamMap::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

const Tensor* ParamMap::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

std::size_t ParamMap::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : ordered_) n += t->size();
  return n;
}

void ParamMap::zero_grads() {
  for (auto& [name, t] : ordered_) t->zero_grad();
}

void ParamMap::save(const std::string& path) const {
  nlohmann::json j;
  j["version"] = 1;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, t] : ordered_) {
    params[name] = {{"shape", t->shape}, {"values", t->v}};
  }
  j["params"] = params;
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

void ParamMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error("checkpoint parse error in " + path + ": " + e.what());
  }
  if (!j.contains("version")) throw Error("checkpoint missing version field: " + path);
  if (j["version"].get<int>() != 1)
    throw Error("unsupported checkpoint version in " + path);
  const auto& params = j.at("params");
  for (auto& [name, t] : ordered_) {
    if (!params.contains(name)) throw Error("checkpoint missing parameter '" + name + "'");
    const auto& entry = params.at(name);
    auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape != t->shape) throw Error("checkpoint shape mismatch for '" + name + "'");
    auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != t->size()) throw Error("checkpoint size mismatch for '" + name + "'");
    t->v = std::move(values);
    t->zero_grad();
  }
}

}  // namespace renn
