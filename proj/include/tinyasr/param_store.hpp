// tinyasr/param_store.hpp

// Copyright 2026  tinyasr contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TINYASR_PARAM_STORE_HPP_
#define TINYASR_PARAM_STORE_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "tinyasr/common.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

// Named dense parameter tensors, each paired with a gradient buffer of the
// same shape.  std::map keeps iteration order name-sorted, which makes
// initialization, updates and checkpoint layout deterministic.
class ParamStore {
 public:
  struct Entry {
    Matrix value;
    Matrix grad;
  };

  std::uint64_t rng_seed = 0;

  Matrix& add(const std::string& name, std::size_t rows, std::size_t cols) {
    if (entries_.count(name))
      throw UsageError("ParamStore: duplicate tensor name '" + name + "'");
    Entry e;
    e.value = Matrix(rows, cols);
    e.grad = Matrix(rows, cols);
    auto [it, ok] = entries_.emplace(name, std::move(e));
    (void)ok;
    return it->second.value;
  }

  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  Entry& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw UsageError("ParamStore: unknown tensor '" + name + "'");
    return it->second;
  }
  const Entry& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw UsageError("ParamStore: unknown tensor '" + name + "'");
    return it->second;
  }

  Matrix& value(const std::string& name) { return at(name).value; }
  Matrix& grad(const std::string& name) { return at(name).grad; }
  const Matrix& value(const std::string& name) const { return at(name).value; }
  const Matrix& grad(const std::string& name) const { return at(name).grad; }

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  void zero_grads() {
    for (auto& [name, e] : entries_) e.grad.fill(0.0);
  }

  std::size_t tensor_count() const { return entries_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, e] : entries_) n += e.value.size();
    return n;
  }

  // Weight matrices: uniform in [-r, r] with r = 1/sqrt(fan_in), fan_in
  // being the column count.  Column vectors (biases) start at zero.
  void init_uniform_scaled(std::uint64_t seed) {
    rng_seed = seed;
    Rng rng(seed);
    for (auto& [name, e] : entries_) {
      if (e.value.cols() == 1) {
        e.value.fill(0.0);
        continue;
      }
      double r = 1.0 / std::sqrt(static_cast<double>(e.value.cols()));
      double* p = e.value.data();
      for (std::size_t i = 0; i < e.value.size(); ++i)
        p[i] = rng.uniform(-r, r);
    }
  }

 private:
  std::map<std::string, Entry> entries_;
};

// tensor <- tensor - lr * grad for every entry, then zero the grads.
// Non-finite gradients abort with the offending tensor's name.
inline void sgd_step(ParamStore& params, double learning_rate) {
  if (learning_rate <= 0.0)
    throw UsageError("sgd_step: learning_rate must be > 0");
  for (auto& [name, e] : params.entries()) {
    if (!e.grad.all_finite())
      throw NumericError("sgd_step: non-finite gradient in '" + name + "'");
    double* v = e.value.data();
    const double* g = e.grad.data();
    for (std::size_t i = 0; i < e.value.size(); ++i)
      v[i] -= learning_rate * g[i];
    e.grad.fill(0.0);
  }
}

}  // namespace tinyasr

#endif  // TINYASR_PARAM_STORE_HPP_
