// tinyasr/grad_check.hpp

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

#ifndef TINYASR_GRAD_CHECK_HPP_
#define TINYASR_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tinyasr/param_store.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t within_floor = 0;  // coords settled by the absolute floor
};

// Central-difference check of hand-derived gradients.
//
// loss_fn must compute a scalar loss AND accumulate d(loss)/d(param) into the
// store's gradient buffers (they are zeroed before each call).  Every sampled
// scalar parameter w is perturbed to w +/- epsilon and the analytic gradient
// is compared with (loss(w+eps) - loss(w-eps)) / (2 eps) using
// rel = |a - n| / max(|a|, |n|, 1e-8).
//
// Central differences cannot resolve |a - n| below roughly
// machine_eps * |loss| / epsilon, so near-zero gradients drown in roundoff
// even when they are exactly right.  abs_floor > 0 accepts any coordinate
// whose absolute disagreement is at most that floor without consulting the
// relative error; leave it at 0 for strict relative checking.
inline GradCheckReport grad_check(
    const std::function<double(ParamStore&)>& loss_fn, ParamStore& params,
    double epsilon, std::size_t sample, std::uint64_t seed = 1234,
    double abs_floor = 0.0) {
  if (epsilon <= 0.0) throw UsageError("grad_check: epsilon must be > 0");

  params.zero_grads();
  double base = loss_fn(params);
  std::map<std::string, Matrix> analytic;
  for (const auto& [name, e] : params.entries()) analytic[name] = e.grad;

  params.zero_grads();
  double base2 = loss_fn(params);
  if (base != base2)
    throw UsageError("grad_check: loss_fn is not deterministic");

  // Flat index of every scalar parameter.
  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& [name, e] : params.entries())
    for (std::size_t i = 0; i < e.value.size(); ++i) coords.emplace_back(name, i);

  if (sample > 0 && sample < coords.size()) {
    Rng rng(seed);
    for (std::size_t i = 0; i < sample; ++i) {
      std::size_t j = i + rng.next_u64() % (coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(sample);
  }

  GradCheckReport report;
  for (const auto& [name, idx] : coords) {
    double* w = params.value(name).data() + idx;
    double saved = *w;
    *w = saved + epsilon;
    params.zero_grads();
    double up = loss_fn(params);
    *w = saved - epsilon;
    params.zero_grads();
    double down = loss_fn(params);
    *w = saved;

    double numeric = (up - down) / (2.0 * epsilon);
    double a = analytic[name].data()[idx];
    ++report.checked;
    if (abs_floor > 0.0 && std::abs(a - numeric) <= abs_floor) {
      ++report.within_floor;
      continue;
    }
    double rel = std::abs(a - numeric) /
                 std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = name;
      report.worst_index = idx;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
  }
  params.zero_grads();
  return report;
}

}  // namespace tinyasr

#endif  // TINYASR_GRAD_CHECK_HPP_
