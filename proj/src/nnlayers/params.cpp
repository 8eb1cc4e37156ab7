// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/nnlayers/params.hpp"

#include <cmath>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"

namespace vgan {

Tensor& ParamSet::add(std::string name, Tensor value) {
  for (const auto& e : entries_)
    if (e.first == name) throw Error("duplicate parameter name '" + name + "'");
  if (!value.requires_grad()) value.requires_grad_();
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

void ParamSet::extend(const std::string& prefix, const ParamSet& other) {
  for (const auto& [n, t] : other) add(prefix + n, t);
}

const Tensor* ParamSet::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return &e.second;
  return nullptr;
}

std::int64_t ParamSet::numel() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

bool ParamSet::all_finite() const {
  for (const auto& e : entries_)
    if (!vgan::all_finite(e.second)) return false;
  return true;
}

Tensor init_fan_in_normal(const Shape& shape, std::int64_t fan_in, double gain, Rng& rng,
                          DType dtype) {
  return randn(shape, rng, gain / std::sqrt(static_cast<double>(fan_in)), dtype);
}

Tensor init_uniform(const Shape& shape, double bound, Rng& rng, DType dtype) {
  return rand_uniform(shape, rng, -bound, bound, dtype);
}

}  // namespace vgan
