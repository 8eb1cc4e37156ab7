// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

class Rng;

/// Ordered, named collection of trainable leaves. Order is registration order
/// and is what checkpoints and optimizers iterate over.
class ParamSet {
 public:
  Tensor& add(std::string name, Tensor value);
  /// Appends every entry of `other` with `prefix` prepended to its name.
  void extend(const std::string& prefix, const ParamSet& other);

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  Tensor& at(std::size_t i) { return entries_[i].second; }
  const Tensor& at(std::size_t i) const { return entries_[i].second; }
  const Tensor* find(const std::string& name) const;

  std::int64_t numel() const;
  void zero_grad();
  bool all_finite() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Normal(0, gain² / fan_in) leaf.
Tensor init_fan_in_normal(const Shape& shape, std::int64_t fan_in, double gain, Rng& rng,
                          DType dtype);
Tensor init_uniform(const Shape& shape, double bound, Rng& rng, DType dtype);

}  // namespace vgan
