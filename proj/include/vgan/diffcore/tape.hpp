// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

/// One recorded operation. `backward` maps the gradient of the output to one
/// gradient per input (undefined tensors for inputs that receive nothing).
/// Backward rules are written with ordinary ops, so running them while a tape
/// is active records them too and the result can be differentiated again.
class Node {
 public:
  using BackwardFn = std::function<std::vector<Tensor>(const Tensor&)>;

  Node(const char* name, std::vector<Tensor> inputs, std::uint64_t output_id,
       BackwardFn fn)
      : name_(name),
        inputs_(std::move(inputs)),
        output_id_(output_id),
        fn_(std::move(fn)) {}

  const char* name() const { return name_; }
  const std::vector<Tensor>& inputs() const { return inputs_; }
  std::uint64_t output_id() const { return output_id_; }
  std::vector<Tensor> backward(const Tensor& grad_out) const {
    return fn_(grad_out);
  }

 private:
  const char* name_;
  std::vector<Tensor> inputs_;
  std::uint64_t output_id_;
  BackwardFn fn_;
};

/// Ordered record of executed operations. Nodes are appended in execution
/// order, so the sequence is always topologically sorted.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::shared_ptr<const Node> node) {
    nodes_.push_back(std::move(node));
  }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return *nodes_[i]; }
  void clear() { nodes_.clear(); }

 private:
  std::vector<std::shared_ptr<const Node>> nodes_;
};

/// Makes `tape` the recording target on the calling thread for the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
  bool previous_enabled_;
};

/// Suspends recording on the calling thread for the scope.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  bool previous_;
};

Tape* active_tape();
bool recording_enabled();

/// True when an op on these inputs must be recorded.
bool should_record(std::initializer_list<const Tensor*> inputs);
bool should_record(std::span<const Tensor> inputs);

/// Records `fn` as the backward rule of `out`, marking `out` as non-leaf.
void record(const char* name, std::vector<Tensor> inputs, Tensor& out,
            Node::BackwardFn fn);

/// Reverse pass from a scalar `loss`; gradients are accumulated into the
/// `grad()` of every reachable leaf that requires grad.
void backward(Tape& tape, const Tensor& loss, bool create_graph = false);

/// Gradients of a scalar `output` with respect to `inputs` without touching
/// leaf `grad()` buffers. With `create_graph` the backward ops are recorded
/// on `tape`, so the returned gradients are themselves differentiable.
std::vector<Tensor> grad(Tape& tape, const Tensor& output,
                         std::span<const Tensor> inputs,
                         bool create_graph = false);

/// When enabled, every op verifies its output is finite whenever its inputs
/// are, throwing NumericError otherwise.
void set_checked_mode(bool on);
bool checked_mode();

}  // namespace vgan
