// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/diffcore/tape.hpp"

#include <unordered_map>

#include "vgan/diffcore/ops.hpp"

namespace vgan {

namespace {

thread_local Tape* t_active = nullptr;
thread_local bool t_enabled = true;
bool g_checked = false;

}  // namespace

TapeScope::TapeScope(Tape& tape) : previous_(t_active), previous_enabled_(t_enabled) {
  t_active = &tape;
  t_enabled = true;
}

TapeScope::~TapeScope() {
  t_active = previous_;
  t_enabled = previous_enabled_;
}

NoGradScope::NoGradScope() : previous_(t_enabled) { t_enabled = false; }
NoGradScope::~NoGradScope() { t_enabled = previous_; }

Tape* active_tape() { return t_active; }
bool recording_enabled() { return t_active != nullptr && t_enabled; }

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!recording_enabled()) return false;
  for (const Tensor* t : inputs)
    if (t && t->requires_grad()) return true;
  return false;
}

bool should_record(std::span<const Tensor> inputs) {
  if (!recording_enabled()) return false;
  for (const Tensor& t : inputs)
    if (t.requires_grad()) return true;
  return false;
}

void record(const char* name, std::vector<Tensor> inputs, Tensor& out, Node::BackwardFn fn) {
  out.mark_recorded();
  t_active->record(std::make_shared<Node>(name, std::move(inputs), out.id(), std::move(fn)));
}

void set_checked_mode(bool on) { g_checked = on; }
bool checked_mode() { return g_checked; }

namespace {

struct ReverseResult {
  std::unordered_map<std::uint64_t, Tensor> grads;
  std::unordered_map<std::uint64_t, Tensor> leaves;
};

ReverseResult reverse_pass(Tape& tape, const Tensor& output, bool create_graph,
                           const std::unordered_map<std::uint64_t, bool>& keep) {
  if (output.numel() != 1)
    throw ShapeError("backward requires a scalar loss, got shape " + shape_str(output.shape()));
  ReverseResult r;
  r.grads.emplace(output.id(), Tensor::ones(output.shape(), output.dtype()));
  if (output.is_leaf() && output.requires_grad()) r.leaves.emplace(output.id(), output);

  const std::size_t n = tape.size();
  for (std::size_t i = n; i-- > 0;) {
    const Node& node = tape.node(i);
    auto it = r.grads.find(node.output_id());
    if (it == r.grads.end()) continue;
    Tensor g = it->second;
    if (!keep.contains(node.output_id())) r.grads.erase(it);

    std::vector<Tensor> input_grads;
    if (create_graph) {
      TapeScope scope(tape);
      input_grads = node.backward(g);
    } else {
      NoGradScope scope;
      input_grads = node.backward(g);
    }
    const auto& inputs = node.inputs();
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      const Tensor& in = inputs[j];
      if (!in.requires_grad() || j >= input_grads.size() || !input_grads[j].defined()) continue;
      const Tensor& gi = input_grads[j];
      if (gi.shape() != in.shape())
        throw ShapeError(std::string("backward of ") + node.name() + " produced gradient " +
                         shape_str(gi.shape()) + " for input " + shape_str(in.shape()));
      auto [slot, inserted] = r.grads.try_emplace(in.id(), gi);
      if (!inserted) {
        if (create_graph) {
          TapeScope scope(tape);
          slot->second = add(slot->second, gi);
        } else {
          NoGradScope scope;
          slot->second = add(slot->second, gi);
        }
      }
      if (in.is_leaf()) r.leaves.try_emplace(in.id(), in);
    }
  }
  return r;
}

}  // namespace

void backward(Tape& tape, const Tensor& loss, bool create_graph) {
  std::unordered_map<std::uint64_t, bool> keep;
  auto r = reverse_pass(tape, loss, create_graph, keep);
  NoGradScope scope;
  for (auto& [id, leaf] : r.leaves) {
    auto git = r.grads.find(id);
    if (git == r.grads.end()) continue;
    Tensor g = create_graph ? git->second : git->second.detach();
    Tensor existing = leaf.grad();
    Tensor leaf_copy = leaf;
    leaf_copy.set_grad(existing.defined() ? add(existing, g) : g);
  }
}

std::vector<Tensor> grad(Tape& tape, const Tensor& output, std::span<const Tensor> inputs,
                         bool create_graph) {
  std::unordered_map<std::uint64_t, bool> keep;
  for (const Tensor& t : inputs) keep.emplace(t.id(), true);
  auto r = reverse_pass(tape, output, create_graph, keep);
  std::vector<Tensor> out;
  out.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    auto it = r.grads.find(t.id());
    out.push_back(it != r.grads.end() ? it->second : Tensor::zeros(t.shape(), t.dtype()));
  }
  return out;
}

}  // namespace vgan
