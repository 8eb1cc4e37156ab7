// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct CheckpointState {
  std::uint64_t config_hash = 0;
  std::vector<NamedTensor> params;     // "G.<name>", "D.<name>"
  std::vector<NamedTensor> optimizer;  // f64 moments, "G.m.<name>", "G.v.<name>", ...
  std::uint64_t g_opt_steps = 0;
  std::uint64_t d_opt_steps = 0;
  std::uint64_t step = 0;
  std::uint64_t images_shown = 0;
  std::uint64_t growth_events = 0;
  std::vector<std::pair<std::string, std::string>> rng_states;

  const Tensor* param(const std::string& name) const;
};

enum class CheckpointErrc { io = 1, format, version, truncated, crc, hash };

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrc code, const std::string& what) : Error(what), code_(code) {}
  CheckpointErrc code() const { return code_; }

 private:
  CheckpointErrc code_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const CheckpointState& state, const std::string& path);
/// With `expected_hash` nonzero, a different stored hash raises CheckpointErrc::hash.
CheckpointState load_checkpoint(const std::string& path, std::uint64_t expected_hash = 0);

}  // namespace vgan
