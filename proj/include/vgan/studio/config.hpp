// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "vgan/dataio/dataset.hpp"
#include "vgan/trainer/trainer.hpp"

namespace vgan {

/// Everything a training or evaluation run needs, as read from a config file.
struct RunConfig {
  DatasetSpec dataset;
  int synthetic_count = 2000;
  std::uint64_t synthetic_seed = 0;
  TrainConfig train;
  std::string out_dir = "run";
  std::uint64_t checkpoint_every = 1000;
  std::uint64_t sample_every = 500;

  /// Throws vgan::Error naming the offending key.
  void validate() const;
  SyntheticSceneConfig synthetic() const;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic over numbers and `pi` with + − * / and parentheses.
double evaluate_expression(const std::string& text);

/// Flat "key = value" lines grouped under [section] headers; '#' starts a
/// comment. Keys not given keep their defaults; unknown keys are rejected.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::string& path);
/// Emits every key, numbers in %.17g, so that parse(serialize(c)) == c.
std::string serialize_run_config(const RunConfig& cfg);
bool operator==(const RunConfig& a, const RunConfig& b);

std::vector<std::string> preset_names();
/// Config text of a named preset ("celeba", "cat", "carla", "ffhq", "compcars",
/// "bedroom", "desk").
std::string preset_text(const std::string& name);
RunConfig preset(const std::string& name);

}  // namespace vgan
