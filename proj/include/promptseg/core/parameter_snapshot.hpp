// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Content digests of named parameter sets. Used to prove that frozen modules
// stay frozen and that trainable ones actually moved.
//
// Each entry is hashed (SHA-256) over its values serialized as little-endian
// float32 in row-major order. The global digest hashes the entries sorted by
// name, so it does not depend on registration order.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/types.h>

namespace torch::nn {
class Module;
}

namespace promptseg {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

struct ParameterEntry {
  std::string name;
  std::vector<int64_t> shape;
  std::string checksum;  // hex SHA-256

  bool operator==(const ParameterEntry&) const = default;
};

struct ParameterSnapshot {
  std::vector<ParameterEntry> entries;  // sorted by (name, checksum)
  std::string global_checksum;

  bool operator==(const ParameterSnapshot& other) const {
    return global_checksum == other.global_checksum;
  }

  nlohmann::json to_json() const;
  static ParameterSnapshot from_json(const nlohmann::json& j);
};

enum class SnapshotScope { kParameters, kParametersAndBuffers };

ParameterSnapshot snapshot_parameters(const NamedTensors& params);
ParameterSnapshot snapshot_parameters(const torch::nn::Module& module,
                                      SnapshotScope scope = SnapshotScope::kParameters);

/// Hex SHA-256 of a tensor's canonical float32 little-endian serialization.
std::string tensor_checksum(const torch::Tensor& t);

/// Hex SHA-256 of an arbitrary byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace promptseg
