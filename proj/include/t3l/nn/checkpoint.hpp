// Copyright 2026 The T3L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Binary checkpoint layout (little-endian):
//   8 bytes   magic "T3LCKPT\0"
//   u32       format version
//   u64       header length in bytes
//   header    UTF-8 JSON: kind, free-form metadata, per-parameter
//             {name, shape, frozen}, optional optimizer {step, slots}
//   payload   f64 values of every parameter in header order (row-major),
//             then first and second moments of every optimizer slot

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "t3l/nn/optim.hpp"
#include "t3l/nn/parameter.hpp"

namespace t3l::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string kind;
  nlohmann::json metadata;
  ParameterSet params;
  std::optional<AdamWState> optimizer;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::json& metadata, const ParameterSet& params,
                     const AdamWState* optimizer = nullptr);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies values and frozen flags into `params`; every name and shape must
// match exactly.
void restore_parameters(ParameterSet& params, const ParameterSet& saved);

}  // namespace t3l::nn
