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

#include "t3l/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "t3l/error.hpp"

namespace t3l::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

constexpr char kMagic[8] = {'T', '3', 'L', 'C', 'K', 'P', 'T', '\0'};

void write_values(std::ofstream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor read_values(std::ifstream& in, const Shape& shape, const std::filesystem::path& path) {
  Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  require(in.good(), ErrorCategory::kFormat, "checkpoint " + path.string() + ": truncated payload");
  return t;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const nlohmann::json& metadata, const ParameterSet& params,
                     const AdamWState* optimizer) {
  nlohmann::json header;
  header["format"] = "t3l-checkpoint";
  header["version"] = kCheckpointVersion;
  header["kind"] = kind;
  header["metadata"] = metadata;
  header["parameters"] = nlohmann::json::array();
  for (const Parameter& p : params) {
    header["parameters"].push_back({{"name", p.name}, {"shape", p.value.shape()}, {"frozen", p.frozen}});
  }
  if (optimizer) {
    nlohmann::json slots = nlohmann::json::array();
    for (const MomentState& m : optimizer->moments) {
      slots.push_back({{"name", m.name}, {"shape", m.first.shape()}});
    }
    header["optimizer"] = {{"step", optimizer->step}, {"slots", slots}};
  } else {
    header["optimizer"] = nullptr;
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCategory::kIo, "cannot write checkpoint " + path.string());
  const std::string text = header.dump();
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t length = text.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter& p : params) write_values(out, p.value);
  if (optimizer) {
    for (const MomentState& m : optimizer->moments) {
      write_values(out, m.first);
      write_values(out, m.second);
    }
  }
  require(out.good(), ErrorCategory::kIo, "failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  require(in.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorCategory::kFormat,
          path.string() + " is not a checkpoint");
  require(version == kCheckpointVersion, ErrorCategory::kFormat,
          "checkpoint " + path.string() + " has unsupported version " + std::to_string(version));
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  require(in.good(), ErrorCategory::kFormat, "checkpoint " + path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kFormat, "checkpoint " + path.string() + ": bad header: " + e.what());
  }

  Checkpoint ckpt;
  ckpt.kind = header.at("kind").get<std::string>();
  ckpt.metadata = header.at("metadata");
  std::vector<std::pair<std::string, bool>> names;
  for (const auto& entry : header.at("parameters")) {
    const Shape shape = entry.at("shape").get<Shape>();
    const std::size_t idx = ckpt.params.add(entry.at("name").get<std::string>(), Tensor(shape));
    ckpt.params[idx].frozen = entry.at("frozen").get<bool>();
  }
  for (Parameter& p : ckpt.params) p.value = read_values(in, p.value.shape(), path);
  if (!header.at("optimizer").is_null()) {
    AdamWState state;
    state.step = header["optimizer"].at("step").get<std::size_t>();
    for (const auto& slot : header["optimizer"].at("slots")) {
      const Shape shape = slot.at("shape").get<Shape>();
      MomentState m{slot.at("name").get<std::string>(), Tensor(), Tensor()};
      m.first = read_values(in, shape, path);
      m.second = read_values(in, shape, path);
      state.moments.push_back(std::move(m));
    }
    ckpt.optimizer = std::move(state);
  }
  return ckpt;
}

void restore_parameters(ParameterSet& params, const ParameterSet& saved) {
  require(params.size() == saved.size(), ErrorCategory::kFormat,
          "checkpoint has " + std::to_string(saved.size()) + " parameters, model has " +
              std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].name == saved[i].name, ErrorCategory::kFormat,
            "checkpoint parameter " + std::to_string(i) + " is " + saved[i].name + ", model has " +
                params[i].name);
    check_same_shape(params[i].value, saved[i].value, "restore_parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].value = saved[i].value;
    params[i].frozen = saved[i].frozen;
    params[i].zero_grad();
  }
}

}  // namespace t3l::nn
