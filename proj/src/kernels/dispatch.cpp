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

#include <cstdlib>
#include <string>

#include "t3l/kernels/kernels.hpp"

namespace t3l::kernels {

#if defined(T3L_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(T3L_HAVE_AVX2_KERNELS)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* default_table() {
  if (const char* forced = std::getenv("T3L_KERNELS")) {
    if (std::string(forced) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* simd = avx2_kernels()) return simd;
  return &scalar_kernels();
}

const KernelTable*& current() {
  static const KernelTable* table = default_table();
  return table;
}

}  // namespace

const KernelTable& active_kernels() { return *current(); }

bool select_kernels(std::string_view name) {
  if (name == "scalar") {
    current() = &scalar_kernels();
    return true;
  }
  if (name == "avx2" && avx2_kernels() != nullptr) {
    current() = avx2_kernels();
    return true;
  }
  return false;
}

}  // namespace t3l::kernels
