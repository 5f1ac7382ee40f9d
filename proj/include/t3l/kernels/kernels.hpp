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

// Dense double-precision kernels used by the autodiff primitives.
//
// Every kernel exists as a portable scalar reference and, where the CPU
// supports it, an AVX2+FMA variant. The active table is chosen once at
// startup (override with T3L_KERNELS=scalar|avx2).
//
// All matrices are row-major and contiguous. Each output element of the gemm
// family is reduced over the inner dimension in increasing index order, so a
// given row of the output depends only on the matching rows of the inputs.
// The decoder relies on this: running it on a prefix reproduces the prefix
// rows of a full pass bit for bit.

#include <cstddef>
#include <string_view>

namespace t3l::kernels {

struct KernelTable {
  std::string_view name;

  // c[m,n] (+)= a[m,k] * b[k,n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // c[m,n] (+)= a[m,k] * b[n,k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // c[m,n] (+)= a[k,m]^T * b[k,n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// The table used by the nn primitives.
const KernelTable& active_kernels();

// Forces a table by name ("scalar" or "avx2"); returns false if unavailable.
bool select_kernels(std::string_view name);

}  // namespace t3l::kernels
