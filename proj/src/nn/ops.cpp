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

#include "t3l/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "t3l/error.hpp"
#include "t3l/kernels/kernels.hpp"

namespace t3l::nn {
namespace {

const kernels::KernelTable& K() { return kernels::active_kernels(); }

Tape& tape_of(Var a) {
  require(a.tape != nullptr, ErrorCategory::kInvalidArgument, "op on a detached Var");
  return *a.tape;
}

void same_tape(Var a, Var b, const char* op) {
  require(a.tape == b.tape, ErrorCategory::kInvalidArgument,
          std::string(op) + ": operands recorded on different tapes");
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  fail(ErrorCategory::kShapeMismatch, std::string(op) + ": shape mismatch " +
                                          shape_string(a.shape()) + " vs " +
                                          shape_string(b.shape()));
}

void add_into(Tensor& dst, const Tensor& src) {
  K().axpy(src.size(), 1.0, src.data(), dst.data());
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) mismatch("matmul", av, bv);
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out = Tensor::matrix(m, n);
  K().gemm_nn(m, n, k, av.data(), bv.data(), out.data(), false);
  return tape_of(a).record(
      std::move(out), a.requires_grad() || b.requires_grad(),
      [a, b, m, k, n](Tape& t, const Tensor& g, const Tensor&) {
        if (a.requires_grad()) {
          K().gemm_nt(m, k, n, g.data(), b.value().data(), t.grad_buffer(a).data(), true);
        }
        if (b.requires_grad()) {
          K().gemm_tn(k, n, m, a.value().data(), g.data(), t.grad_buffer(b).data(), true);
        }
      });
}

Var matmul_nt(Var a, Var b) {
  same_tape(a, b, "matmul_nt");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) mismatch("matmul_nt", av, bv);
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  Tensor out = Tensor::matrix(m, n);
  K().gemm_nt(m, n, k, av.data(), bv.data(), out.data(), false);
  return tape_of(a).record(
      std::move(out), a.requires_grad() || b.requires_grad(),
      [a, b, m, k, n](Tape& t, const Tensor& g, const Tensor&) {
        if (a.requires_grad()) {
          K().gemm_nn(m, k, n, g.data(), b.value().data(), t.grad_buffer(a).data(), true);
        }
        if (b.requires_grad()) {
          K().gemm_tn(n, k, m, g.data(), a.value().data(), t.grad_buffer(b).data(), true);
        }
      });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) mismatch("add", av, bv);
  Tensor out = av;
  add_into(out, bv);
  return tape_of(a).record(std::move(out), a.requires_grad() || b.requires_grad(),
                           [a, b](Tape& t, const Tensor& g, const Tensor&) {
                             if (a.requires_grad()) add_into(t.grad_buffer(a), g);
                             if (b.requires_grad()) add_into(t.grad_buffer(b), g);
                           });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) mismatch("mul", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape_of(a).record(std::move(out), a.requires_grad() || b.requires_grad(),
                           [a, b](Tape& t, const Tensor& g, const Tensor&) {
                             const Tensor& av = a.value();
                             const Tensor& bv = b.value();
                             if (a.requires_grad()) {
                               Tensor& ga = t.grad_buffer(a);
                               for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                             }
                             if (b.requires_grad()) {
                               Tensor& gb = t.grad_buffer(b);
                               for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                             }
                           });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  return tape_of(a).record(std::move(out), a.requires_grad(),
                           [a, factor](Tape& t, const Tensor& g, const Tensor&) {
                             K().axpy(g.size(), factor, g.data(), t.grad_buffer(a).data());
                           });
}

Var linear(Var x, Var w, Var bias) {
  same_tape(x, w, "linear");
  same_tape(x, bias, "linear");
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = bias.value();
  if (xv.cols() != wv.rows()) mismatch("linear", xv, wv);
  if (bv.size() != wv.cols()) mismatch("linear bias", wv, bv);
  const std::size_t r = xv.rows(), in = xv.cols(), out_dim = wv.cols();
  Tensor out = Tensor::matrix(r, out_dim);
  K().gemm_nn(r, out_dim, in, xv.data(), wv.data(), out.data(), false);
  for (std::size_t i = 0; i < r; ++i) {
    K().axpy(out_dim, 1.0, bv.data(), out.data() + i * out_dim);
  }
  const bool needs = x.requires_grad() || w.requires_grad() || bias.requires_grad();
  return tape_of(x).record(
      std::move(out), needs, [x, w, bias, r, in, out_dim](Tape& t, const Tensor& g, const Tensor&) {
        if (x.requires_grad()) {
          K().gemm_nt(r, in, out_dim, g.data(), w.value().data(), t.grad_buffer(x).data(), true);
        }
        if (w.requires_grad()) {
          K().gemm_tn(in, out_dim, r, x.value().data(), g.data(), t.grad_buffer(w).data(), true);
        }
        if (bias.requires_grad()) {
          Tensor& gb = t.grad_buffer(bias);
          for (std::size_t i = 0; i < r; ++i) K().axpy(out_dim, 1.0, g.data() + i * out_dim, gb.data());
        }
      });
}

Var gather_rows(Var table, std::span<const std::size_t> ids) {
  const Tensor& tv = table.value();
  const std::size_t d = tv.cols();
  const std::size_t rows = tv.rows();
  Tensor out = Tensor::matrix(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] < rows, ErrorCategory::kOutOfRange,
            "gather_rows: id " + std::to_string(ids[i]) + " >= " + std::to_string(rows) + " rows");
    std::copy_n(tv.data() + ids[i] * d, d, out.data() + i * d);
  }
  std::vector<std::size_t> kept(ids.begin(), ids.end());
  return tape_of(table).record(std::move(out), table.requires_grad(),
                               [table, kept = std::move(kept), d](Tape& t, const Tensor& g, const Tensor&) {
                                 Tensor& gt = t.grad_buffer(table);
                                 for (std::size_t i = 0; i < kept.size(); ++i) {
                                   K().axpy(d, 1.0, g.data() + i * d, gt.data() + kept[i] * d);
                                 }
                               });
}

namespace {

void softmax_rows(const Tensor& x, double temperature, bool causal, Tensor& out) {
  const std::size_t rows = x.rows(), cols = x.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * cols;
    double* y = out.data() + r * cols;
    const std::size_t live = causal ? std::min(cols, r + 1) : cols;
    double mx = in[0] / temperature;
    for (std::size_t c = 1; c < live; ++c) mx = std::max(mx, in[c] / temperature);
    double total = 0.0;
    for (std::size_t c = 0; c < live; ++c) {
      y[c] = std::exp(in[c] / temperature - mx);
      total += y[c];
    }
    for (std::size_t c = 0; c < live; ++c) y[c] /= total;
    for (std::size_t c = live; c < cols; ++c) y[c] = 0.0;
  }
}

}  // namespace

Tensor softmax_values(const Tensor& x, double temperature) {
  require(temperature > 0.0, ErrorCategory::kInvalidArgument, "softmax: temperature must be > 0");
  Tensor out(x.shape());
  softmax_rows(x, temperature, false, out);
  return out;
}

Var softmax(Var x, double temperature, bool causal) {
  require(temperature > 0.0, ErrorCategory::kInvalidArgument, "softmax: temperature must be > 0");
  const Tensor& xv = x.value();
  require(xv.cols() > 0, ErrorCategory::kShapeMismatch, "softmax: empty last axis");
  Tensor out(xv.shape());
  softmax_rows(xv, temperature, causal, out);
  return tape_of(x).record(std::move(out), x.requires_grad(),
                           [x, temperature](Tape& t, const Tensor& g, const Tensor& y) {
                             Tensor& gx = t.grad_buffer(x);
                             const std::size_t rows = y.rows(), cols = y.cols();
                             for (std::size_t r = 0; r < rows; ++r) {
                               const double* yr = y.data() + r * cols;
                               const double* gr = g.data() + r * cols;
                               double inner = 0.0;
                               for (std::size_t c = 0; c < cols; ++c) inner += gr[c] * yr[c];
                               double* out = gx.data() + r * cols;
                               for (std::size_t c = 0; c < cols; ++c) {
                                 out[c] += yr[c] * (gr[c] - inner) / temperature;
                               }
                             }
                           });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  same_tape(x, gamma, "layer_norm");
  same_tape(x, beta, "layer_norm");
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (gamma.value().size() != cols) mismatch("layer_norm gamma", xv, gamma.value());
  if (beta.value().size() != cols) mismatch("layer_norm beta", xv, beta.value());
  Tensor normed(xv.shape());
  std::vector<double> inv_std(rows);
  const double* gv = gamma.value().data();
  const double* bv = beta.value().data();
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += in[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (in[c] - mean) * (in[c] - mean);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (in[c] - mean) * inv_std[r];
      normed.at(r, c) = h;
      out.at(r, c) = h * gv[c] + bv[c];
    }
  }
  const bool needs = x.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  return tape_of(x).record(
      std::move(out), needs,
      [x, gamma, beta, normed = std::move(normed), inv_std = std::move(inv_std)](
          Tape& t, const Tensor& g, const Tensor&) {
        const std::size_t rows = normed.rows(), cols = normed.cols();
        const double* gv = gamma.value().data();
        if (gamma.requires_grad()) {
          Tensor& gg = t.grad_buffer(gamma);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gg[c] += g.at(r, c) * normed.at(r, c);
        }
        if (beta.requires_grad()) {
          Tensor& gb = t.grad_buffer(beta);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gb[c] += g.at(r, c);
        }
        if (x.requires_grad()) {
          Tensor& gx = t.grad_buffer(x);
          std::vector<double> dh(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              dh[c] = g.at(r, c) * gv[c];
              mean_dh += dh[c];
              mean_dh_h += dh[c] * normed.at(r, c);
            }
            mean_dh /= static_cast<double>(cols);
            mean_dh_h /= static_cast<double>(cols);
            for (std::size_t c = 0; c < cols; ++c) {
              gx.at(r, c) += inv_std[r] * (dh[c] - mean_dh - normed.at(r, c) * mean_dh_h);
            }
          }
        }
      });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return tape_of(x).record(std::move(out), x.requires_grad(),
                           [x](Tape& t, const Tensor& g, const Tensor&) {
                             const Tensor& xv = x.value();
                             Tensor& gx = t.grad_buffer(x);
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               if (xv[i] > 0.0) gx[i] += g[i];
                             }
                           });
}

Var gelu(Var x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  Tensor out = x.value();
  for (double& v : out.values()) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  return tape_of(x).record(std::move(out), x.requires_grad(),
                           [x](Tape& t, const Tensor& g, const Tensor&) {
                             constexpr double kInvSqrt2Pi = 0.39894228040143267794;
                             const Tensor& xv = x.value();
                             Tensor& gx = t.grad_buffer(x);
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               const double v = xv[i];
                               const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                               const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                               gx[i] += g[i] * (cdf + v * pdf);
                             }
                           });
}

Var mean_pool(Var x, std::span<const double> mask) {
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  require(mask.size() == rows, ErrorCategory::kShapeMismatch,
          "mean_pool: mask of length " + std::to_string(mask.size()) + " for " +
              shape_string(xv.shape()));
  double count = 0.0;
  for (double m : mask) count += m != 0.0 ? 1.0 : 0.0;
  require(count > 0.0, ErrorCategory::kInvalidArgument, "mean_pool: mask selects no rows");
  Tensor out = Tensor::matrix(1, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (mask[r] == 0.0) continue;
    K().axpy(cols, 1.0, xv.data() + r * cols, out.data());
  }
  for (double& v : out.values()) v /= count;
  std::vector<double> kept(mask.begin(), mask.end());
  return tape_of(x).record(
      std::move(out), x.requires_grad(),
      [x, kept = std::move(kept), count, rows, cols](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& gx = t.grad_buffer(x);
        for (std::size_t r = 0; r < rows; ++r) {
          if (kept[r] == 0.0) continue;
          K().axpy(cols, 1.0 / count, g.data(), gx.data() + r * cols);
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), ErrorCategory::kInvalidArgument, "concat_rows: no inputs");
  const std::size_t cols = parts[0].value().cols();
  std::size_t rows = 0;
  bool needs = false;
  for (const Var& p : parts) {
    same_tape(parts[0], p, "concat_rows");
    if (p.value().cols() != cols) mismatch("concat_rows", parts[0].value(), p.value());
    rows += p.value().rows();
    needs = needs || p.requires_grad();
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy_n(p.value().data(), p.value().size(), out.data() + offset);
    offset += p.value().size();
  }
  std::vector<Var> kept(parts.begin(), parts.end());
  return tape_of(parts[0]).record(std::move(out), needs,
                                  [kept = std::move(kept)](Tape& t, const Tensor& g, const Tensor&) {
                                    std::size_t offset = 0;
                                    for (const Var& p : kept) {
                                      const std::size_t n = p.value().size();
                                      if (p.requires_grad()) {
                                        K().axpy(n, 1.0, g.data() + offset, t.grad_buffer(p).data());
                                      }
                                      offset += n;
                                    }
                                  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), ErrorCategory::kInvalidArgument, "concat_cols: no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::size_t cols = 0;
  bool needs = false;
  for (const Var& p : parts) {
    same_tape(parts[0], p, "concat_cols");
    if (p.value().rows() != rows) mismatch("concat_cols", parts[0].value(), p.value());
    cols += p.value().cols();
    needs = needs || p.requires_grad();
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.value().cols();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(p.value().data() + r * w, w, out.data() + r * cols + offset);
    }
    offset += w;
  }
  std::vector<Var> kept(parts.begin(), parts.end());
  return tape_of(parts[0]).record(
      std::move(out), needs, [kept = std::move(kept), rows, cols](Tape& t, const Tensor& g, const Tensor&) {
        std::size_t offset = 0;
        for (const Var& p : kept) {
          const std::size_t w = p.value().cols();
          if (p.requires_grad()) {
            Tensor& gp = t.grad_buffer(p);
            for (std::size_t r = 0; r < rows; ++r) {
              K().axpy(w, 1.0, g.data() + r * cols + offset, gp.data() + r * w);
            }
          }
          offset += w;
        }
      });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  require(begin + count <= cols, ErrorCategory::kShapeMismatch,
          "slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
              ") outside " + shape_string(xv.shape()));
  Tensor out = Tensor::matrix(rows, count);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data() + r * cols + begin, count, out.data() + r * count);
  }
  return tape_of(x).record(std::move(out), x.requires_grad(),
                           [x, begin, count, rows, cols](Tape& t, const Tensor& g, const Tensor&) {
                             Tensor& gx = t.grad_buffer(x);
                             for (std::size_t r = 0; r < rows; ++r) {
                               K().axpy(count, 1.0, g.data() + r * count, gx.data() + r * cols + begin);
                             }
                           });
}

Var dropout(Var x, double rate, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, ErrorCategory::kInvalidArgument, "dropout: rate must be in [0,1)");
  if (rate == 0.0) return x;
  Tensor mask(x.value().shape());
  std::bernoulli_distribution keep(1.0 - rate);
  for (double& m : mask.values()) m = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
  return mul(x, tape_of(x).constant(std::move(mask)));
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape_of(x).record(Tensor::matrix(1, 1, total), x.requires_grad(),
                           [x](Tape& t, const Tensor& g, const Tensor&) {
                             Tensor& gx = t.grad_buffer(x);
                             for (double& v : gx.values()) v += g[0];
                           });
}

Var cross_entropy(Var logits, std::span<const std::size_t> targets) {
  const Tensor& lv = logits.value();
  const std::size_t rows = lv.rows(), cols = lv.cols();
  require(targets.size() == rows, ErrorCategory::kShapeMismatch,
          "cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
              shape_string(lv.shape()));
  Tensor probs(lv.shape());
  softmax_rows(lv, 1.0, false, probs);
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    require(targets[r] < cols, ErrorCategory::kOutOfRange,
            "cross_entropy: target " + std::to_string(targets[r]) + " outside [0, " +
                std::to_string(cols) + ")");
    const double* row = lv.data() + r * cols;
    double mx = row[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(row[c] - mx);
    loss += mx + std::log(total) - row[targets[r]];
  }
  loss /= static_cast<double>(rows);
  std::vector<std::size_t> kept(targets.begin(), targets.end());
  return tape_of(logits).record(
      Tensor::matrix(1, 1, loss), logits.requires_grad(),
      [logits, probs = std::move(probs), kept = std::move(kept)](Tape& t, const Tensor& g, const Tensor&) {
        Tensor& gl = t.grad_buffer(logits);
        const std::size_t rows = probs.rows(), cols = probs.cols();
        const double s = g[0] / static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            const double onehot = c == kept[r] ? 1.0 : 0.0;
            gl.at(r, c) += s * (probs.at(r, c) - onehot);
          }
        }
      });
}

Var binary_cross_entropy(Var logits, std::span<const double> targets) {
  const Tensor& lv = logits.value();
  require(lv.size() >= 1, ErrorCategory::kShapeMismatch, "binary_cross_entropy: no labels");
  require(targets.size() == lv.size(), ErrorCategory::kShapeMismatch,
          "binary_cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
              shape_string(lv.shape()));
  double loss = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double t = targets[i];
    require(t == 0.0 || t == 1.0, ErrorCategory::kInvalidArgument,
            "binary_cross_entropy: target " + std::to_string(t) + " is not 0 or 1");
    const double z = lv[i];
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  const double n = static_cast<double>(lv.size());
  std::vector<double> kept(targets.begin(), targets.end());
  return tape_of(logits).record(Tensor::matrix(1, 1, loss / n), logits.requires_grad(),
                                [logits, kept = std::move(kept), n](Tape& t, const Tensor& g, const Tensor&) {
                                  const Tensor& lv = logits.value();
                                  Tensor& gl = t.grad_buffer(logits);
                                  for (std::size_t i = 0; i < lv.size(); ++i) {
                                    const double sig = 1.0 / (1.0 + std::exp(-lv[i]));
                                    gl[i] += g[0] * (sig - kept[i]) / n;
                                  }
                                });
}

}  // namespace t3l::nn
