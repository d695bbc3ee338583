// Copyright 2026 The ConvLab Authors.
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

#include "convlab/conv_im2win.hpp"

#include <algorithm>
#include <stdexcept>

#include "convlab/error.hpp"
#include "kernels.hpp"
#include "parallel.hpp"

namespace convlab {

MicroKernelPlan MicroKernelPlan::for_layout(Layout base, std::size_t w_ob) {
  return {w_ob, kVecLanes, is_batch_minor(base) ? VecDim::Batch : VecDim::WindowRun};
}

RunGeometry RunGeometry::for_window(const ConvProblem& p, Layout base) {
  const std::size_t window = p.w_f * p.h_f;
  switch (base) {
    case Layout::NHWC:
      return {1, window * p.c_i, 0, 0, p.s * p.h_f * p.c_i};
    case Layout::NCHW:
      return {p.c_i, window, p.h_o * p.w_i * p.h_f, window, p.s * p.h_f};
    case Layout::CHWN:
    case Layout::CHWN8:
      break;
  }
  throw UnsupportedLayout("batch-minor window rows are not reduced as contiguous runs");
}

void dot_product_block(const float* window, const float* filter, const RunGeometry& g,
                       std::span<float> out) {
  if (out.empty() || out.size() > kMaxRegisterBlock)
    throw std::invalid_argument("register block must hold 1..8 outputs");
  detail::run_kernel(out.size())(window, filter, g, out.data(), 1);
}

namespace {

void check_pair(const Im2winTensor& window, const PermutedFilter& filter) {
  const ConvProblem& p = window.problem;
  const Dims& f = filter.dims();
  if (f.c != p.c_i || f.h != p.h_f || f.w != p.w_f)
    throw ShapeMismatch("permuted filter does not match the window-row geometry");
  const bool same_family = is_batch_minor(filter.base()) == is_batch_minor(window.layout()) &&
                           (is_batch_minor(filter.base()) || filter.base() == window.layout());
  if (!same_family) throw ShapeMismatch("permuted filter order does not match the window-row layout");
}

}  // namespace

Tensor conv_im2win_naive(const Tensor& input, const Tensor& filter, std::size_t s) {
  const ConvProblem p = ConvProblem::from(input, filter, s);
  const Im2winTensor window = im2win(input, p.h_f, p.w_f, s, 1);
  const PermutedFilter fhat = permute_filter(filter, input.layout());
  Tensor out(p.output_dims(), input.layout());

  const Strides& ws = window.values.strides();
  const Strides& os = out.strides();
  const float* wp = window.values.data();
  const float* fp = fhat.data();
  float* op = out.data();
  const bool channel_inner = input.layout() == Layout::NHWC;

  // Every permuted order is linear in (co, ci, u, v).
  const std::size_t f0 = fhat.offset(0, 0, 0, 0);
  const std::size_t fr = p.c_i > 1 ? fhat.offset(0, 1, 0, 0) - f0 : 0;
  const std::size_t fu = p.h_f > 1 ? fhat.offset(0, 0, 1, 0) - f0 : 0;
  const std::size_t fv = p.w_f > 1 ? fhat.offset(0, 0, 0, 1) - f0 : 0;

  for (std::size_t i = 0; i < p.n_i; ++i) {
    for (std::size_t m = 0; m < p.h_o; ++m) {
      for (std::size_t j = 0; j < p.c_o; ++j) {
        const float* fj = fp + fhat.offset(j, 0, 0, 0);
        for (std::size_t n = 0; n < p.w_o; ++n) {
          const float* win = wp + ws.offset(i, 0, m, n * s * p.h_f);
          float acc = 0.0f;
          if (channel_inner) {
            for (std::size_t v = 0; v < p.w_f; ++v)
              for (std::size_t u = 0; u < p.h_f; ++u)
                for (std::size_t r = 0; r < p.c_i; ++r)
                  acc += win[r * ws.c + (v * p.h_f + u) * ws.w] * fj[r * fr + u * fu + v * fv];
          } else {
            for (std::size_t r = 0; r < p.c_i; ++r)
              for (std::size_t v = 0; v < p.w_f; ++v)
                for (std::size_t u = 0; u < p.h_f; ++u)
                  acc += win[r * ws.c + (v * p.h_f + u) * ws.w] * fj[r * fr + u * fu + v * fv];
          }
          op[os.offset(i, j, m, n)] = acc;
        }
      }
    }
  }
  return out;
}

Tensor conv_im2win_opt(const Im2winTensor& window, const PermutedFilter& filter,
                       const TuningParams& tuning) {
  validate(tuning);
  check_pair(window, filter);
  ConvProblem p = window.problem;
  p.c_o = filter.dims().n;
  const Layout base = window.layout();
  Tensor out(p.output_dims(), base);

  const Strides& ws = window.values.strides();
  const Strides& os = out.strides();
  const float* wp = window.values.data();
  const float* fp = filter.data();
  float* op = out.data();

  if (!is_batch_minor(base)) {
    const RunGeometry g = RunGeometry::for_window(p, base);
    const std::size_t filter_stride = p.c_i * p.h_f * p.w_f;
    const bool nhwc = base == Layout::NHWC;
    detail::parallel_for(p.n_i * p.h_o, tuning.threads, [&](std::size_t im) {
      const std::size_t i = im / p.h_o;
      const std::size_t m = im % p.h_o;
      const float* row = wp + ws.offset(i, 0, m, 0);
      for (std::size_t j = 0; j < p.c_o; ++j) {
        const float* fj = fp + j * filter_stride;
        float* out_base = op + os.offset(i, j, m, 0);
        detail::for_each_block(p.w_o, tuning.w_ob, [&](std::size_t n, std::size_t block) {
          detail::run_kernel(block)(row + n * g.column_stride, fj, g, out_base + n * os.w,
                                    nhwc ? os.w : 1);
        });
      }
    });
    return out;
  }

  // Batch-minor: eight images per vector, filter element broadcast. The
  // window-flat positions of one channel are walked in memory order.
  detail::LaneGeometry g;
  g.r_count = p.c_i;
  g.u_count = 1;
  g.v_count = p.w_f * p.h_f;
  g.in_r = ws.c;
  g.in_v = ws.w;
  g.lane_stride = 1;
  g.column_stride = p.s * p.h_f * ws.w;

  const std::size_t batch = window.values.stored_batch();
  const std::size_t chunks = (batch + kVecLanes - 1) / kVecLanes;
  const detail::PackedLaneFilter packed(
      p.c_o, p.c_i, 1, p.w_f * p.h_f, detail::channel_block(tuning.w_ob),
      [&](std::size_t j, std::size_t r, std::size_t, std::size_t t) {
        return filter.at(j, r, t % p.h_f, t / p.h_f);
      });
  detail::parallel_for(chunks * p.h_o, tuning.threads, [&](std::size_t km) {
    const std::size_t i0 = km / p.h_o * kVecLanes;
    const std::size_t m = km % p.h_o;
    const std::size_t lanes = std::min(kVecLanes, batch - i0);
    const float* row = wp + ws.offset(i0, 0, m, 0);
    detail::for_each_channel_block(p.c_o, packed.block(), [&](std::size_t j0, std::size_t jc) {
      detail::LaneGeometry gj = g;
      packed.apply(gj, jc);
      const float* fj = packed.channels(j0);
      float* out_row = op + os.offset(i0, j0, m, 0);
      detail::for_each_block(p.w_o, tuning.w_ob, [&](std::size_t n, std::size_t block) {
        if (lanes == kVecLanes) {
          detail::lane_kernel(block, jc)(row + n * gj.column_stride, fj, gj, out_row + n * os.w,
                                         os.w, os.c);
          return;
        }
        for (std::size_t jj = 0; jj < jc; ++jj)
          for (std::size_t b = 0; b < block; ++b)
            detail::lane_dot_partial(row + (n + b) * gj.column_stride, fj + jj, gj,
                                     out_row + jj * os.c + (n + b) * os.w, lanes);
      });
    });
  });
  return out;
}

Tensor conv_im2win_opt(const Tensor& input, const Tensor& filter, std::size_t s,
                       const TuningParams& tuning) {
  validate(tuning);
  const ConvProblem p = ConvProblem::from(input, filter, s);
  const Im2winTensor window = im2win(input, p.h_f, p.w_f, s, tuning.threads);
  const PermutedFilter fhat = permute_filter(filter, input.layout());
  return conv_im2win_opt(window, fhat, tuning);
}

}  // namespace convlab
