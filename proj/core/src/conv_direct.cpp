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

#include "convlab/conv_direct.hpp"

#include <algorithm>
#include <optional>

#include "kernels.hpp"
#include "parallel.hpp"

namespace convlab {

namespace {

template <class Acc>
Tensor direct_naive(const Tensor& input, const Tensor& filter, std::size_t s) {
  const ConvProblem p = ConvProblem::from(input, filter, s);
  Tensor out(p.output_dims(), input.layout());
  const Strides& is = input.strides();
  const Strides& fs = filter.strides();
  const Strides& os = out.strides();
  const float* ip = input.data();
  const float* fp = filter.data();
  float* op = out.data();

  for (std::size_t i = 0; i < p.n_i; ++i) {
    const std::size_t ib = is.batch_offset(i);
    for (std::size_t j = 0; j < p.c_o; ++j) {
      const std::size_t fb = fs.batch_offset(j);
      for (std::size_t m = 0; m < p.h_o; ++m) {
        for (std::size_t n = 0; n < p.w_o; ++n) {
          Acc acc = 0;
          for (std::size_t r = 0; r < p.c_i; ++r)
            for (std::size_t u = 0; u < p.h_f; ++u)
              for (std::size_t v = 0; v < p.w_f; ++v) {
                const Acc x = ip[ib + r * is.c + (m * s + u) * is.h + (n * s + v) * is.w];
                const Acc w = fp[fb + r * fs.c + u * fs.h + v * fs.w];
                acc += x * w;
              }
          op[os.offset(i, j, m, n)] = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

void direct_nhwc(const Tensor& input, const Tensor& filter, const ConvProblem& p,
                 const TuningParams& tuning, Tensor& out) {
  std::optional<Tensor> converted;
  if (filter.layout() != Layout::NHWC) converted = convert_layout(filter, Layout::NHWC);
  const Tensor& f = converted ? *converted : filter;

  const Strides& is = input.strides();
  const Strides& os = out.strides();
  // Per filter row u, the (w_f, c_i) slice of a window is contiguous in
  // both the input and the NHWC filter.
  const RunGeometry g{p.h_f, p.w_f * p.c_i, is.h, p.w_f * p.c_i, p.s * p.c_i};
  const std::size_t filter_stride = p.h_f * p.w_f * p.c_i;
  const float* ip = input.data();
  const float* fp = f.data();
  float* op = out.data();

  detail::parallel_for(p.n_i * p.h_o, tuning.threads, [&](std::size_t im) {
    const std::size_t i = im / p.h_o;
    const std::size_t m = im % p.h_o;
    const float* in_row = ip + is.offset(i, 0, m * p.s, 0);
    float* out_row = op + os.offset(i, 0, m, 0);
    for (std::size_t j = 0; j < p.c_o; ++j) {
      const float* fj = fp + j * filter_stride;
      detail::for_each_block(p.w_o, tuning.w_ob, [&](std::size_t n, std::size_t block) {
        detail::run_kernel(block)(in_row + n * g.column_stride, fj, g, out_row + n * os.w + j, os.w);
      });
    }
  });
}

detail::PackedLaneFilter pack(const Tensor& filter, const ConvProblem& p,
                              const TuningParams& tuning) {
  const Strides& fs = filter.strides();
  const float* fp = filter.data();
  return detail::PackedLaneFilter(
      p.c_o, p.c_i, p.h_f, p.w_f, detail::channel_block(tuning.w_ob),
      [&](std::size_t j, std::size_t r, std::size_t u, std::size_t v) {
        return fp[fs.offset(j, r, u, v)];
      });
}

void direct_nchw(const Tensor& input, const Tensor& filter, const ConvProblem& p,
                 const TuningParams& tuning, Tensor& out) {
  const Strides& is = input.strides();
  const Strides& os = out.strides();
  const detail::PackedLaneFilter packed = pack(filter, p, tuning);
  detail::LaneGeometry g;
  g.r_count = p.c_i;
  g.u_count = p.h_f;
  g.v_count = p.w_f;
  g.in_r = is.c;
  g.in_u = is.h;
  g.in_v = 1;
  g.lane_stride = p.s;
  g.column_stride = kVecLanes * p.s;

  const std::size_t vectors = p.w_o / kVecLanes;
  const std::size_t tail = p.w_o % kVecLanes;
  const float* ip = input.data();
  float* op = out.data();

  detail::parallel_for(p.n_i * p.h_o, tuning.threads, [&](std::size_t im) {
    const std::size_t i = im / p.h_o;
    const std::size_t m = im % p.h_o;
    const float* in_row = ip + is.offset(i, 0, m * p.s, 0);
    detail::for_each_channel_block(p.c_o, packed.block(), [&](std::size_t j0, std::size_t jc) {
      detail::LaneGeometry gj = g;
      packed.apply(gj, jc);
      const float* fj = packed.channels(j0);
      float* out_row = op + os.offset(i, j0, m, 0);
      detail::for_each_block(vectors, tuning.w_ob, [&](std::size_t vb, std::size_t block) {
        detail::lane_kernel(block, jc)(in_row + vb * gj.column_stride, fj, gj,
                                       out_row + vb * kVecLanes, kVecLanes, os.c);
      });
      if (tail == 0) return;
      for (std::size_t jj = 0; jj < jc; ++jj)
        detail::lane_dot_partial(in_row + vectors * gj.column_stride, fj + jj, gj,
                                 out_row + jj * os.c + vectors * kVecLanes, tail);
    });
  });
}

void direct_batch_minor(const Tensor& input, const Tensor& filter, const ConvProblem& p,
                        const TuningParams& tuning, Tensor& out) {
  const Strides& is = input.strides();
  const Strides& os = out.strides();
  const detail::PackedLaneFilter packed = pack(filter, p, tuning);
  detail::LaneGeometry g;
  g.r_count = p.c_i;
  g.u_count = p.h_f;
  g.v_count = p.w_f;
  g.in_r = is.c;
  g.in_u = is.h;
  g.in_v = is.w;
  g.lane_stride = 1;
  g.column_stride = p.s * is.w;

  const std::size_t batch = input.stored_batch();
  const std::size_t chunks = (batch + kVecLanes - 1) / kVecLanes;
  const float* ip = input.data();
  float* op = out.data();

  detail::parallel_for(chunks * p.h_o, tuning.threads, [&](std::size_t km) {
    const std::size_t i0 = km / p.h_o * kVecLanes;
    const std::size_t m = km % p.h_o;
    const std::size_t lanes = std::min(kVecLanes, batch - i0);
    const float* in_row = ip + is.offset(i0, 0, m * p.s, 0);
    detail::for_each_channel_block(p.c_o, packed.block(), [&](std::size_t j0, std::size_t jc) {
      detail::LaneGeometry gj = g;
      packed.apply(gj, jc);
      const float* fj = packed.channels(j0);
      float* out_row = op + os.offset(i0, j0, m, 0);
      detail::for_each_block(p.w_o, tuning.w_ob, [&](std::size_t n, std::size_t block) {
        if (lanes == kVecLanes) {
          detail::lane_kernel(block, jc)(in_row + n * gj.column_stride, fj, gj, out_row + n * os.w,
                                         os.w, os.c);
          return;
        }
        for (std::size_t jj = 0; jj < jc; ++jj)
          for (std::size_t b = 0; b < block; ++b)
            detail::lane_dot_partial(in_row + (n + b) * gj.column_stride, fj + jj, gj,
                                     out_row + jj * os.c + (n + b) * os.w, lanes);
      });
    });
  });
}

}  // namespace

Tensor conv_direct_naive(const Tensor& input, const Tensor& filter, std::size_t s,
                         Accumulation accum) {
  return accum == Accumulation::F64 ? direct_naive<double>(input, filter, s)
                                    : direct_naive<float>(input, filter, s);
}

Tensor conv_direct_opt(const Tensor& input, const Tensor& filter, std::size_t s,
                       const TuningParams& tuning) {
  validate(tuning);
  const ConvProblem p = ConvProblem::from(input, filter, s);
  Tensor out(p.output_dims(), input.layout());
  switch (input.layout()) {
    case Layout::NHWC: direct_nhwc(input, filter, p, tuning, out); break;
    case Layout::NCHW: direct_nchw(input, filter, p, tuning, out); break;
    case Layout::CHWN:
    case Layout::CHWN8: direct_batch_minor(input, filter, p, tuning, out); break;
  }
  return out;
}

std::uint64_t flops(const ConvProblem& p) {
  return std::uint64_t{2} * p.n_i * p.c_o * p.h_o * p.w_o * p.c_i * p.h_f * p.w_f;
}

}  // namespace convlab
