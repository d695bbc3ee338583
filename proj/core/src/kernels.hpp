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

// Register-blocked micro-kernels shared by the direct and im2win
// convolutions. Two shapes exist:
//
//  * run kernels reduce contiguous runs of a window against contiguous runs
//    of the filter, eight elements per FMA, and finish each output with a
//    horizontal sum (channel- or window-vectorized layouts);
//  * lane kernels broadcast one filter element and update eight independent
//    outputs per FMA (batch- or column-vectorized layouts).
//
// In both, the reduction order of an output element does not depend on the
// block width, so blocking never changes results.

#pragma once

#include <cstddef>

#include "convlab/conv_im2win.hpp"
#include "convlab/tensor.hpp"
#include "simd.hpp"

namespace convlab::detail {

template <std::size_t B>
inline void run_dot(const float* in, const float* filt, const RunGeometry& g, float* out,
                    std::size_t out_stride) {
  Vec8 acc[B];
  float tail[B];
  for (std::size_t b = 0; b < B; ++b) {
    acc[b] = Vec8::zero();
    tail[b] = 0.0f;
  }
  const std::size_t vec_end = g.run_length / kVecLanes * kVecLanes;
  for (std::size_t run = 0; run < g.runs; ++run) {
    const float* ip = in + run * g.input_run_stride;
    const float* fp = filt + run * g.filter_run_stride;
    for (std::size_t t = 0; t < vec_end; t += kVecLanes) {
      const Vec8 f = Vec8::load(fp + t);
      for (std::size_t b = 0; b < B; ++b)
        acc[b] = fmadd(Vec8::load(ip + b * g.column_stride + t), f, acc[b]);
    }
    for (std::size_t t = vec_end; t < g.run_length; ++t) {
      const float f = fp[t];
      for (std::size_t b = 0; b < B; ++b) tail[b] = fma1(ip[b * g.column_stride + t], f, tail[b]);
    }
  }
  for (std::size_t b = 0; b < B; ++b) out[b * out_stride] = hsum(acc[b]) + tail[b];
}

using RunKernel = void (*)(const float*, const float*, const RunGeometry&, float*, std::size_t);

inline RunKernel run_kernel(std::size_t block) {
  switch (block) {
    case 1: return &run_dot<1>;
    case 2: return &run_dot<2>;
    case 3: return &run_dot<3>;
    case 4: return &run_dot<4>;
    case 5: return &run_dot<5>;
    case 6: return &run_dot<6>;
    case 7: return &run_dot<7>;
    default: return &run_dot<8>;
  }
}

/// Strides of the three reduction loops (r outer, v inner) of a lane kernel.
struct LaneGeometry {
  std::size_t r_count = 1;
  std::size_t u_count = 1;
  std::size_t v_count = 1;
  std::size_t in_r = 0;
  std::size_t in_u = 0;
  std::size_t in_v = 0;
  std::size_t f_r = 0;
  std::size_t f_u = 0;
  std::size_t f_v = 0;
  /// Filter distance between adjacent output channels.
  std::size_t f_j = 0;
  /// Input distance between adjacent lanes.
  std::size_t lane_stride = 1;
  /// Input distance between adjacent accumulators.
  std::size_t column_stride = 0;
};

/// B column accumulators for each of J output channels, eight lanes each.
/// Accumulator (jj, b) is stored to out + jj * out_j_stride + b * out_stride
/// with contiguous lanes. The J filter values of one (r, u, v) are
/// broadcast once and reused across the B input vectors.
template <std::size_t B, std::size_t J>
inline void lane_dot(const float* in, const float* filt, const LaneGeometry& g, float* out,
                     std::size_t out_stride, std::size_t out_j_stride) {
  Vec8 acc[J][B];
  for (std::size_t jj = 0; jj < J; ++jj)
    for (std::size_t b = 0; b < B; ++b) acc[jj][b] = Vec8::zero();
  for (std::size_t r = 0; r < g.r_count; ++r) {
    for (std::size_t u = 0; u < g.u_count; ++u) {
      const float* ip = in + r * g.in_r + u * g.in_u;
      const float* fp = filt + r * g.f_r + u * g.f_u;
      for (std::size_t v = 0; v < g.v_count; ++v) {
        const float* fv = fp + v * g.f_v;
        const float* iv = ip + v * g.in_v;
        Vec8 f[J];
        for (std::size_t jj = 0; jj < J; ++jj) f[jj] = Vec8::broadcast(fv[jj * g.f_j]);
        for (std::size_t b = 0; b < B; ++b) {
          const Vec8 x = Vec8::load_strided(iv + b * g.column_stride, g.lane_stride);
          for (std::size_t jj = 0; jj < J; ++jj) acc[jj][b] = fmadd(x, f[jj], acc[jj][b]);
        }
      }
    }
  }
  for (std::size_t jj = 0; jj < J; ++jj)
    for (std::size_t b = 0; b < B; ++b) acc[jj][b].store(out + jj * out_j_stride + b * out_stride);
}

/// Scalar form of lane_dot<1, 1> for fewer than eight lanes.
inline void lane_dot_partial(const float* in, const float* filt, const LaneGeometry& g,
                             float* out, std::size_t lanes) {
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    const float* base = in + lane * g.lane_stride;
    float acc = 0.0f;
    for (std::size_t r = 0; r < g.r_count; ++r)
      for (std::size_t u = 0; u < g.u_count; ++u)
        for (std::size_t v = 0; v < g.v_count; ++v)
          acc = fma1(base[r * g.in_r + u * g.in_u + v * g.in_v],
                     filt[r * g.f_r + u * g.f_u + v * g.f_v], acc);
    out[lane] = acc;
  }
}

using LaneKernel = void (*)(const float*, const float*, const LaneGeometry&, float*, std::size_t,
                            std::size_t);

template <std::size_t J>
inline LaneKernel lane_kernel_for(std::size_t block) {
  switch (block) {
    case 1: return &lane_dot<1, J>;
    case 2: return &lane_dot<2, J>;
    case 3: return &lane_dot<3, J>;
    case 4: return &lane_dot<4, J>;
    case 5: return &lane_dot<5, J>;
    case 6: return &lane_dot<6, J>;
    case 7: return &lane_dot<7, J>;
    default: return &lane_dot<8, J>;
  }
}

inline LaneKernel lane_kernel(std::size_t block, std::size_t channels) {
  switch (channels) {
    case 1: return lane_kernel_for<1>(block);
    case 2: return lane_kernel_for<2>(block);
    case 3: return lane_kernel_for<3>(block);
    default: return lane_kernel_for<4>(block);
  }
}

/// Output channels per lane-kernel call: as many as keep block * channels
/// accumulators within twelve of the sixteen vector registers.
inline std::size_t channel_block(std::size_t block) {
  const std::size_t j = 12 / block;
  return j < 1 ? 1 : (j > 4 ? 4 : j);
}

/// Calls fn(j, count) over [0, total) in chunks of `block`, remainder one
/// at a time.
template <class Fn>
inline void for_each_channel_block(std::size_t total, std::size_t block, Fn&& fn) {
  std::size_t j = 0;
  for (; j + block <= total; j += block) fn(j, block);
  for (; j < total; ++j) fn(j, std::size_t{1});
}

/// Filter repacked for lane kernels: output channels in blocks of
/// channel_block(), each block stored [r][u][v][jj] so a kernel call reads
/// its filter values sequentially.
class PackedLaneFilter {
 public:
  /// get(j, r, u, v) yields the filter value of output channel j.
  template <class Get>
  PackedLaneFilter(std::size_t c_o, std::size_t r_count, std::size_t u_count,
                   std::size_t v_count, std::size_t block, Get&& get)
      : data_(c_o * r_count * u_count * v_count),
        block_(block),
        r_count_(r_count),
        u_count_(u_count),
        v_count_(v_count) {
    float* out = data_.data();
    for_each_channel_block(c_o, block, [&](std::size_t j0, std::size_t jc) {
      float* dst = out + j0 * per_channel();
      for (std::size_t r = 0; r < r_count; ++r)
        for (std::size_t u = 0; u < u_count; ++u)
          for (std::size_t v = 0; v < v_count; ++v)
            for (std::size_t jj = 0; jj < jc; ++jj) *dst++ = get(j0 + jj, r, u, v);
    });
  }

  std::size_t block() const { return block_; }
  std::size_t per_channel() const { return r_count_ * u_count_ * v_count_; }
  const float* channels(std::size_t j0) const { return data_.data() + j0 * per_channel(); }

  /// Points g's filter strides at a block of jc channels.
  void apply(LaneGeometry& g, std::size_t jc) const {
    g.f_v = jc;
    g.f_u = v_count_ * jc;
    g.f_r = u_count_ * v_count_ * jc;
    g.f_j = 1;
  }

 private:
  AlignedBuffer data_;
  std::size_t block_;
  std::size_t r_count_;
  std::size_t u_count_;
  std::size_t v_count_;
};

/// Walks `count` output columns in blocks of `block`, finishing the
/// remainder one column at a time with the single-accumulator kernel.
template <class Fn>
inline void for_each_block(std::size_t count, std::size_t block, Fn&& fn) {
  std::size_t n = 0;
  for (; n + block <= count; n += block) fn(n, block);
  if (block != 1)
    for (; n < count; ++n) fn(n, std::size_t{1});
}

}  // namespace convlab::detail
