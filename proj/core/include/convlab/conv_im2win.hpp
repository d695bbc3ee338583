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

#pragma once

#include <cstddef>
#include <span>

#include "convlab/im2win.hpp"
#include "convlab/tensor.hpp"
#include "convlab/tuning.hpp"

namespace convlab {

/// Which tensor dimension fills the eight vector lanes.
enum class VecDim { WindowRun, Batch };

struct MicroKernelPlan {
  std::size_t w_ob = 4;
  std::size_t n_vec = kVecLanes;
  VecDim vec_dim = VecDim::WindowRun;

  static MicroKernelPlan for_layout(Layout base, std::size_t w_ob);
};

/// Shape of one window as a set of contiguous runs: NHWC windows are a
/// single run of w_f*h_f*c_i floats, NCHW windows are c_i runs of w_f*h_f.
struct RunGeometry {
  std::size_t runs = 1;
  std::size_t run_length = 0;
  std::size_t input_run_stride = 0;
  std::size_t filter_run_stride = 0;
  /// Distance between the windows of adjacent output columns.
  std::size_t column_stride = 0;

  static RunGeometry for_window(const ConvProblem& p, Layout base);
};

/// Computes out.size() adjacent outputs of one window row against one
/// filter. `window` points at the first window of the block, `filter` at
/// the output channel's permuted filter. Each output accumulates eight
/// partial sums over its runs, horizontally summed, plus a scalar sum of the
/// run tails; the order is identical for every block width.
void dot_product_block(const float* window, const float* filter, const RunGeometry& g,
                       std::span<float> out);

/// Alg.-2 style im2win convolution: transform, permute filter, then seven
/// scalar loops (N, H_o, C_o, W_o outermost). Output in the input's layout.
Tensor conv_im2win_naive(const Tensor& input, const Tensor& filter, std::size_t s);

/// Optimized im2win convolution. The transform and filter permutation run
/// inside the call.
Tensor conv_im2win_opt(const Tensor& input, const Tensor& filter, std::size_t s,
                       const TuningParams& tuning = {});

/// Compute stage only, for callers that time the transform separately.
/// `filter` must have been permuted for `window.layout()`.
Tensor conv_im2win_opt(const Im2winTensor& window, const PermutedFilter& filter,
                       const TuningParams& tuning = {});

}  // namespace convlab
