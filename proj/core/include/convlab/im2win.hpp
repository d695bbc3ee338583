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

#include "convlab/tensor.hpp"

namespace convlab {

/// Window-row tensor produced by im2win.
///
/// Every output row m of every image is materialised as one "window row":
/// the h_f input rows m*s .. m*s+h_f-1 interleaved column by column, so
/// that input (m*s + u, k) sits at window-flat index u + k*h_f. The tensor
/// reuses the base layout's linearization with logical dims
/// (n_i, c_i, h_o, w_i*h_f):
///
///   NHWC  [n_i][h_o][w_i*h_f][c_i]
///   NCHW  [n_i][c_i][h_o][w_i*h_f]
///   CHWN  [c_i][h_o][w_i*h_f][n_i]
///   CHWN8 [n_i/8][c_i][h_o][w_i*h_f][8]
///
/// The window of output column n starts at window-flat index n*s*h_f and
/// spans w_f*h_f consecutive window-flat positions.
struct Im2winTensor {
  Tensor values;
  ConvProblem problem;

  Layout layout() const { return values.layout(); }
  std::size_t flat_width() const { return problem.w_i * problem.h_f; }
  std::size_t bytes() const { return values.bytes(); }
};

/// Filter reordered so the kernels read it with unit stride. Logical
/// coordinates stay (c_o, c_i, h_f, w_f); memory order depends on the base
/// layout of the input it pairs with:
///
///   NHWC        [c_o][w_f][h_f][c_i]
///   NCHW        [c_o][c_i][w_f][h_f]
///   CHWN/CHWN8  [w_f][h_f][c_i][c_o]
class PermutedFilter {
 public:
  PermutedFilter() = default;
  PermutedFilter(Dims dims, Layout base);

  const Dims& dims() const { return dims_; }
  Layout base() const { return base_; }
  std::size_t size() const { return buffer_.size(); }
  std::size_t bytes() const { return size() * sizeof(float); }
  const float* data() const { return buffer_.data(); }
  float* data() { return buffer_.data(); }

  /// Offset of logical (co, ci, u, v); u indexes h_f, v indexes w_f.
  std::size_t offset(std::size_t co, std::size_t ci, std::size_t u, std::size_t v) const;
  float at(std::size_t co, std::size_t ci, std::size_t u, std::size_t v) const {
    return buffer_.data()[offset(co, ci, u, v)];
  }

 private:
  Dims dims_{};
  Layout base_ = Layout::NHWC;
  AlignedBuffer buffer_;
};

/// Builds the window-row tensor of `input` for an h_f x w_f filter at stride
/// s. All w_i input columns are copied even when trailing ones can never be
/// reached by a window. Throws InvalidProblem for impossible geometry.
Im2winTensor im2win(const Tensor& input, std::size_t h_f, std::size_t w_f, std::size_t s,
                    int threads = 0);

/// Filter reorder matching an im2win tensor of base layout `base`.
PermutedFilter permute_filter(const Tensor& filter, Layout base);
/// Same, with the base taken from the filter's own layout.
PermutedFilter permute_filter(const Tensor& filter);

/// Inverse of permute_filter: writes the filter back out in `layout`.
Tensor unpermute_filter(const PermutedFilter& filter, Layout layout);

/// n_i * c_i * h_o * w_i * h_f.
std::size_t im2win_buffer_elems(const ConvProblem& p);

}  // namespace convlab
