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
#include <vector>

#include "convlab/tensor.hpp"
#include "convlab/tuning.hpp"

namespace convlab {

/// Row-major f32 matrix on aligned storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), buffer_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return buffer_.size(); }
  float* data() { return buffer_.data(); }
  const float* data() const { return buffer_.data(); }
  float& operator()(std::size_t r, std::size_t c) { return buffer_.data()[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return buffer_.data()[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  AlignedBuffer buffer_;
};

/// One image unfolded into rows of flattened windows. Row m*w_o + n holds
/// the window of output (m, n); the column order follows the source layout:
/// (u*w_f + v)*c_i + r for NHWC, (r*h_f + u)*w_f + v for NCHW.
struct ColMatrix {
  Matrix values;
  Layout order = Layout::NCHW;
};

/// Unfolds every image of an NHWC or NCHW input. Throws UnsupportedLayout
/// for batch-minor layouts.
std::vector<ColMatrix> im2col(const Tensor& input, std::size_t h_f, std::size_t w_f,
                              std::size_t s, int threads = 0);

/// h_o * w_o * c_i * h_f * w_f, the per-image column matrix size.
std::size_t im2col_buffer_elems_per_image(const ConvProblem& p);
/// n_i times the per-image size.
std::size_t im2col_buffer_elems(const ConvProblem& p);

/// C = A * B with cache tiles and an 8-lane FMA micro-kernel. Every element
/// of C is accumulated over k in increasing order, so any tiling gives the
/// same bits. Row strides are in elements.
void gemm(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float* c, std::size_t ldc, const GemmTiles& tiles = {},
          int threads = 0);

/// Throws ShapeMismatch when a.cols() != b.rows().
Matrix gemm(const Matrix& a, const Matrix& b, const GemmTiles& tiles = {}, int threads = 0);

/// Untiled i-j-k triple loop with f32 accumulation.
void gemm_naive(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                const float* b, std::size_t ldb, float* c, std::size_t ldc);

/// Filter as the K x c_o right-hand matrix whose row order matches the
/// column order of im2col for `order`.
Matrix filter_matrix(const Tensor& filter, Layout order);

/// im2col + per-image GEMM. `blocked` selects the tiled GEMM (the optimized
/// variant) over the naive triple loop. Only NHWC and NCHW are supported.
Tensor conv_im2col(const Tensor& input, const Tensor& filter, std::size_t s,
                   const TuningParams& tuning = {}, bool blocked = true);

}  // namespace convlab
