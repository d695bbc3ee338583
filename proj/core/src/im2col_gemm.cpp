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

#include "convlab/im2col_gemm.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "convlab/error.hpp"
#include "parallel.hpp"
#include "simd.hpp"

namespace convlab {

namespace {

using detail::Vec8;

constexpr std::size_t kMr = 6;
constexpr std::size_t kNr = 16;

// Packs a kc x nc slice of B into kNr-wide column slivers, zero padded.
void pack_b(const float* b, std::size_t ldb, std::size_t kc, std::size_t nc, float* dst) {
  for (std::size_t j0 = 0; j0 < nc; j0 += kNr) {
    const std::size_t cols = std::min(kNr, nc - j0);
    for (std::size_t k = 0; k < kc; ++k) {
      const float* src = b + k * ldb + j0;
      float* d = dst + k * kNr;
      std::size_t j = 0;
      for (; j < cols; ++j) d[j] = src[j];
      for (; j < kNr; ++j) d[j] = 0.0f;
    }
    dst += kc * kNr;
  }
}

// Packs an mc x kc slice of A into kMr-tall row slivers, zero padded.
void pack_a(const float* a, std::size_t lda, std::size_t mc, std::size_t kc, float* dst) {
  for (std::size_t i0 = 0; i0 < mc; i0 += kMr) {
    const std::size_t rows = std::min(kMr, mc - i0);
    for (std::size_t k = 0; k < kc; ++k) {
      float* d = dst + k * kMr;
      std::size_t i = 0;
      for (; i < rows; ++i) d[i] = a[(i0 + i) * lda + k];
      for (; i < kMr; ++i) d[i] = 0.0f;
    }
    dst += kc * kMr;
  }
}

// acc (kMr x kNr, row-major in `tile`) continues from its current value.
void micro_kernel(std::size_t kc, const float* ap, const float* bp, float* tile) {
  Vec8 acc[kMr][2];
  for (std::size_t i = 0; i < kMr; ++i) {
    acc[i][0] = Vec8::load(tile + i * kNr);
    acc[i][1] = Vec8::load(tile + i * kNr + 8);
  }
  for (std::size_t k = 0; k < kc; ++k) {
    const Vec8 b0 = Vec8::load(bp + k * kNr);
    const Vec8 b1 = Vec8::load(bp + k * kNr + 8);
    for (std::size_t i = 0; i < kMr; ++i) {
      const Vec8 a = Vec8::broadcast(ap[k * kMr + i]);
      acc[i][0] = detail::fmadd(a, b0, acc[i][0]);
      acc[i][1] = detail::fmadd(a, b1, acc[i][1]);
    }
  }
  for (std::size_t i = 0; i < kMr; ++i) {
    acc[i][0].store(tile + i * kNr);
    acc[i][1].store(tile + i * kNr + 8);
  }
}

}  // namespace

void gemm(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float* c, std::size_t ldc, const GemmTiles& tiles,
          int threads) {
  if (tiles.mb == 0 || tiles.kb == 0 || tiles.nb == 0)
    throw std::invalid_argument("GEMM tiles must be positive");
  if (m == 0 || n == 0) return;
  if (k == 0) {
    for (std::size_t i = 0; i < m; ++i) std::fill_n(c + i * ldc, n, 0.0f);
    return;
  }
  const std::size_t nb = (tiles.nb + kNr - 1) / kNr * kNr;
  const std::size_t mb = (tiles.mb + kMr - 1) / kMr * kMr;
  const std::size_t kb = tiles.kb;
  AlignedBuffer packed_b(kb * nb);
  const std::size_t m_blocks = (m + mb - 1) / mb;

  for (std::size_t n0 = 0; n0 < n; n0 += nb) {
    const std::size_t nc = std::min(nb, n - n0);
    for (std::size_t k0 = 0; k0 < k; k0 += kb) {
      const std::size_t kc = std::min(kb, k - k0);
      const bool first = k0 == 0;
      pack_b(b + k0 * ldb + n0, ldb, kc, nc, packed_b.data());
      const float* bp_base = packed_b.data();

      detail::parallel_for(m_blocks, threads, [&](std::size_t blk) {
        thread_local AlignedBuffer packed_a;
        if (packed_a.size() < mb * kb) packed_a = AlignedBuffer(mb * kb);
        alignas(64) float tile[kMr * kNr];

        const std::size_t m0 = blk * mb;
        const std::size_t mc = std::min(mb, m - m0);
        pack_a(a + m0 * lda + k0, lda, mc, kc, packed_a.data());
        for (std::size_t i0 = 0; i0 < mc; i0 += kMr) {
          const std::size_t rows = std::min(kMr, mc - i0);
          const float* ap = packed_a.data() + i0 * kc;
          for (std::size_t j0 = 0; j0 < nc; j0 += kNr) {
            const std::size_t cols = std::min(kNr, nc - j0);
            float* cp = c + (m0 + i0) * ldc + n0 + j0;
            for (std::size_t i = 0; i < kMr; ++i)
              for (std::size_t j = 0; j < kNr; ++j)
                tile[i * kNr + j] = (first || i >= rows || j >= cols) ? 0.0f : cp[i * ldc + j];
            micro_kernel(kc, ap, bp_base + j0 * kc, tile);
            for (std::size_t i = 0; i < rows; ++i)
              std::memcpy(cp + i * ldc, tile + i * kNr, cols * sizeof(float));
          }
        }
      });
    }
  }
}

Matrix gemm(const Matrix& a, const Matrix& b, const GemmTiles& tiles, int threads) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "gemm inner dimensions differ: " << a.rows() << 'x' << a.cols() << " * " << b.rows()
        << 'x' << b.cols();
    throw ShapeMismatch(msg.str());
  }
  Matrix c(a.rows(), b.cols());
  gemm(a.rows(), b.cols(), a.cols(), a.data(), a.cols(), b.data(), b.cols(), c.data(), c.cols(),
       tiles, threads);
  return c;
}

void gemm_naive(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                const float* b, std::size_t ldb, float* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (std::size_t kk = 0; kk < k; ++kk) acc += a[i * lda + kk] * b[kk * ldb + j];
      c[i * ldc + j] = acc;
    }
}

std::size_t im2col_buffer_elems_per_image(const ConvProblem& p) {
  return p.h_o * p.w_o * p.c_i * p.h_f * p.w_f;
}

std::size_t im2col_buffer_elems(const ConvProblem& p) {
  return p.n_i * im2col_buffer_elems_per_image(p);
}

std::vector<ColMatrix> im2col(const Tensor& input, std::size_t h_f, std::size_t w_f,
                              std::size_t s, int threads) {
  const Layout order = input.layout();
  if (order != Layout::NHWC && order != Layout::NCHW)
    throw UnsupportedLayout("im2col supports only NHWC and NCHW inputs, got " +
                            std::string(to_string(order)));
  const Dims& d = input.dims();
  const ConvProblem p = ConvProblem::make(d.n, d.c, d.h, d.w, 1, h_f, w_f, s);
  const std::size_t rows = p.h_o * p.w_o;
  const std::size_t cols = p.c_i * h_f * w_f;

  std::vector<ColMatrix> out;
  out.reserve(p.n_i);
  for (std::size_t i = 0; i < p.n_i; ++i) out.push_back({Matrix(rows, cols), order});

  const Strides& is = input.strides();
  const float* ip = input.data();
  detail::parallel_for(p.n_i * p.h_o, threads, [&](std::size_t im) {
    const std::size_t i = im / p.h_o;
    const std::size_t m = im % p.h_o;
    Matrix& mat = out[i].values;
    for (std::size_t n = 0; n < p.w_o; ++n) {
      float* row = mat.data() + (m * p.w_o + n) * cols;
      if (order == Layout::NHWC) {
        // (v, r) is contiguous in the input for each filter row u.
        for (std::size_t u = 0; u < h_f; ++u)
          std::memcpy(row + u * w_f * p.c_i, ip + is.offset(i, 0, m * s + u, n * s),
                      w_f * p.c_i * sizeof(float));
      } else {
        for (std::size_t r = 0; r < p.c_i; ++r)
          for (std::size_t u = 0; u < h_f; ++u)
            std::memcpy(row + (r * h_f + u) * w_f, ip + is.offset(i, r, m * s + u, n * s),
                        w_f * sizeof(float));
      }
    }
  });
  return out;
}

Matrix filter_matrix(const Tensor& filter, Layout order) {
  const Dims& d = filter.dims();  // (c_o, c_i, h_f, w_f)
  Matrix b(d.c * d.h * d.w, d.n);
  for (std::size_t j = 0; j < d.n; ++j)
    for (std::size_t r = 0; r < d.c; ++r)
      for (std::size_t u = 0; u < d.h; ++u)
        for (std::size_t v = 0; v < d.w; ++v) {
          const std::size_t row = order == Layout::NHWC ? (u * d.w + v) * d.c + r
                                                        : (r * d.h + u) * d.w + v;
          b(row, j) = filter.at(j, r, u, v);
        }
  return b;
}

Tensor conv_im2col(const Tensor& input, const Tensor& filter, std::size_t s,
                   const TuningParams& tuning, bool blocked) {
  validate(tuning);
  const ConvProblem p = ConvProblem::from(input, filter, s);
  const Layout order = input.layout();
  const std::vector<ColMatrix> cols = im2col(input, p.h_f, p.w_f, s, tuning.threads);
  const Matrix b = filter_matrix(filter, order);
  Tensor out(p.output_dims(), order);
  const std::size_t rows = p.h_o * p.w_o;
  const std::size_t k = b.rows();

  auto multiply = [&](const Matrix& a, float* c) {
    if (blocked)
      gemm(rows, p.c_o, k, a.data(), k, b.data(), p.c_o, c, p.c_o, tuning.gemm, tuning.threads);
    else
      gemm_naive(rows, p.c_o, k, a.data(), k, b.data(), p.c_o, c, p.c_o);
  };

  const Strides& os = out.strides();
  if (order == Layout::NHWC) {
    // One image of an NHWC output is exactly the (h_o*w_o) x c_o product.
    for (std::size_t i = 0; i < p.n_i; ++i) multiply(cols[i].values, out.data() + os.batch_offset(i));
    return out;
  }
  Matrix product(rows, p.c_o);
  for (std::size_t i = 0; i < p.n_i; ++i) {
    multiply(cols[i].values, product.data());
    float* img = out.data() + os.batch_offset(i);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < p.c_o; ++j) img[j * rows + r] = product(r, j);
  }
  return out;
}

}  // namespace convlab
