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

#include <gtest/gtest.h>

#include <cstring>
#include <numeric>
#include <random>
#include <tuple>

#include "convlab/bench.hpp"
#include "convlab/compare.hpp"
#include "convlab/conv_direct.hpp"
#include "convlab/error.hpp"
#include "convlab/im2col_gemm.hpp"
#include "support.hpp"

namespace convlab {
namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint32_t seed) {
  Matrix m(rows, cols);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

double max_rel_vs_f64(const Matrix& a, const Matrix& b, const Matrix& c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) ref += double{a(i, k)} * double{b(k, j)};
      worst = std::max(worst, std::abs(c(i, j) - ref) / (1.0 + std::abs(ref)));
    }
  return worst;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

TEST(Gemm, HandTwoByTwo) {
  Matrix a(2, 2), b(2, 2);
  const float av[] = {1, 2, 3, 4}, bv[] = {5, 6, 7, 8};
  std::copy(av, av + 4, a.data());
  std::copy(bv, bv + 4, b.data());
  const Matrix c = gemm(a, b);
  EXPECT_EQ(c(0, 0), 19.0f);
  EXPECT_EQ(c(0, 1), 22.0f);
  EXPECT_EQ(c(1, 0), 43.0f);
  EXPECT_EQ(c(1, 1), 50.0f);
}

TEST(Gemm, IdentityTimesAIsExact) {
  Matrix id(8, 8);
  for (std::size_t k = 0; k < 8; ++k) id(k, k) = 1.0f;
  const Matrix a = random_matrix(8, 8, 1);
  EXPECT_TRUE(same_bits(gemm(id, a), a));
  EXPECT_TRUE(same_bits(gemm(a, id), a));
}

TEST(Gemm, RandomAgainstF64TripleLoop) {
  const Matrix a = random_matrix(64, 128, 2), b = random_matrix(128, 96, 3);
  EXPECT_LE(max_rel_vs_f64(a, b, gemm(a, b)), kTolerance);
  Matrix naive(64, 96);
  gemm_naive(64, 96, 128, a.data(), 128, b.data(), 96, naive.data(), 96);
  EXPECT_LE(max_rel_vs_f64(a, b, naive), kTolerance);
}

TEST(Gemm, TilingAndThreadsDoNotChangeBits) {
  for (const auto& [m, n, k] : {std::tuple{64u, 96u, 128u}, std::tuple{13u, 17u, 5u},
                                 std::tuple{100u, 33u, 300u}, std::tuple{1u, 1u, 1u}}) {
    const Matrix a = random_matrix(m, k, 4), b = random_matrix(k, n, 5);
    const Matrix ref = gemm(a, b);
    EXPECT_LE(max_rel_vs_f64(a, b, ref), kTolerance);
    for (const GemmTiles tiles : {GemmTiles{6, 1, 16}, GemmTiles{7, 13, 5}, GemmTiles{512, 512, 512},
                                  GemmTiles{1, 1, 1}})
      for (int threads : {1, 2, 4})
        EXPECT_TRUE(same_bits(gemm(a, b, tiles, threads), ref))
            << m << 'x' << n << 'x' << k << " tiles " << tiles.mb << ',' << tiles.kb << ','
            << tiles.nb << " threads " << threads;
  }
}

TEST(Gemm, StridedOperands) {
  const Matrix a = random_matrix(10, 20, 6), b = random_matrix(20, 30, 7);
  Matrix c(10, 30);
  // Multiply the leading 5x7 by 7x9 blocks through the stride arguments.
  gemm(5, 9, 7, a.data(), 20, b.data(), 30, c.data(), 30);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 7; ++k) ref += double{a(i, k)} * double{b(k, j)};
      EXPECT_NEAR(c(i, j), ref, 1e-5);
    }
  EXPECT_EQ(c(5, 0), 0.0f);
  EXPECT_EQ(c(0, 9), 0.0f);
}

TEST(Gemm, InnerDimensionMismatch) {
  EXPECT_THROW(gemm(Matrix(2, 3), Matrix(4, 2)), ShapeMismatch);
}

TEST(Im2col, SingleChannelWindows) {
  Tensor in({1, 1, 3, 3}, Layout::NCHW);
  std::iota(in.values().begin(), in.values().end(), 0.0f);
  const auto cols = im2col(in, 2, 2, 1);
  ASSERT_EQ(cols.size(), 1u);
  const Matrix& m = cols[0].values;
  ASSERT_EQ(m.rows(), 4u);
  ASSERT_EQ(m.cols(), 4u);
  const float rows[4][4] = {{0, 1, 3, 4}, {1, 2, 4, 5}, {3, 4, 6, 7}, {4, 5, 7, 8}};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m(r, c), rows[r][c]);
}

TEST(Im2col, ColumnOrderFollowsTheLayout) {
  for (Layout l : {Layout::NHWC, Layout::NCHW}) {
    const Tensor in = testing::random_tensor({2, 3, 6, 7}, l, 12);
    const std::size_t h_f = 2, w_f = 3, s = 2;
    const ConvProblem p = ConvProblem::make(2, 3, 6, 7, 1, h_f, w_f, s);
    const auto cols = im2col(in, h_f, w_f, s);
    ASSERT_EQ(cols.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(cols[i].order, l);
      for (std::size_t m = 0; m < p.h_o; ++m)
        for (std::size_t n = 0; n < p.w_o; ++n)
          for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t u = 0; u < h_f; ++u)
              for (std::size_t v = 0; v < w_f; ++v) {
                const std::size_t col =
                    l == Layout::NHWC ? (u * w_f + v) * 3 + r : (r * h_f + u) * w_f + v;
                ASSERT_EQ(cols[i].values(m * p.w_o + n, col), in.at(i, r, m * s + u, n * s + v));
              }
    }
  }
}

TEST(Im2col, UnitFilterIsAReshape) {
  const Tensor in = testing::random_tensor({1, 4, 5, 6}, Layout::NHWC, 13);
  const auto cols = im2col(in, 1, 1, 1);
  EXPECT_EQ(cols[0].values.size(), in.size());
  EXPECT_EQ(std::memcmp(cols[0].values.data(), in.data(), in.bytes()), 0);
}

TEST(Im2col, BufferCounts) {
  const ConvProblem conv5 = find_benchmark("conv5")->problem(1);
  EXPECT_EQ(im2col_buffer_elems_per_image(conv5), 960000u);
  EXPECT_EQ(im2col_buffer_elems(find_benchmark("conv5")->problem(3)), 3u * 960000u);
  const ConvProblem unit = ConvProblem::make(2, 3, 4, 5, 1, 1, 1, 1);
  EXPECT_EQ(im2col_buffer_elems(unit), unit.input_dims().count());
}

TEST(Im2col, BatchMinorLayoutsAreUnsupported) {
  for (Layout l : {Layout::CHWN, Layout::CHWN8}) {
    const Tensor in({1, 1, 3, 3}, l);
    const Tensor f({1, 1, 2, 2}, l);
    EXPECT_THROW(im2col(in, 2, 2, 1), UnsupportedLayout);
    EXPECT_THROW(conv_im2col(in, f, 1), UnsupportedLayout);
  }
}

TEST(ConvIm2col, OnesGiveFour) {
  for (Layout l : {Layout::NHWC, Layout::NCHW}) {
    Tensor in({1, 1, 3, 3}, l), f({1, 1, 2, 2}, l);
    fill_constant(in, 1.0f);
    fill_constant(f, 1.0f);
    for (bool blocked : {true, false}) {
      const Tensor out = conv_im2col(in, f, 1, {}, blocked);
      EXPECT_EQ(out.dims(), (Dims{1, 1, 2, 2}));
      for (float v : out.values()) EXPECT_EQ(v, 4.0f);
    }
  }
}

TEST(ConvIm2col, Conv9BatchTwoMatchesOracle) {
  const ConvProblem p = find_benchmark("conv9")->problem(2);
  Tensor in(p.input_dims(), Layout::NCHW), f(p.filter_dims(), Layout::NCHW);
  fill_random(in, 42);
  fill_random(f, 43);
  const Tensor ref = conv_direct_naive(in, f, 1, Accumulation::F64);
  for (Layout l : {Layout::NHWC, Layout::NCHW}) {
    const Tensor li = convert_layout(in, l), lf = convert_layout(f, l);
    const Tensor out = conv_im2col(li, lf, 1);
    EXPECT_EQ(out.layout(), l);
    EXPECT_LE(max_relative_error(out, ref), kTolerance);
    TuningParams one;
    one.threads = 1;
    EXPECT_TRUE(bitwise_equal(conv_im2col(li, lf, 1, one), out));
  }
}

TEST(FilterMatrix, RowOrderMatchesColumns) {
  const Tensor f = testing::random_tensor({4, 3, 2, 2}, Layout::NCHW, 15);
  const Matrix nhwc = filter_matrix(f, Layout::NHWC);
  const Matrix nchw = filter_matrix(f, Layout::NCHW);
  ASSERT_EQ(nhwc.rows(), 12u);
  ASSERT_EQ(nhwc.cols(), 4u);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t v = 0; v < 2; ++v) {
          EXPECT_EQ(nhwc((u * 2 + v) * 3 + r, j), f.at(j, r, u, v));
          EXPECT_EQ(nchw((r * 2 + u) * 2 + v, j), f.at(j, r, u, v));
        }
}

}  // namespace
}  // namespace convlab
