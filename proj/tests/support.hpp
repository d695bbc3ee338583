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

// Test-only reference code. Nothing here calls into the library's kernels:
// indices come from the layout formulas written out by hand and
// convolutions from plain nested loops over logical coordinates.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "convlab/tensor.hpp"

namespace convlab::testing {

inline std::size_t hand_index(Layout layout, const Dims& d, std::size_t n, std::size_t c,
                              std::size_t h, std::size_t w) {
  switch (layout) {
    case Layout::NCHW: return ((n * d.c + c) * d.h + h) * d.w + w;
    case Layout::NHWC: return ((n * d.h + h) * d.w + w) * d.c + c;
    case Layout::CHWN: return ((c * d.h + h) * d.w + w) * d.n + n;
    case Layout::CHWN8: return (((n / 8 * d.c + c) * d.h + h) * d.w + w) * 8 + n % 8;
  }
  return 0;
}

/// Logical 4-D array of doubles, indexed (n, c, h, w).
struct Grid {
  Dims dims;
  std::vector<double> v;

  explicit Grid(Dims d) : dims(d), v(d.count(), 0.0) {}
  double& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return v[((n * dims.c + c) * dims.h + h) * dims.w + w];
  }
  double operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return v[((n * dims.c + c) * dims.h + h) * dims.w + w];
  }
};

inline Grid to_grid(const Tensor& t) {
  Grid g(t.dims());
  const Dims& d = t.dims();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w)
          g(n, c, h, w) = t.data()[hand_index(t.layout(), d, n, c, h, w)];
  return g;
}

/// Brute-force cross-correlation in double precision.
inline Grid brute_conv(const Grid& in, const Grid& f, std::size_t s) {
  const std::size_t h_o = (in.dims.h - f.dims.h) / s + 1;
  const std::size_t w_o = (in.dims.w - f.dims.w) / s + 1;
  Grid out({in.dims.n, f.dims.n, h_o, w_o});
  for (std::size_t i = 0; i < in.dims.n; ++i)
    for (std::size_t j = 0; j < f.dims.n; ++j)
      for (std::size_t m = 0; m < h_o; ++m)
        for (std::size_t n = 0; n < w_o; ++n) {
          double acc = 0.0;
          for (std::size_t r = 0; r < in.dims.c; ++r)
            for (std::size_t u = 0; u < f.dims.h; ++u)
              for (std::size_t v = 0; v < f.dims.w; ++v)
                acc += in(i, r, m * s + u, n * s + v) * f(j, r, u, v);
          out(i, j, m, n) = acc;
        }
  return out;
}

/// max |got - ref| / (1 + |ref|) over logical coordinates.
inline double grid_error(const Tensor& got, const Grid& ref) {
  const Grid g = to_grid(got);
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.v.size(); ++k) {
    const double e = std::abs(g.v[k] - ref.v[k]) / (1.0 + std::abs(ref.v[k]));
    if (std::isnan(e)) return INFINITY;
    worst = std::max(worst, e);
  }
  return worst;
}

/// Tensor with independent uniform [-1, 1] values written through the hand
/// index, so test data never depends on fill_random.
inline Tensor random_tensor(Dims d, Layout layout, std::uint64_t seed) {
  Tensor t(d, layout);
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w) t.data()[hand_index(layout, d, n, c, h, w)] = dist(rng);
  return t;
}

inline constexpr Layout kAllLayouts[] = {Layout::NCHW, Layout::NHWC, Layout::CHWN, Layout::CHWN8};

}  // namespace convlab::testing
