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

#include "convlab/compare.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "convlab/error.hpp"

namespace convlab {

namespace {

void require_same_dims(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) {
    std::ostringstream msg;
    msg << "tensor dims differ: " << a.dims() << " vs " << b.dims();
    throw ShapeMismatch(msg.str());
  }
}

template <class Fn>
void for_each_pair(const Tensor& a, const Tensor& b, Fn&& fn) {
  const Dims& d = a.dims();
  const Strides& sa = a.strides();
  const Strides& sb = b.strides();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w)
          fn(a.data()[sa.offset(n, c, h, w)], b.data()[sb.offset(n, c, h, w)]);
}

}  // namespace

double max_relative_error(const Tensor& got, const Tensor& ref) {
  require_same_dims(got, ref);
  double worst = 0.0;
  for_each_pair(got, ref, [&](float g, float r) {
    const double err = std::abs(double{g} - double{r}) / (1.0 + std::abs(double{r}));
    worst = std::isnan(err) ? std::numeric_limits<double>::infinity() : std::max(worst, err);
  });
  return worst;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b);
  bool equal = true;
  for_each_pair(a, b, [&](float x, float y) {
    equal = equal && std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
  });
  return equal;
}

}  // namespace convlab
