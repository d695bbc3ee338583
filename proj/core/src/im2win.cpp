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

#include "convlab/im2win.hpp"

#include <cstring>

#include "convlab/error.hpp"
#include "parallel.hpp"

namespace convlab {

PermutedFilter::PermutedFilter(Dims dims, Layout base)
    : dims_(dims), base_(base), buffer_(dims.count()) {}

std::size_t PermutedFilter::offset(std::size_t co, std::size_t ci, std::size_t u,
                                   std::size_t v) const {
  const Dims& d = dims_;  // (c_o, c_i, h_f, w_f)
  switch (base_) {
    case Layout::NHWC: return ((co * d.w + v) * d.h + u) * d.c + ci;
    case Layout::NCHW: return ((co * d.c + ci) * d.w + v) * d.h + u;
    case Layout::CHWN:
    case Layout::CHWN8: return ((v * d.h + u) * d.c + ci) * d.n + co;
  }
  return 0;
}

std::size_t im2win_buffer_elems(const ConvProblem& p) {
  return p.n_i * p.c_i * p.h_o * p.w_i * p.h_f;
}

Im2winTensor im2win(const Tensor& input, std::size_t h_f, std::size_t w_f, std::size_t s,
                    int threads) {
  const Dims& in = input.dims();
  const ConvProblem p = ConvProblem::make(in.n, in.c, in.h, in.w, 1, h_f, w_f, s);
  if (input.size() != storage_elems(in, input.layout()))
    throw InvalidProblem("input buffer does not match its layout's storage size");

  const Dims win_dims{p.n_i, p.c_i, p.h_o, p.w_i * p.h_f};
  Im2winTensor out{Tensor(win_dims, input.layout()), p};
  const Strides& src = input.strides();
  const Strides& dst = out.values.strides();
  const float* ip = input.data();
  float* op = out.values.data();

  switch (input.layout()) {
    case Layout::NHWC: {
      // Each (i, m) window row: for every column k and filter row u, copy
      // the c_i contiguous channels of pixel (m*s + u, k).
      const std::size_t c = p.c_i;
      detail::parallel_for(p.n_i * p.h_o, threads, [&](std::size_t im) {
        const std::size_t i = im / p.h_o;
        const std::size_t m = im % p.h_o;
        float* row = op + dst.offset(i, 0, m, 0);
        for (std::size_t k = 0; k < p.w_i; ++k)
          for (std::size_t u = 0; u < h_f; ++u)
            std::memcpy(row + (u + k * h_f) * c, ip + src.offset(i, 0, m * s + u, k),
                        c * sizeof(float));
      });
      break;
    }
    case Layout::NCHW: {
      detail::parallel_for(p.n_i * p.h_o, threads, [&](std::size_t im) {
        const std::size_t i = im / p.h_o;
        const std::size_t m = im % p.h_o;
        for (std::size_t r = 0; r < p.c_i; ++r) {
          float* row = op + dst.offset(i, r, m, 0);
          for (std::size_t u = 0; u < h_f; ++u) {
            const float* irow = ip + src.offset(i, r, m * s + u, 0);
            for (std::size_t k = 0; k < p.w_i; ++k) row[u + k * h_f] = irow[k];
          }
        }
      });
      break;
    }
    case Layout::CHWN:
    case Layout::CHWN8: {
      // Batch-minor: every pixel carries a contiguous batch vector (all n_i
      // for CHWN, one group of eight for CHWN8).
      const bool grouped = input.layout() == Layout::CHWN8;
      const std::size_t groups = grouped ? input.stored_batch() / kBatchGroup : 1;
      const std::size_t lanes = grouped ? kBatchGroup : p.n_i;
      detail::parallel_for(groups * p.h_o, threads, [&](std::size_t gm) {
        const std::size_t g = gm / p.h_o;
        const std::size_t m = gm % p.h_o;
        const std::size_t n0 = g * kBatchGroup;
        for (std::size_t r = 0; r < p.c_i; ++r) {
          float* row = op + dst.offset(n0, r, m, 0);
          for (std::size_t k = 0; k < p.w_i; ++k)
            for (std::size_t u = 0; u < h_f; ++u)
              std::memcpy(row + (u + k * h_f) * dst.w, ip + src.offset(n0, r, m * s + u, k),
                          lanes * sizeof(float));
        }
      });
      break;
    }
  }
  return out;
}

PermutedFilter permute_filter(const Tensor& filter, Layout base) {
  const Dims& d = filter.dims();
  PermutedFilter out(d, base);
  const Strides& src = filter.strides();
  const float* fp = filter.data();
  float* op = out.data();
  for (std::size_t co = 0; co < d.n; ++co)
    for (std::size_t ci = 0; ci < d.c; ++ci)
      for (std::size_t u = 0; u < d.h; ++u)
        for (std::size_t v = 0; v < d.w; ++v) op[out.offset(co, ci, u, v)] = fp[src.offset(co, ci, u, v)];
  return out;
}

PermutedFilter permute_filter(const Tensor& filter) { return permute_filter(filter, filter.layout()); }

Tensor unpermute_filter(const PermutedFilter& filter, Layout layout) {
  const Dims& d = filter.dims();
  Tensor out(d, layout);
  const Strides& dst = out.strides();
  float* op = out.data();
  for (std::size_t co = 0; co < d.n; ++co)
    for (std::size_t ci = 0; ci < d.c; ++ci)
      for (std::size_t u = 0; u < d.h; ++u)
        for (std::size_t v = 0; v < d.w; ++v) op[dst.offset(co, ci, u, v)] = filter.at(co, ci, u, v);
  return out;
}

}  // namespace convlab
