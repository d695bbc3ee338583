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
#include <cstdint>

#include "convlab/tensor.hpp"
#include "convlab/tuning.hpp"

namespace convlab {

enum class Accumulation { F32, F64 };

/// Reference convolution on the original tensors:
///
///   O(i, j, m, n) = sum_{r,u,v} I(i, r, m*s + u, n*s + v) * F(j, r, u, v)
///
/// Any input and filter layout is accepted; the output uses the input's
/// layout. With Accumulation::F64 every sum is carried in double and rounded
/// once, which makes it the reference the other kernels are checked against.
Tensor conv_direct_naive(const Tensor& input, const Tensor& filter, std::size_t s,
                         Accumulation accum = Accumulation::F32);

/// Optimized direct convolution. Output rows (i, m) form one coalesced
/// parallel loop; each row walks output channels, then register blocks of
/// output columns. Per layout:
///
///  * NHWC: eight contiguous (w_f, c_i) elements per FMA, one horizontal sum
///    per output; the filter is read as NHWC (converted if necessary).
///  * NCHW: eight adjacent output columns per FMA (gathered for s > 1).
///  * CHWN / CHWN8: eight batch entries per FMA.
Tensor conv_direct_opt(const Tensor& input, const Tensor& filter, std::size_t s,
                       const TuningParams& tuning = {});

/// 2 * n_i * c_o * h_o * w_o * c_i * h_f * w_f (unpadded batch).
std::uint64_t flops(const ConvProblem& p);

}  // namespace convlab
