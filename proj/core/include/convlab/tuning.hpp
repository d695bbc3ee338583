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

namespace convlab {

/// Vector lanes of the f32 micro-kernels (one 256-bit register).
inline constexpr std::size_t kVecLanes = 8;
/// Largest register block the micro-kernels are instantiated for.
inline constexpr std::size_t kMaxRegisterBlock = 8;

struct GemmTiles {
  std::size_t mb = 64;
  std::size_t kb = 256;
  std::size_t nb = 64;
};

/// Knobs shared by the optimized kernels. None of them changes results:
/// every output element is reduced in a fixed order by exactly one worker.
struct TuningParams {
  /// Accumulators kept live per micro-kernel call (1..8). For kernels that
  /// vectorize over output columns each accumulator covers eight columns.
  std::size_t w_ob = 4;
  /// Worker threads; 0 uses the OpenMP default. NUMA placement is left to
  /// the launcher (numactl, OMP_PLACES).
  int threads = 0;
  GemmTiles gemm{};
};

/// Throws std::invalid_argument for w_ob outside [1, kMaxRegisterBlock] or
/// zero GEMM tiles.
void validate(const TuningParams& tuning);

/// Resolved worker count (threads == 0 -> OpenMP default).
int resolve_threads(int threads);

}  // namespace convlab
