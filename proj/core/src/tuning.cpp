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

#include "convlab/tuning.hpp"

#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace convlab {

void validate(const TuningParams& tuning) {
  if (tuning.w_ob == 0 || tuning.w_ob > kMaxRegisterBlock)
    throw std::invalid_argument("w_ob must be in [1, 8]");
  if (tuning.gemm.mb == 0 || tuning.gemm.kb == 0 || tuning.gemm.nb == 0)
    throw std::invalid_argument("GEMM tiles must be positive");
  if (tuning.threads < 0) throw std::invalid_argument("thread count must be non-negative");
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace convlab
