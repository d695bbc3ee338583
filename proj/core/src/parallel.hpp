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

#include "convlab/tuning.hpp"

namespace convlab::detail {

/// Runs body(k) for k in [0, count) with guided scheduling. `body` must not
/// throw and must write only state owned by iteration k.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const auto n = static_cast<std::int64_t>(count);
  const int workers = resolve_threads(threads);
#pragma omp parallel for schedule(guided) num_threads(workers)
  for (std::int64_t k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
}

}  // namespace convlab::detail
