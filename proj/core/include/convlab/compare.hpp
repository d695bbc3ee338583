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

#include "convlab/tensor.hpp"

namespace convlab {

/// Element-wise bound |got - ref| <= kTolerance * (1 + |ref|). K <= 4608
/// products at f32 epsilon give about 5.5e-4; doubled.
inline constexpr double kTolerance = 1e-3;

/// max over logical coordinates of |got - ref| / (1 + |ref|). Layouts may
/// differ. Throws ShapeMismatch when the logical dims differ.
double max_relative_error(const Tensor& got, const Tensor& ref);

/// True when both tensors hold the same logical values bit for bit.
bool bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace convlab
