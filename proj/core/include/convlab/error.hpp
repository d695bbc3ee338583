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

#include <stdexcept>
#include <string>

namespace convlab {

/// Coordinate outside the logical extent of a tensor.
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Convolution geometry that cannot produce an output (filter larger than
/// input, zero stride, zero extents).
class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operands whose extents disagree (input channels vs filter channels,
/// inner GEMM dimensions, ...).
class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The algorithm has no implementation for the requested tensor layout.
class UnsupportedLayout : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed tensor dump or CSV input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace convlab
