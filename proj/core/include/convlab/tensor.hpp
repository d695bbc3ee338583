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
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

namespace convlab {

/// Physical ordering of a 4-D tensor. The rightmost letter varies fastest.
/// CHWN8 keeps groups of eight batch entries innermost and the group index
/// outermost.
enum class Layout : std::uint8_t { NCHW = 0, NHWC = 1, CHWN = 2, CHWN8 = 3 };

inline constexpr std::size_t kAlignment = 64;
inline constexpr std::size_t kBatchGroup = 8;

std::string_view to_string(Layout layout);
std::optional<Layout> parse_layout(std::string_view name);

/// True for the layouts that keep the batch index innermost.
constexpr bool is_batch_minor(Layout layout) {
  return layout == Layout::CHWN || layout == Layout::CHWN8;
}

/// Logical extents, always (n, c, h, w) whatever the layout.
struct Dims {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t count() const { return n * c * h * w; }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

std::ostream& operator<<(std::ostream& os, const Dims& dims);

/// Number of stored elements for `dims` in `layout`; CHWN8 rounds the batch
/// up to a multiple of eight.
std::size_t storage_elems(const Dims& dims, Layout layout);

/// Element strides of one layout. For CHWN8 the batch contributes
/// (n / 8) * group + (n % 8); for the other layouts n * n_stride.
struct Strides {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t group = 0;

  static Strides of(const Dims& dims, Layout layout);

  constexpr std::size_t batch_offset(std::size_t n_idx) const {
    return group != 0 ? (n_idx / kBatchGroup) * group + n_idx % kBatchGroup : n_idx * n;
  }
  constexpr std::size_t offset(std::size_t n_idx, std::size_t c_idx, std::size_t h_idx,
                               std::size_t w_idx) const {
    return batch_offset(n_idx) + c_idx * c + h_idx * h + w_idx * w;
  }
};

/// Flat offset of logical (n, c, h, w). Throws BoundsError when a coordinate
/// is outside `dims`.
std::size_t linear_index(const Dims& dims, Layout layout, std::size_t n, std::size_t c,
                         std::size_t h, std::size_t w);

/// 64-byte aligned, zero-initialised float storage with value semantics.
class AlignedBuffer {
 public:
  AlignedBuffer() = default;
  explicit AlignedBuffer(std::size_t count);
  AlignedBuffer(const AlignedBuffer& other);
  AlignedBuffer& operator=(const AlignedBuffer& other);
  AlignedBuffer(AlignedBuffer&&) noexcept = default;
  AlignedBuffer& operator=(AlignedBuffer&&) noexcept = default;

  float* data() { return data_.get(); }
  const float* data() const { return data_.get(); }
  std::size_t size() const { return size_; }
  std::span<float> span() { return {data_.get(), size_}; }
  std::span<const float> span() const { return {data_.get(), size_}; }

 private:
  struct Free {
    void operator()(float* p) const noexcept;
  };
  std::unique_ptr<float[], Free> data_;
  std::size_t size_ = 0;
};

/// Dense 4-D f32 tensor: aligned flat buffer, logical dims and a layout tag.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Dims dims, Layout layout);

  const Dims& dims() const { return dims_; }
  Layout layout() const { return layout_; }
  const Strides& strides() const { return strides_; }

  /// Stored element count (includes CHWN8 batch padding).
  std::size_t size() const { return buffer_.size(); }
  std::size_t bytes() const { return size() * sizeof(float); }
  /// Batch extent as stored; differs from dims().n only for CHWN8.
  std::size_t stored_batch() const;

  float* data() { return buffer_.data(); }
  const float* data() const { return buffer_.data(); }
  std::span<float> values() { return buffer_.span(); }
  std::span<const float> values() const { return buffer_.span(); }

  std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return linear_index(dims_, layout_, n, c, h, w);
  }
  float& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return buffer_.data()[index(n, c, h, w)];
  }
  float at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return buffer_.data()[index(n, c, h, w)];
  }

 private:
  Dims dims_{};
  Layout layout_ = Layout::NCHW;
  Strides strides_{};
  AlignedBuffer buffer_;
};

std::size_t linear_index(const Tensor& t, std::size_t n, std::size_t c, std::size_t h,
                         std::size_t w);

/// Copies `t` into `target`. CHWN8 targets get zero batch padding.
Tensor convert_layout(const Tensor& t, Layout target);

void fill_constant(Tensor& t, float value);

/// Uniform values in [-1, 1] drawn in logical (n, c, h, w) order, so the same
/// seed gives the same logical tensor in every layout. Padding stays zero.
void fill_random(Tensor& t, std::uint64_t seed);

/// Output extents of a stride-s, unpadded convolution.
struct OutputExtent {
  std::size_t h = 0;
  std::size_t w = 0;
  friend constexpr bool operator==(const OutputExtent&, const OutputExtent&) = default;
};

/// floor((in - filter) / s) + 1 per axis. Throws InvalidProblem for a filter
/// larger than the input, zero extents or zero stride.
OutputExtent output_shape(std::size_t h_i, std::size_t w_i, std::size_t h_f, std::size_t w_f,
                          std::size_t s);

/// Full convolution geometry. Filters are stored logically as
/// (c_o, c_i, h_f, w_f) in the (n, c, h, w) slots of a Tensor.
struct ConvProblem {
  std::size_t n_i = 0;
  std::size_t c_i = 0;
  std::size_t c_o = 0;
  std::size_t h_i = 0;
  std::size_t w_i = 0;
  std::size_t h_f = 0;
  std::size_t w_f = 0;
  std::size_t s = 1;
  std::size_t h_o = 0;
  std::size_t w_o = 0;

  static ConvProblem make(std::size_t n_i, std::size_t c_i, std::size_t h_i, std::size_t w_i,
                          std::size_t c_o, std::size_t h_f, std::size_t w_f, std::size_t s);
  /// Derives the geometry from operand tensors; throws ShapeMismatch when the
  /// channel counts disagree.
  static ConvProblem from(const Tensor& input, const Tensor& filter, std::size_t s);

  Dims input_dims() const { return {n_i, c_i, h_i, w_i}; }
  Dims filter_dims() const { return {c_o, c_i, h_f, w_f}; }
  Dims output_dims() const { return {n_i, c_o, h_o, w_o}; }

  friend constexpr bool operator==(const ConvProblem&, const ConvProblem&) = default;
};

/// Debug dump: 32-byte header ("CONVLAB1", layout u8, 3 reserved bytes, four
/// little-endian u32 dims n, c, h, w, 4 reserved bytes) followed by the
/// stored buffer as little-endian f32.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, std::ostream& os);
Tensor read_tensor(std::istream& is);

}  // namespace convlab
