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

#include "convlab/tensor.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "convlab/error.hpp"

namespace convlab {

namespace {

std::size_t round_up(std::size_t value, std::size_t multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

}  // namespace

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::NCHW: return "nchw";
    case Layout::NHWC: return "nhwc";
    case Layout::CHWN: return "chwn";
    case Layout::CHWN8: return "chwn8";
  }
  return "?";
}

std::optional<Layout> parse_layout(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (Layout l : {Layout::NCHW, Layout::NHWC, Layout::CHWN, Layout::CHWN8}) {
    if (lower == to_string(l)) return l;
  }
  return std::nullopt;
}

std::ostream& operator<<(std::ostream& os, const Dims& dims) {
  return os << '(' << dims.n << ',' << dims.c << ',' << dims.h << ',' << dims.w << ')';
}

std::size_t storage_elems(const Dims& dims, Layout layout) {
  const std::size_t n = layout == Layout::CHWN8 ? round_up(dims.n, kBatchGroup) : dims.n;
  return n * dims.c * dims.h * dims.w;
}

Strides Strides::of(const Dims& d, Layout layout) {
  Strides s;
  switch (layout) {
    case Layout::NCHW:
      s.w = 1;
      s.h = d.w;
      s.c = d.h * d.w;
      s.n = d.c * d.h * d.w;
      break;
    case Layout::NHWC:
      s.c = 1;
      s.w = d.c;
      s.h = d.w * d.c;
      s.n = d.h * d.w * d.c;
      break;
    case Layout::CHWN:
      s.n = 1;
      s.w = d.n;
      s.h = d.w * d.n;
      s.c = d.h * d.w * d.n;
      break;
    case Layout::CHWN8:
      s.n = 1;
      s.w = kBatchGroup;
      s.h = d.w * kBatchGroup;
      s.c = d.h * d.w * kBatchGroup;
      s.group = d.c * d.h * d.w * kBatchGroup;
      break;
  }
  return s;
}

std::size_t linear_index(const Dims& dims, Layout layout, std::size_t n, std::size_t c,
                         std::size_t h, std::size_t w) {
  if (n >= dims.n || c >= dims.c || h >= dims.h || w >= dims.w) {
    std::ostringstream msg;
    msg << "coordinate (" << n << ',' << c << ',' << h << ',' << w << ") outside dims " << dims;
    throw BoundsError(msg.str());
  }
  return Strides::of(dims, layout).offset(n, c, h, w);
}

std::size_t linear_index(const Tensor& t, std::size_t n, std::size_t c, std::size_t h,
                         std::size_t w) {
  return t.index(n, c, h, w);
}

void AlignedBuffer::Free::operator()(float* p) const noexcept { std::free(p); }

AlignedBuffer::AlignedBuffer(std::size_t count) : size_(count) {
  if (count == 0) return;
  const std::size_t bytes = round_up(count * sizeof(float), kAlignment);
  auto* raw = static_cast<float*>(std::aligned_alloc(kAlignment, bytes));
  if (raw == nullptr) throw std::bad_alloc();
  std::memset(raw, 0, bytes);
  data_.reset(raw);
}

AlignedBuffer::AlignedBuffer(const AlignedBuffer& other) : AlignedBuffer(other.size_) {
  if (size_ != 0) std::memcpy(data_.get(), other.data_.get(), size_ * sizeof(float));
}

AlignedBuffer& AlignedBuffer::operator=(const AlignedBuffer& other) {
  if (this != &other) *this = AlignedBuffer(other);
  return *this;
}

Tensor::Tensor(Dims dims, Layout layout)
    : dims_(dims),
      layout_(layout),
      strides_(Strides::of(dims, layout)),
      buffer_(storage_elems(dims, layout)) {}

std::size_t Tensor::stored_batch() const {
  return layout_ == Layout::CHWN8 ? round_up(dims_.n, kBatchGroup) : dims_.n;
}

Tensor convert_layout(const Tensor& t, Layout target) {
  Tensor out(t.dims(), target);
  const Dims& d = t.dims();
  const Strides& src = t.strides();
  const Strides& dst = out.strides();
  const float* in = t.data();
  float* o = out.data();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t c = 0; c < d.c; ++c) {
      for (std::size_t h = 0; h < d.h; ++h) {
        const std::size_t si = src.offset(n, c, h, 0);
        const std::size_t di = dst.offset(n, c, h, 0);
        for (std::size_t w = 0; w < d.w; ++w) o[di + w * dst.w] = in[si + w * src.w];
      }
    }
  }
  return out;
}

void fill_constant(Tensor& t, float value) {
  const Dims& d = t.dims();
  const Strides& s = t.strides();
  float* p = t.data();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w) p[s.offset(n, c, h, w)] = value;
}

void fill_random(Tensor& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  const Dims& d = t.dims();
  const Strides& s = t.strides();
  float* p = t.data();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t h = 0; h < d.h; ++h)
        for (std::size_t w = 0; w < d.w; ++w) p[s.offset(n, c, h, w)] = dist(rng);
}

OutputExtent output_shape(std::size_t h_i, std::size_t w_i, std::size_t h_f, std::size_t w_f,
                          std::size_t s) {
  if (s == 0) throw InvalidProblem("stride must be at least 1");
  if (h_f == 0 || w_f == 0 || h_i == 0 || w_i == 0)
    throw InvalidProblem("convolution extents must be positive");
  if (h_f > h_i || w_f > w_i) {
    std::ostringstream msg;
    msg << "filter " << h_f << 'x' << w_f << " larger than input " << h_i << 'x' << w_i;
    throw InvalidProblem(msg.str());
  }
  return {(h_i - h_f) / s + 1, (w_i - w_f) / s + 1};
}

ConvProblem ConvProblem::make(std::size_t n_i, std::size_t c_i, std::size_t h_i, std::size_t w_i,
                              std::size_t c_o, std::size_t h_f, std::size_t w_f, std::size_t s) {
  if (n_i == 0 || c_i == 0 || c_o == 0) throw InvalidProblem("batch and channel counts must be positive");
  const OutputExtent out = output_shape(h_i, w_i, h_f, w_f, s);
  return {n_i, c_i, c_o, h_i, w_i, h_f, w_f, s, out.h, out.w};
}

ConvProblem ConvProblem::from(const Tensor& input, const Tensor& filter, std::size_t s) {
  const Dims& in = input.dims();
  const Dims& f = filter.dims();
  if (in.c != f.c) {
    std::ostringstream msg;
    msg << "input channels " << in.c << " do not match filter channels " << f.c;
    throw ShapeMismatch(msg.str());
  }
  return make(in.n, in.c, in.h, in.w, f.n, f.h, f.w, s);
}

// Tensor dump ---------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'O', 'N', 'V', 'L', 'A', 'B', '1'};
constexpr std::size_t kHeaderBytes = 32;

void put_u32(unsigned char* dst, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) dst[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* src) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{src[i]} << (8 * i);
  return v;
}

}  // namespace

void write_tensor(const Tensor& t, std::ostream& os) {
  std::array<unsigned char, kHeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), kMagic.size());
  header[8] = static_cast<unsigned char>(t.layout());
  const Dims& d = t.dims();
  put_u32(header.data() + 12, static_cast<std::uint32_t>(d.n));
  put_u32(header.data() + 16, static_cast<std::uint32_t>(d.c));
  put_u32(header.data() + 20, static_cast<std::uint32_t>(d.h));
  put_u32(header.data() + 24, static_cast<std::uint32_t>(d.w));
  os.write(reinterpret_cast<const char*>(header.data()), header.size());
  for (float v : t.values()) {
    std::array<unsigned char, 4> bytes{};
    put_u32(bytes.data(), std::bit_cast<std::uint32_t>(v));
    os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  if (!os) throw FormatError("failed to write tensor");
}

Tensor read_tensor(std::istream& is) {
  std::array<unsigned char, kHeaderBytes> header{};
  if (!is.read(reinterpret_cast<char*>(header.data()), header.size()))
    throw FormatError("truncated tensor header");
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0)
    throw FormatError("bad tensor magic");
  if (header[8] > static_cast<unsigned char>(Layout::CHWN8)) throw FormatError("bad layout tag");
  const Dims dims{get_u32(header.data() + 12), get_u32(header.data() + 16),
                  get_u32(header.data() + 20), get_u32(header.data() + 24)};
  Tensor t(dims, static_cast<Layout>(header[8]));
  for (float& v : t.values()) {
    std::array<unsigned char, 4> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
      throw FormatError("truncated tensor payload");
    v = std::bit_cast<float>(get_u32(bytes.data()));
  }
  return t;
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string());
  write_tensor(t, os);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_tensor(is);
}

}  // namespace convlab
