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

// Eight-lane f32 vector used by all micro-kernels. The portable fallback
// performs the same single-rounding FMA per lane and the same horizontal
// reduction tree, so both builds produce identical bits.

#pragma once

#include <cmath>
#include <cstddef>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define CONVLAB_AVX2 1
#endif

namespace convlab::detail {

inline float fma1(float a, float b, float acc) { return std::fma(a, b, acc); }

#if defined(CONVLAB_AVX2)

struct Vec8 {
  __m256 v;

  static Vec8 zero() { return {_mm256_setzero_ps()}; }
  static Vec8 load(const float* p) { return {_mm256_loadu_ps(p)}; }
  static Vec8 broadcast(float x) { return {_mm256_set1_ps(x)}; }
  /// Lanes p[0], p[stride], ..., p[7 * stride].
  static Vec8 load_strided(const float* p, std::size_t stride) {
    if (stride == 1) return load(p);
    const int s = static_cast<int>(stride);
    const __m256i idx = _mm256_setr_epi32(0, s, 2 * s, 3 * s, 4 * s, 5 * s, 6 * s, 7 * s);
    return {_mm256_i32gather_ps(p, idx, 4)};
  }
  void store(float* p) const { _mm256_storeu_ps(p, v); }
};

inline Vec8 fmadd(Vec8 a, Vec8 b, Vec8 acc) { return {_mm256_fmadd_ps(a.v, b.v, acc.v)}; }

/// ((l0+l4)+(l2+l6)) + ((l1+l5)+(l3+l7))
inline float hsum(Vec8 a) {
  const __m128 lo = _mm256_castps256_ps128(a.v);
  const __m128 hi = _mm256_extractf128_ps(a.v, 1);
  const __m128 s4 = _mm_add_ps(lo, hi);
  const __m128 s2 = _mm_add_ps(s4, _mm_movehl_ps(s4, s4));
  const __m128 s1 = _mm_add_ss(s2, _mm_shuffle_ps(s2, s2, 0x55));
  return _mm_cvtss_f32(s1);
}

#else

struct Vec8 {
  float v[8];

  static Vec8 zero() { return Vec8{}; }
  static Vec8 load(const float* p) {
    Vec8 r;
    for (int i = 0; i < 8; ++i) r.v[i] = p[i];
    return r;
  }
  static Vec8 broadcast(float x) {
    Vec8 r;
    for (float& lane : r.v) lane = x;
    return r;
  }
  static Vec8 load_strided(const float* p, std::size_t stride) {
    Vec8 r;
    for (std::size_t i = 0; i < 8; ++i) r.v[i] = p[i * stride];
    return r;
  }
  void store(float* p) const {
    for (int i = 0; i < 8; ++i) p[i] = v[i];
  }
};

inline Vec8 fmadd(Vec8 a, Vec8 b, Vec8 acc) {
  Vec8 r;
  for (int i = 0; i < 8; ++i) r.v[i] = std::fma(a.v[i], b.v[i], acc.v[i]);
  return r;
}

inline float hsum(Vec8 a) {
  const float* l = a.v;
  return ((l[0] + l[4]) + (l[2] + l[6])) + ((l[1] + l[5]) + (l[3] + l[7]));
}

#endif

}  // namespace convlab::detail
