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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convlab/tensor.hpp"
#include "convlab/tuning.hpp"

namespace convlab {

enum class Algo { Direct, Im2win, Im2col };
enum class Variant { Naive, Opt };

std::string_view to_string(Algo algo);
std::string_view to_string(Variant variant);
std::optional<Algo> parse_algo(std::string_view name);
std::optional<Variant> parse_variant(std::string_view name);

/// Whether `algo` has an implementation for `layout` (im2col: NHWC/NCHW).
bool supports(Algo algo, Layout layout);

/// Runs one convolution. Naive direct accumulates in f32; naive im2col uses
/// the untiled GEMM.
Tensor run_convolution(Algo algo, Variant variant, const Tensor& input, const Tensor& filter,
                       std::size_t s, const TuningParams& tuning = {});

/// One convolution layer of the benchmark suite.
struct BenchmarkDef {
  std::string name;
  std::size_t c_i = 0;
  std::size_t h_i = 0;
  std::size_t w_i = 0;
  std::size_t c_o = 0;
  std::size_t h_f = 0;
  std::size_t w_f = 0;
  std::size_t s = 1;

  ConvProblem problem(std::size_t batch) const {
    return ConvProblem::make(batch, c_i, h_i, w_i, c_o, h_f, w_f, s);
  }
};

/// conv1 .. conv12.
std::span<const BenchmarkDef> builtin_benchmarks();
const BenchmarkDef* find_benchmark(std::string_view name);

struct MachineSpec {
  std::size_t processors = 2;
  std::size_t cores_per_processor = 28;
  double clock_hz = 2.0e9;
  std::size_t fma_units = 2;
  std::size_t vector_bits = 256;
  /// Width of one arithmetic element; 32 for the f32 kernels.
  std::size_t element_bits = 32;

  /// Two Xeon Gold 6330 (28 cores, 2.0 GHz, AVX2 with two FMA ports).
  static MachineSpec reference_server() { return {}; }
  /// "procs,cores,ghz,fma,bits[,element_bits]".
  static MachineSpec parse(std::string_view text);
  /// Throws std::invalid_argument on non-positive fields or vector_bits not
  /// a multiple of 64.
  void validate() const;
};

/// processors * cores * clock * 2 * fma_units * (vector_bits / element_bits) / 1e9.
double peak_gflops(const MachineSpec& m);

/// Auxiliary bytes the algorithm allocates beyond input, filter and output:
/// direct 0; im2win window rows plus the permuted filter; im2col the column
/// matrices plus the filter matrix.
std::uint64_t aux_bytes(Algo algo, const ConvProblem& p);

/// Everything a cell keeps resident: operands, output, auxiliary buffers and
/// (when verifying) the reference copies.
std::uint64_t footprint_bytes(Algo algo, const ConvProblem& p, Layout layout, bool verify);

struct BenchRecord {
  std::string bench;
  Algo algo = Algo::Direct;
  Variant variant = Variant::Opt;
  Layout layout = Layout::NHWC;
  std::size_t batch = 0;
  int threads = 0;
  double best_seconds = 0.0;
  double gflops = 0.0;
  double peak_pct = 0.0;
  std::uint64_t aux_bytes = 0;
  bool verified = false;

  // Not part of the CSV.
  std::string skip_reason;
  bool verify_failed = false;
  double max_rel_error = 0.0;
  Dims output_dims{};

  bool skipped() const { return !skip_reason.empty(); }
};

struct CellConfig {
  Algo algo = Algo::Im2win;
  Variant variant = Variant::Opt;
  Layout layout = Layout::NHWC;
  std::size_t batch = 4;
  std::size_t repeats = 5;
  int threads = 0;
  std::size_t w_ob = 4;
  bool verify = false;
  /// Count the im2win transform and filter permutation inside the timing.
  bool include_transform = true;
  std::uint64_t seed = 42;
  std::uint64_t mem_budget = std::uint64_t{4} << 30;
};

/// Seeds operands, runs one untimed warm-up, then keeps the best wall-clock
/// time of `repeats` runs. Unsupported or over-budget cells come back
/// skipped with reason "unsupported-layout" or "memory-budget".
BenchRecord run_cell(const BenchmarkDef& def, const CellConfig& cfg,
                     const MachineSpec& machine = MachineSpec::reference_server());

inline constexpr std::size_t kScalingBatches[] = {32, 64, 128, 256, 512};

/// One run_cell per batch size (cfg.batch is overridden).
std::vector<BenchRecord> batch_scaling(const BenchmarkDef& def, const CellConfig& cfg,
                                       std::span<const std::size_t> batches,
                                       const MachineSpec& machine = MachineSpec::reference_server());

inline constexpr std::string_view kCsvHeader =
    "bench,algo,variant,layout,batch,threads,best_seconds,gflops,peak_pct,aux_bytes,verified";

/// Header plus one row per non-skipped record; floats with 6 significant
/// digits.
void write_csv(std::span<const BenchRecord> records, std::ostream& os);
void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path);
/// Parses what write_csv produced. Throws FormatError on malformed input.
std::vector<BenchRecord> parse_csv(std::istream& is);

}  // namespace convlab
