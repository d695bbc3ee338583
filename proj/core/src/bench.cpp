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

#include "convlab/bench.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "convlab/compare.hpp"
#include "convlab/conv_direct.hpp"
#include "convlab/conv_im2win.hpp"
#include "convlab/error.hpp"
#include "convlab/im2col_gemm.hpp"
#include "convlab/im2win.hpp"

namespace convlab {

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::Direct: return "direct";
    case Algo::Im2win: return "im2win";
    case Algo::Im2col: return "im2col";
  }
  return "?";
}

std::string_view to_string(Variant variant) {
  return variant == Variant::Naive ? "naive" : "opt";
}

std::optional<Algo> parse_algo(std::string_view name) {
  for (Algo a : {Algo::Direct, Algo::Im2win, Algo::Im2col})
    if (name == to_string(a)) return a;
  return std::nullopt;
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : {Variant::Naive, Variant::Opt})
    if (name == to_string(v)) return v;
  return std::nullopt;
}

bool supports(Algo algo, Layout layout) {
  return algo != Algo::Im2col || layout == Layout::NHWC || layout == Layout::NCHW;
}

Tensor run_convolution(Algo algo, Variant variant, const Tensor& input, const Tensor& filter,
                       std::size_t s, const TuningParams& tuning) {
  const bool opt = variant == Variant::Opt;
  switch (algo) {
    case Algo::Direct:
      return opt ? conv_direct_opt(input, filter, s, tuning) : conv_direct_naive(input, filter, s);
    case Algo::Im2win:
      return opt ? conv_im2win_opt(input, filter, s, tuning) : conv_im2win_naive(input, filter, s);
    case Algo::Im2col:
      return conv_im2col(input, filter, s, tuning, opt);
  }
  throw std::invalid_argument("unknown algorithm");
}

std::span<const BenchmarkDef> builtin_benchmarks() {
  static const std::array<BenchmarkDef, 12> table = {{
      {"conv1", 3, 227, 227, 96, 11, 11, 4},
      {"conv2", 3, 231, 231, 96, 11, 11, 4},
      {"conv3", 3, 227, 227, 64, 7, 7, 2},
      {"conv4", 64, 224, 224, 64, 7, 7, 2},
      {"conv5", 96, 24, 24, 256, 5, 5, 1},
      {"conv6", 256, 12, 12, 512, 3, 3, 1},
      {"conv7", 3, 224, 224, 64, 3, 3, 1},
      {"conv8", 64, 112, 112, 128, 3, 3, 1},
      {"conv9", 64, 56, 56, 64, 3, 3, 1},
      {"conv10", 128, 28, 28, 128, 3, 3, 1},
      {"conv11", 256, 14, 14, 256, 3, 3, 1},
      {"conv12", 512, 7, 7, 512, 3, 3, 1},
  }};
  return table;
}

const BenchmarkDef* find_benchmark(std::string_view name) {
  for (const BenchmarkDef& def : builtin_benchmarks())
    if (def.name == name) return &def;
  return nullptr;
}

// Machine model ---------------------------------------------------------------

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("bad " + std::string(what) + ": '" + std::string(text) + "'");
  return value;
}

}  // namespace

MachineSpec MachineSpec::parse(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 5 && parts.size() != 6)
    throw std::invalid_argument("machine spec is procs,cores,ghz,fma,bits[,element_bits]");
  MachineSpec m;
  m.processors = parse_number<std::size_t>(parts[0], "processor count");
  m.cores_per_processor = parse_number<std::size_t>(parts[1], "core count");
  m.clock_hz = parse_number<double>(parts[2], "clock") * 1e9;
  m.fma_units = parse_number<std::size_t>(parts[3], "FMA unit count");
  m.vector_bits = parse_number<std::size_t>(parts[4], "vector width");
  if (parts.size() == 6) m.element_bits = parse_number<std::size_t>(parts[5], "element width");
  m.validate();
  return m;
}

void MachineSpec::validate() const {
  if (processors == 0 || cores_per_processor == 0 || fma_units == 0 || !(clock_hz > 0.0))
    throw std::invalid_argument("machine spec fields must be positive");
  if (vector_bits == 0 || vector_bits % 64 != 0)
    throw std::invalid_argument("vector width must be a positive multiple of 64 bits");
  if (element_bits == 0 || vector_bits % element_bits != 0)
    throw std::invalid_argument("element width must divide the vector width");
}

double peak_gflops(const MachineSpec& m) {
  m.validate();
  const double lanes = static_cast<double>(m.vector_bits / m.element_bits);
  return static_cast<double>(m.processors) * static_cast<double>(m.cores_per_processor) *
         m.clock_hz * 2.0 * static_cast<double>(m.fma_units) * lanes / 1e9;
}

// Memory accounting -------------------------------------------------------------

std::uint64_t aux_bytes(Algo algo, const ConvProblem& p) {
  const std::uint64_t filter = p.c_o * p.c_i * p.h_f * p.w_f;
  switch (algo) {
    case Algo::Direct: return 0;
    case Algo::Im2win: return sizeof(float) * (std::uint64_t{im2win_buffer_elems(p)} + filter);
    case Algo::Im2col: return sizeof(float) * (std::uint64_t{im2col_buffer_elems(p)} + filter);
  }
  return 0;
}

std::uint64_t footprint_bytes(Algo algo, const ConvProblem& p, Layout layout, bool verify) {
  const std::uint64_t in = sizeof(float) * storage_elems(p.input_dims(), layout);
  const std::uint64_t filt = sizeof(float) * p.filter_dims().count();
  const std::uint64_t out = sizeof(float) * storage_elems(p.output_dims(), layout);
  std::uint64_t total = in + filt + out + aux_bytes(algo, p);
  // Reference operands, reference output and the output kept from warm-up.
  if (verify) total += in + filt + 3 * out;
  return total;
}

// Cells -------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double time_seconds(Fn&& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

BenchRecord run_cell(const BenchmarkDef& def, const CellConfig& cfg, const MachineSpec& machine) {
  BenchRecord rec;
  rec.bench = def.name;
  rec.algo = cfg.algo;
  rec.variant = cfg.variant;
  rec.layout = cfg.layout;
  rec.batch = cfg.batch;
  rec.threads = resolve_threads(cfg.threads);

  const ConvProblem p = def.problem(cfg.batch);
  rec.aux_bytes = aux_bytes(cfg.algo, p);
  if (!supports(cfg.algo, cfg.layout)) {
    rec.skip_reason = "unsupported-layout";
    return rec;
  }
  if (footprint_bytes(cfg.algo, p, cfg.layout, cfg.verify) > cfg.mem_budget) {
    rec.skip_reason = "memory-budget";
    return rec;
  }

  TuningParams tuning;
  tuning.w_ob = cfg.w_ob;
  tuning.threads = cfg.threads;
  validate(tuning);

  Tensor input_ref(p.input_dims(), Layout::NCHW);
  Tensor filter_ref(p.filter_dims(), Layout::NCHW);
  fill_random(input_ref, cfg.seed);
  fill_random(filter_ref, cfg.seed + 1);
  const Tensor input = convert_layout(input_ref, cfg.layout);
  // Filters of the batch-minor family stay CHWN: c_o need not be padded.
  const Layout filter_layout = cfg.layout == Layout::CHWN8 ? Layout::CHWN : cfg.layout;
  const Tensor filter = convert_layout(filter_ref, filter_layout);
  if (!cfg.verify) {
    input_ref = Tensor();
    filter_ref = Tensor();
  }

  const bool split_transform =
      cfg.algo == Algo::Im2win && cfg.variant == Variant::Opt && !cfg.include_transform;
  std::optional<Im2winTensor> window;
  std::optional<PermutedFilter> fhat;
  if (split_transform) {
    window = im2win(input, p.h_f, p.w_f, p.s, cfg.threads);
    fhat = permute_filter(filter, cfg.layout);
  }
  auto run = [&] {
    return split_transform ? conv_im2win_opt(*window, *fhat, tuning)
                           : run_convolution(cfg.algo, cfg.variant, input, filter, p.s, tuning);
  };

  Tensor output = run();  // warm-up
  rec.output_dims = output.dims();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    Tensor scratch;
    best = std::min(best, time_seconds([&] { scratch = run(); }));
  }
  if (cfg.repeats == 0) best = 0.0;
  rec.best_seconds = best;
  if (best > 0.0) {
    rec.gflops = static_cast<double>(flops(p)) / best / 1e9;
    rec.peak_pct = rec.gflops / peak_gflops(machine) * 100.0;
  }

  if (cfg.verify) {
    const Tensor reference = conv_direct_naive(input_ref, filter_ref, p.s, Accumulation::F64);
    rec.max_rel_error = max_relative_error(output, reference);
    rec.verified = rec.max_rel_error <= kTolerance;
    rec.verify_failed = !rec.verified;
  }
  return rec;
}

std::vector<BenchRecord> batch_scaling(const BenchmarkDef& def, const CellConfig& cfg,
                                       std::span<const std::size_t> batches,
                                       const MachineSpec& machine) {
  std::vector<BenchRecord> records;
  records.reserve(batches.size());
  for (std::size_t batch : batches) {
    CellConfig cell = cfg;
    cell.batch = batch;
    records.push_back(run_cell(def, cell, machine));
  }
  return records;
}

// CSV -----------------------------------------------------------------------------

namespace {

std::string format6(double value) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", value);
  return buf.data();
}

}  // namespace

void write_csv(std::span<const BenchRecord> records, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const BenchRecord& r : records) {
    if (r.skipped()) continue;
    os << r.bench << ',' << to_string(r.algo) << ',' << to_string(r.variant) << ','
       << to_string(r.layout) << ',' << r.batch << ',' << r.threads << ','
       << format6(r.best_seconds) << ',' << format6(r.gflops) << ',' << format6(r.peak_pct) << ','
       << r.aux_bytes << ',' << (r.verified ? "true" : "false") << '\n';
  }
}

void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_csv(records, os);
  os.flush();
  if (!os) throw FormatError("failed writing " + path.string());
}

std::vector<BenchRecord> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw FormatError("missing CSV header");
  std::vector<BenchRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw FormatError("CSV row needs 11 fields: " + line);
    BenchRecord r;
    r.bench = std::string(f[0]);
    const auto algo = parse_algo(f[1]);
    const auto variant = parse_variant(f[2]);
    const auto layout = parse_layout(f[3]);
    if (!algo || !variant || !layout) throw FormatError("bad enum field in row: " + line);
    r.algo = *algo;
    r.variant = *variant;
    r.layout = *layout;
    try {
      r.batch = parse_number<std::size_t>(f[4], "batch");
      r.threads = parse_number<int>(f[5], "threads");
      r.best_seconds = parse_number<double>(f[6], "best_seconds");
      r.gflops = parse_number<double>(f[7], "gflops");
      r.peak_pct = parse_number<double>(f[8], "peak_pct");
      r.aux_bytes = parse_number<std::uint64_t>(f[9], "aux_bytes");
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
    if (f[10] != "true" && f[10] != "false") throw FormatError("bad verified field: " + line);
    r.verified = f[10] == "true";
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace convlab
