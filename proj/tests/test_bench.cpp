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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "convlab/bench.hpp"
#include "convlab/conv_direct.hpp"
#include "convlab/error.hpp"
#include "convlab/im2col_gemm.hpp"
#include "convlab/im2win.hpp"

namespace convlab {
namespace {

struct Row {
  const char* name;
  std::size_t c_i, h_i, w_i, c_o, h_f, w_f, s, out;
};

// Table of the twelve layers with their output extents.
constexpr Row kRows[] = {
    {"conv1", 3, 227, 227, 96, 11, 11, 4, 55},   {"conv2", 3, 231, 231, 96, 11, 11, 4, 56},
    {"conv3", 3, 227, 227, 64, 7, 7, 2, 111},    {"conv4", 64, 224, 224, 64, 7, 7, 2, 109},
    {"conv5", 96, 24, 24, 256, 5, 5, 1, 20},     {"conv6", 256, 12, 12, 512, 3, 3, 1, 10},
    {"conv7", 3, 224, 224, 64, 3, 3, 1, 222},    {"conv8", 64, 112, 112, 128, 3, 3, 1, 110},
    {"conv9", 64, 56, 56, 64, 3, 3, 1, 54},      {"conv10", 128, 28, 28, 128, 3, 3, 1, 26},
    {"conv11", 256, 14, 14, 256, 3, 3, 1, 12},   {"conv12", 512, 7, 7, 512, 3, 3, 1, 5},
};

TEST(Benchmarks, BuiltinTableFieldForField) {
  const auto table = builtin_benchmarks();
  ASSERT_EQ(table.size(), std::size(kRows));
  for (std::size_t k = 0; k < table.size(); ++k) {
    const BenchmarkDef& d = table[k];
    const Row& r = kRows[k];
    EXPECT_EQ(d.name, r.name);
    EXPECT_EQ(d.c_i, r.c_i);
    EXPECT_EQ(d.h_i, r.h_i);
    EXPECT_EQ(d.w_i, r.w_i);
    EXPECT_EQ(d.c_o, r.c_o);
    EXPECT_EQ(d.h_f, r.h_f);
    EXPECT_EQ(d.w_f, r.w_f);
    EXPECT_EQ(d.s, r.s);
    const ConvProblem p = d.problem(1);
    EXPECT_EQ(p.h_o, r.out) << r.name;
    EXPECT_EQ(p.w_o, r.out) << r.name;
    EXPECT_EQ(find_benchmark(r.name), &d);
  }
  EXPECT_EQ(find_benchmark("conv13"), nullptr);
}

TEST(Benchmarks, FlopsOfConv12AtBatch128) {
  EXPECT_EQ(flops(find_benchmark("conv12")->problem(128)), 15'099'494'400ull);
}

TEST(Peak, ReferenceServer) {
  EXPECT_EQ(peak_gflops(MachineSpec::reference_server()), 3584.0);
  EXPECT_EQ(peak_gflops(MachineSpec::parse("2,28,2.0,2,256")), 3584.0);
}

TEST(Peak, SixtyFourBitElementCases) {
  MachineSpec unit{1, 1, 1.0, 1, 64, 64};
  EXPECT_DOUBLE_EQ(peak_gflops(unit) * 1e9, 2.0);
  EXPECT_DOUBLE_EQ(peak_gflops(MachineSpec::parse("1,8,3.5,2,256,64")), 448.0);
  // The same machine counted in f32 lanes.
  EXPECT_DOUBLE_EQ(peak_gflops(MachineSpec::parse("1,8,3.5,2,256")), 896.0);
}

TEST(Peak, InvalidSpecs) {
  EXPECT_THROW(MachineSpec::parse("2,28,2.0,2"), std::invalid_argument);
  EXPECT_THROW(MachineSpec::parse("2,28,2.0,2,100"), std::invalid_argument);
  EXPECT_THROW(MachineSpec::parse("0,28,2.0,2,256"), std::invalid_argument);
  EXPECT_THROW(MachineSpec::parse("2,28,fast,2,256"), std::invalid_argument);
  EXPECT_THROW(MachineSpec::parse("2,28,-1,2,256"), std::invalid_argument);
  EXPECT_THROW(MachineSpec::parse("2,28,2.0,2,256,48"), std::invalid_argument);
}

TEST(AuxBytes, Conv5TransformRatioIsExactlyTwentyFourPercent) {
  for (std::size_t batch : {1u, 4u, 128u}) {
    const ConvProblem p = find_benchmark("conv5")->problem(batch);
    const std::uint64_t win = im2win_buffer_elems(p);
    const std::uint64_t col = im2col_buffer_elems(p);
    EXPECT_EQ(win * 100, col * 24) << batch;
  }
  EXPECT_EQ(im2win_buffer_elems(find_benchmark("conv5")->problem(1)), 230400u);
}

TEST(AuxBytes, FormulaPerAlgorithm) {
  const ConvProblem p = find_benchmark("conv9")->problem(3);
  const std::uint64_t filter = 4ull * p.c_o * p.c_i * p.h_f * p.w_f;
  EXPECT_EQ(aux_bytes(Algo::Direct, p), 0u);
  EXPECT_EQ(aux_bytes(Algo::Im2win, p), 4ull * im2win_buffer_elems(p) + filter);
  EXPECT_EQ(aux_bytes(Algo::Im2col, p), 4ull * 3 * 54 * 54 * 64 * 9 + filter);
}

TEST(AuxBytes, Conv4Im2colAtBatch128) {
  const ConvProblem p = find_benchmark("conv4")->problem(128);
  const std::uint64_t transform = 4ull * 128 * 109 * 109 * 64 * 7 * 7;
  EXPECT_EQ(transform, 4ull * im2col_buffer_elems(p));
  EXPECT_NEAR(static_cast<double>(transform) / 1e9, 19.1, 0.05);
  EXPECT_GT(aux_bytes(Algo::Im2col, p), transform);
}

TEST(AuxBytes, OrderingOnEveryRowAndBatch) {
  for (const BenchmarkDef& d : builtin_benchmarks())
    for (std::size_t batch : {1u, 2u, 32u, 128u, 512u}) {
      const ConvProblem p = d.problem(batch);
      const auto direct = aux_bytes(Algo::Direct, p);
      const auto win = aux_bytes(Algo::Im2win, p);
      const auto col = aux_bytes(Algo::Im2col, p);
      EXPECT_LT(direct, win) << d.name;
      EXPECT_LT(win, col) << d.name;
    }
}

CellConfig cell(Algo a, Variant v, Layout l, std::size_t batch, std::size_t repeats) {
  CellConfig c;
  c.algo = a;
  c.variant = v;
  c.layout = l;
  c.batch = batch;
  c.repeats = repeats;
  return c;
}

TEST(RunCell, Conv1Im2winNhwcVerifies) {
  CellConfig c = cell(Algo::Im2win, Variant::Opt, Layout::NHWC, 4, 3);
  c.verify = true;
  const BenchRecord r = run_cell(*find_benchmark("conv1"), c);
  EXPECT_FALSE(r.skipped());
  EXPECT_TRUE(r.verified);
  EXPECT_FALSE(r.verify_failed);
  EXPECT_EQ(r.output_dims, (Dims{4, 96, 55, 55}));
  EXPECT_GT(r.best_seconds, 0.0);
  EXPECT_NEAR(r.gflops, static_cast<double>(flops(find_benchmark("conv1")->problem(4))) /
                            r.best_seconds / 1e9,
              1e-9 * r.gflops);
  EXPECT_NEAR(r.peak_pct, r.gflops / 3584.0 * 100.0, 1e-12);
  EXPECT_LE(r.gflops, 3584.0 * 1.05);
}

TEST(RunCell, NonTimingFieldsRepeat) {
  CellConfig c = cell(Algo::Direct, Variant::Opt, Layout::CHWN8, 3, 1);
  c.verify = true;
  const BenchRecord a = run_cell(*find_benchmark("conv12"), c);
  const BenchRecord b = run_cell(*find_benchmark("conv12"), c);
  EXPECT_EQ(a.verified, b.verified);
  EXPECT_TRUE(a.verified);
  EXPECT_EQ(a.aux_bytes, b.aux_bytes);
  EXPECT_EQ(a.max_rel_error, b.max_rel_error);
}

TEST(RunCell, UnsupportedAndOverBudgetCellsAreSkipped) {
  const BenchRecord u =
      run_cell(*find_benchmark("conv9"), cell(Algo::Im2col, Variant::Opt, Layout::CHWN, 2, 1));
  EXPECT_EQ(u.skip_reason, "unsupported-layout");
  CellConfig c = cell(Algo::Im2col, Variant::Opt, Layout::NHWC, 128, 1);
  c.mem_budget = 1 << 20;
  const BenchRecord m = run_cell(*find_benchmark("conv4"), c);
  EXPECT_EQ(m.skip_reason, "memory-budget");
  EXPECT_EQ(m.aux_bytes, aux_bytes(Algo::Im2col, find_benchmark("conv4")->problem(128)));
}

TEST(RunCell, TransformCanBeExcluded) {
  CellConfig c = cell(Algo::Im2win, Variant::Opt, Layout::NCHW, 2, 1);
  c.verify = true;
  c.include_transform = false;
  EXPECT_TRUE(run_cell(*find_benchmark("conv11"), c).verified);
}

TEST(BatchScaling, ChwnAtThirtyTwoAndOneHundredTwentyEight) {
  CellConfig c = cell(Algo::Im2win, Variant::Opt, Layout::CHWN, 0, 1);
  c.verify = true;
  const std::size_t batches[] = {32, 128};
  const auto records = batch_scaling(*find_benchmark("conv9"), c, batches);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].batch, 32u);
  EXPECT_EQ(records[1].batch, 128u);
  for (const BenchRecord& r : records) EXPECT_TRUE(r.verified) << r.batch;
}

TEST(BatchScaling, EmptyListAndBudgetSkips) {
  const CellConfig c = cell(Algo::Im2win, Variant::Opt, Layout::NHWC, 0, 1);
  EXPECT_TRUE(batch_scaling(*find_benchmark("conv9"), c, {}).empty());
  CellConfig small = c;
  small.mem_budget = 64ull << 20;
  const auto records = batch_scaling(*find_benchmark("conv9"), small, kScalingBatches);
  ASSERT_EQ(records.size(), std::size(kScalingBatches));
  EXPECT_EQ(records.back().skip_reason, "memory-budget");
  EXPECT_EQ(records.back().batch, 512u);
}

BenchRecord sample(int k) {
  BenchRecord r;
  r.bench = "conv" + std::to_string(k % 12 + 1);
  r.algo = static_cast<Algo>(k % 3);
  r.variant = k % 2 ? Variant::Naive : Variant::Opt;
  r.layout = static_cast<Layout>(k % 4);
  r.batch = 4 + k;
  r.threads = 1 + k % 3;
  r.best_seconds = 0.0123456 * (k + 1);
  r.gflops = 12.3456 * (k + 1);
  r.peak_pct = 0.345678 * (k + 1);
  r.aux_bytes = 1000000ull * k + 7;
  r.verified = k % 3 == 0;
  return r;
}

TEST(Csv, HeaderOnlyForNoRecords) {
  std::ostringstream os;
  write_csv({}, os);
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
}

TEST(Csv, OneRecordIsTwoLines) {
  const BenchRecord r = sample(0);
  std::ostringstream os;
  write_csv({&r, 1}, os);
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n" +
                          "conv1,direct,opt,nchw,4,1,0.0123456,12.3456,0.345678,7,true\n");
}

// Reals are written with six significant digits: half a unit in the sixth
// digit is at most 5e-6 relative.
constexpr double kSixDigits = 5e-6;

TEST(Csv, TenRecordsRoundTrip) {
  std::vector<BenchRecord> records;
  for (int k = 0; k < 10; ++k) records.push_back(sample(k));
  const auto path = std::filesystem::temp_directory_path() / "convlab_csv_test.csv";
  emit_csv(records, path);
  std::ifstream is(path);
  const auto back = parse_csv(is);
  ASSERT_EQ(back.size(), 10u);
  for (int k = 0; k < 10; ++k) {
    const BenchRecord& a = records[k];
    const BenchRecord& b = back[k];
    EXPECT_EQ(a.bench, b.bench);
    EXPECT_EQ(a.algo, b.algo);
    EXPECT_EQ(a.variant, b.variant);
    EXPECT_EQ(a.layout, b.layout);
    EXPECT_EQ(a.batch, b.batch);
    EXPECT_EQ(a.threads, b.threads);
    EXPECT_NEAR(a.best_seconds, b.best_seconds, kSixDigits * a.best_seconds);
    EXPECT_NEAR(a.gflops, b.gflops, kSixDigits * a.gflops);
    EXPECT_NEAR(a.peak_pct, b.peak_pct, kSixDigits * a.peak_pct);
    EXPECT_EQ(a.aux_bytes, b.aux_bytes);
    EXPECT_EQ(a.verified, b.verified);
  }
  std::filesystem::remove(path);
}

TEST(Csv, SkippedRecordsAreOmitted) {
  std::vector<BenchRecord> records{sample(1), sample(2)};
  records[0].skip_reason = "memory-budget";
  std::ostringstream os;
  write_csv(records, os);
  std::istringstream is(os.str());
  EXPECT_EQ(parse_csv(is).size(), 1u);
}

TEST(Csv, MalformedInputIsRejected) {
  const std::string h = std::string(kCsvHeader) + "\n";
  for (const std::string& bad :
       {std::string("bench,algo\n"), h + "conv1,direct,opt,nchw,4,1,0.1,1,1,7\n",
        h + "conv1,fft,opt,nchw,4,1,0.1,1,1,7,true\n", h + "conv1,direct,opt,nchw,x,1,0.1,1,1,7,true\n",
        h + "conv1,direct,opt,nchw,4,1,0.1,1,1,7,yes\n"}) {
    std::istringstream is(bad);
    EXPECT_THROW(parse_csv(is), FormatError) << bad;
  }
  EXPECT_THROW(emit_csv({}, "/nonexistent-dir/x.csv"), FormatError);
}

TEST(Names, ParseRoundTrip) {
  for (Algo a : {Algo::Direct, Algo::Im2win, Algo::Im2col}) EXPECT_EQ(parse_algo(to_string(a)), a);
  for (Variant v : {Variant::Naive, Variant::Opt}) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_FALSE(parse_algo("winograd").has_value());
  EXPECT_FALSE(parse_variant("fast").has_value());
  EXPECT_TRUE(supports(Algo::Direct, Layout::CHWN8));
  EXPECT_FALSE(supports(Algo::Im2col, Layout::CHWN8));
}

}  // namespace
}  // namespace convlab
