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

// convbench: sweeps (benchmark x algorithm x variant x layout) cells and
// reports best-of-R timings, GFLOPS, share of machine peak and auxiliary
// memory. Exit status: 0 ok, 1 verification failure, 2 bad arguments.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "convlab/bench.hpp"

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (out.empty()) throw UsageError("empty list");
  return out;
}

// Parses "a,b,..." or "all" with `parse`, whose result must be engaged.
template <class T, class Parse>
std::vector<T> parse_list(const std::string& text, const std::vector<T>& all, Parse parse,
                          const char* what) {
  if (text == "all") return all;
  std::vector<T> out;
  for (const std::string& item : split_list(text)) {
    const std::optional<T> v = parse(item);
    if (!v) throw UsageError(std::string("unknown ") + what + " '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

std::vector<const convlab::BenchmarkDef*> parse_benches(const std::string& text) {
  std::vector<const convlab::BenchmarkDef*> out;
  if (text == "all") {
    for (const auto& def : convlab::builtin_benchmarks()) out.push_back(&def);
    return out;
  }
  for (const std::string& item : split_list(text)) {
    const convlab::BenchmarkDef* def = convlab::find_benchmark(item);
    if (def == nullptr) throw UsageError("unknown benchmark '" + item + "'");
    out.push_back(def);
  }
  return out;
}

void print_header() {
  std::printf("%-7s %-7s %-6s %-6s %6s %4s %12s %10s %8s %14s %s\n", "bench", "algo", "var",
              "layout", "batch", "thr", "best_s", "gflops", "peak%", "aux_bytes", "status");
}

void print_record(const convlab::BenchRecord& r, bool verify) {
  const std::string algo(convlab::to_string(r.algo));
  const std::string variant(convlab::to_string(r.variant));
  const std::string layout(convlab::to_string(r.layout));
  if (r.skipped()) {
    std::printf("%-7s %-7s %-6s %-6s %6zu %4s %12s %10s %8s %14s skipped (%s)\n", r.bench.c_str(),
                algo.c_str(), variant.c_str(), layout.c_str(), r.batch, "-", "-", "-", "-", "-",
                r.skip_reason.c_str());
    return;
  }
  std::string status = "ok";
  if (verify) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s (max rel err %.2e)", r.verified ? "verified" : "MISMATCH",
                  r.max_rel_error);
    status = buf;
  }
  std::printf("%-7s %-7s %-6s %-6s %6zu %4d %12.6g %10.4g %8.3g %14llu %s\n", r.bench.c_str(),
              algo.c_str(), variant.c_str(), layout.c_str(), r.batch, r.threads, r.best_seconds,
              r.gflops, r.peak_pct, static_cast<unsigned long long>(r.aux_bytes), status.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  using namespace convlab;

  CLI::App app{"Direct, im2win and im2col convolution benchmark harness"};
  std::string algo_arg = "all";
  std::string variant_arg = "opt";
  std::string layout_arg = "all";
  std::string bench_arg = "all";
  std::size_t batch = 4;
  std::size_t repeats = 5;
  int threads = 0;
  std::size_t w_ob = 4;
  bool verify = false;
  bool paper_scale = false;
  bool scaling = false;
  bool exclude_transform = false;
  std::string csv_path;
  std::string machine_arg;
  std::uint64_t mem_budget = std::uint64_t{4} << 30;
  std::uint64_t seed = 42;

  app.add_option("--algo", algo_arg, "direct|im2win|im2col, comma list or all")
      ->capture_default_str();
  app.add_option("--variant", variant_arg, "naive|opt, comma list or all")->capture_default_str();
  app.add_option("--layout", layout_arg, "nchw|nhwc|chwn|chwn8, comma list or all")
      ->capture_default_str();
  app.add_option("--bench", bench_arg, "conv1..conv12, comma list or all")->capture_default_str();
  const CLI::Range positive(std::size_t{1}, std::size_t{1} << 32);
  auto* batch_opt =
      app.add_option("--batch", batch, "images per batch")->check(positive)->capture_default_str();
  auto* repeats_opt = app.add_option("--repeats", repeats, "timed runs per cell (best kept)")
                          ->check(positive)
                          ->capture_default_str();
  app.add_option("--threads", threads, "worker threads, 0 = OpenMP default")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--wob", w_ob, "register block width (1..8)")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  app.add_flag("--verify", verify, "compare every cell against the f64 reference");
  app.add_flag("--paper-scale", paper_scale, "batch 128 and 50 repeats unless given explicitly");
  app.add_flag("--scaling", scaling, "sweep batch sizes 32,64,128,256,512");
  app.add_flag("--exclude-transform", exclude_transform,
               "time only the kernel, not the im2win/filter transforms");
  app.add_option("--csv", csv_path, "write records to this CSV file");
  app.add_option("--machine", machine_arg,
                 "procs,cores,ghz,fma,bits[,element_bits] for the peak model");
  app.add_option("--mem-budget", mem_budget, "skip cells whose footprint exceeds this many bytes")
      ->capture_default_str();
  app.add_option("--seed", seed, "operand seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::vector<Algo> algos;
  std::vector<Variant> variants;
  std::vector<Layout> layouts;
  std::vector<const BenchmarkDef*> benches;
  MachineSpec machine = MachineSpec::reference_server();
  try {
    algos = parse_list<Algo>(algo_arg, {Algo::Direct, Algo::Im2win, Algo::Im2col}, parse_algo,
                             "algorithm");
    variants = parse_list<Variant>(variant_arg, {Variant::Naive, Variant::Opt}, parse_variant,
                                   "variant");
    layouts = parse_list<Layout>(layout_arg,
                                 {Layout::NCHW, Layout::NHWC, Layout::CHWN, Layout::CHWN8},
                                 parse_layout, "layout");
    benches = parse_benches(bench_arg);
    if (!machine_arg.empty()) machine = MachineSpec::parse(machine_arg);
  } catch (const std::exception& e) {
    std::cerr << "convbench: " << e.what() << "\n";
    return kExitUsage;
  }

  if (paper_scale) {
    if (batch_opt->count() == 0) batch = 128;
    if (repeats_opt->count() == 0) repeats = 50;
  }

  CellConfig cfg;
  cfg.batch = batch;
  cfg.repeats = repeats;
  cfg.threads = threads;
  cfg.w_ob = w_ob;
  cfg.verify = verify;
  cfg.include_transform = !exclude_transform;
  cfg.seed = seed;
  cfg.mem_budget = mem_budget;

  std::printf("peak %.6g GFLOPS, threads %d, repeats %zu\n", peak_gflops(machine),
              resolve_threads(threads), repeats);
  print_header();

  std::vector<BenchRecord> records;
  bool failed = false;
  for (const BenchmarkDef* def : benches) {
    for (Algo algo : algos) {
      for (Variant variant : variants) {
        for (Layout layout : layouts) {
          cfg.algo = algo;
          cfg.variant = variant;
          cfg.layout = layout;
          std::vector<BenchRecord> cell;
          if (scaling) {
            cell = batch_scaling(*def, cfg, kScalingBatches, machine);
          } else {
            cell.push_back(run_cell(*def, cfg, machine));
          }
          for (BenchRecord& r : cell) {
            print_record(r, verify);
            std::fflush(stdout);
            failed = failed || r.verify_failed;
            records.push_back(std::move(r));
          }
        }
      }
    }
  }

  if (!csv_path.empty()) {
    try {
      emit_csv(records, csv_path);
    } catch (const std::exception& e) {
      std::cerr << "convbench: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (failed) {
    std::cerr << "convbench: verification failed\n";
    return kExitVerifyFailed;
  }
  return 0;
}
