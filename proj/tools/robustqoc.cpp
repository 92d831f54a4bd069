// Copyright 2026 The robustqoc Authors
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

// robustqoc run --task {transfer2|hadamard|cz} --config <file> --out <dir>
//               [--seed N] [--strategy {target-only|robust|both}] [--jobs K]

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "robustqoc/experiments.hpp"
#include "robustqoc/io.hpp"

namespace {

constexpr const char* kJobsVariable = "ROBUSTQOC_JOBS";

int exit_code_for(const std::string& kind) {
  if (kind == "usage" || kind == "config_error") return 2;
  if (kind == "io_error") return 3;
  if (kind == "optimization_failure") return 4;
  return 1;
}

int fail(const std::string& kind, const std::string& message) {
  std::cerr << robustqoc::error_json(kind, message).dump() << std::endl;
  return exit_code_for(kind);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw robustqoc::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t jobs_from_environment() {
  const char* v = std::getenv(kJobsVariable);
  if (v == nullptr || *v == '\0') return 1;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used == std::string(v).size() && n >= 1) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw robustqoc::ConfigError(std::string(kJobsVariable) + " must be a positive integer, got '" + v + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust quantum optimal control benchmarks"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "optimise and evaluate one benchmark");

  std::string task;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string strategy = "both";
  std::optional<std::size_t> jobs;
  run->add_option("--task", task, "benchmark")->required()->check(CLI::IsMember({"transfer2", "hadamard", "cz"}));
  run->add_option("--config", config_path, "flat key = value file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "overrides the config seed");
  run->add_option("--strategy", strategy, "which strategies to optimise")
      ->check(CLI::IsMember({"target-only", "robust", "both"}));
  run->add_option("--jobs", jobs, std::string("parallel restarts; overrides ") + kJobsVariable)
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    const robustqoc::Benchmark bench = robustqoc::parse_benchmark(task);
    robustqoc::ExperimentConfig cfg = robustqoc::parse_config(read_file(config_path), bench);
    if (seed) cfg.seed = *seed;
    const std::size_t n_jobs = jobs ? *jobs : jobs_from_environment();
    const auto selection = robustqoc::parse_strategy_selection(strategy);

    const auto report = robustqoc::run_benchmark(cfg, selection, n_jobs, [](const std::string& msg) {
      std::cerr << "[robustqoc] " << msg << std::endl;
    });
    robustqoc::emit_outputs(report, out_dir);

    // Timing lives outside the JSON/CSV outputs so those stay byte-identical across reruns.
    std::ofstream timing(std::filesystem::path(out_dir) / "timing.txt", std::ios::trunc);
    timing << "wall_time_s " << report.wall_time << "\n";
    for (const auto& r : report.runs)
      timing << "optimize_" << robustqoc::to_string(r.strategy) << "_s " << r.optimization.wall_time << "\n";
    std::cerr << "[robustqoc] done in " << report.wall_time << " s, outputs in " << out_dir << std::endl;
    return 0;
  } catch (const robustqoc::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
