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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "robustqoc/experiments.hpp"
#include "robustqoc/io.hpp"
#include "support.hpp"

namespace robustqoc {
namespace {

namespace fs = std::filesystem;
using testing::Random;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("robustqoc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

/// A run small enough for unit tests: coarse grid, few iterations, two couplings.
ExperimentConfig tiny(Benchmark task) {
  ExperimentConfig c = ExperimentConfig::defaults(task);
  c.n_steps = 120;
  c.n_restarts = 2;
  c.max_iterations = 3;
  c.lambda_points = 3;
  c.ensemble_size = 2;
  c.seed = 4;
  return c;
}

const char* kTinyConfigText =
    "# small smoke-test run\n"
    "n_steps = 120\n"
    "n_restarts = 2\n"
    "max_iterations = 3\n"
    "lambda_points = 3\n"
    "ensemble_size = 2\n";

TEST(Config, DefaultsPerTask) {
  const ExperimentConfig t = ExperimentConfig::defaults(Benchmark::transfer2);
  EXPECT_DOUBLE_EQ(t.delta, 3e-3);
  EXPECT_DOUBLE_EQ(t.beta_value(), 1.0 / 3e-3);
  EXPECT_DOUBLE_EQ(t.omega_c_value(), 3e-2);
  EXPECT_DOUBLE_EQ(t.tau, 1000.0);
  EXPECT_EQ(t.n_steps, 500u);
  EXPECT_DOUBLE_EQ(t.c_weight, 1e-2);
  EXPECT_EQ(t.ensemble_size, 20u);
  const auto lg = t.lambda_grid();
  ASSERT_EQ(lg.size(), 21u);
  EXPECT_EQ(lg.front(), 0.0);
  EXPECT_DOUBLE_EQ(lg.back(), 0.1);
  for (std::size_t i = 1; i < lg.size(); ++i) EXPECT_GT(lg[i], lg[i - 1]);
  const ExperimentConfig cz = ExperimentConfig::defaults(Benchmark::cz);
  EXPECT_DOUBLE_EQ(cz.c_weight, 2e-3);
  EXPECT_DOUBLE_EQ(cz.init_amplitude_factor, 3.0);
  EXPECT_DOUBLE_EQ(cz.omega_c_value(), 10.0 * 2.0 * 3e-3);
  EXPECT_DOUBLE_EQ(ExperimentConfig::defaults(Benchmark::hadamard).c_weight, 1e-2);
}

TEST(Config, ParsesKeysCommentsAndDerivedDefaults) {
  const ExperimentConfig c = parse_config(
      "delta = 2e-3   # smaller splitting\n\n  tau=1500\nseed = 12\nlambda_points = 5\ntask = hadamard\n", Benchmark::hadamard);
  EXPECT_DOUBLE_EQ(c.delta, 2e-3);
  EXPECT_DOUBLE_EQ(c.beta_value(), 500.0);
  EXPECT_DOUBLE_EQ(c.omega_c_value(), 2e-2);
  EXPECT_DOUBLE_EQ(c.tau, 1500.0);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.lambda_grid().size(), 5u);
  EXPECT_DOUBLE_EQ(parse_config("beta = 7\n", Benchmark::cz).beta_value(), 7.0);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("gamma = 1\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("tau = 1\ntau = 2\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("tau = fast\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("tau = 10x\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("tau\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("tau = -5\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("n_steps = -5\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("lambda_max = -0.1\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("task = cz\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_config("n_restarts = 0\n", Benchmark::transfer2), ConfigError);
  EXPECT_THROW(parse_benchmark("toffoli"), ConfigError);
  EXPECT_THROW(parse_strategy_selection("greedy"), ConfigError);
}

TEST(BlochVector, Examples) {
  ComplexVector plus_x(2);
  plus_x << 1.0, 1.0;
  const auto r = bloch_vector(DensityMatrix::pure(plus_x));
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);
  const auto zero = bloch_vector(DensityMatrix(Operator(0.5 * Operator::Identity(2, 2))));
  for (double v : zero) EXPECT_EQ(v, 0.0);
  Random rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = bloch_vector(DensityMatrix::pure(rng.vector(2)));
    EXPECT_NEAR(std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]), 1.0, 1e-10);
  }
  EXPECT_THROW(bloch_vector(DensityMatrix(Operator(Operator::Identity(4, 4) / 4.0))), DimensionError);
}

TEST(Problems, TargetsAndCouplings) {
  const BenchmarkProblem t = make_problem(ExperimentConfig::defaults(Benchmark::transfer2));
  ASSERT_TRUE(t.rho_initial.has_value());
  const auto r0 = bloch_vector(*t.rho_initial);
  const auto r1 = bloch_vector(t.objective(0.0).rho_target());
  EXPECT_NEAR(r0[0], -1.0, 1e-15);
  EXPECT_NEAR(r1[0], 1.0, 1e-15);

  const BenchmarkProblem h = make_problem(ExperimentConfig::defaults(Benchmark::hadamard));
  EXPECT_FALSE(h.rho_initial.has_value());
  EXPECT_NEAR(bloch_vector(*h.bloch_initial)[2], -1.0, 1e-15);
  EXPECT_LT(unitarity_defect(h.u_target), 1e-15);

  const BenchmarkProblem cz = make_problem(ExperimentConfig::defaults(Benchmark::cz));
  EXPECT_EQ(cz.system.n_controls(), 4u);
  EXPECT_EQ(cz.system.dim(), 4);
  Operator expected = Operator::Identity(4, 4);
  expected(3, 3) = -1.0;
  EXPECT_EQ(cz.u_target, expected);
  EXPECT_EQ(cz.specific_coupling, kron(pauli::y(), pauli::identity()));
}

TEST(RandomCouplings, QubitUnitVectors) {
  const auto cs = random_couplings(Benchmark::transfer2, 20, 5);
  ASSERT_EQ(cs.size(), 20u);
  for (const auto& c : cs) {
    double n2 = 0.0;
    for (double a : c.coefficients) n2 += a * a;
    EXPECT_NEAR(n2, 1.0, 1e-14);
    EXPECT_TRUE(is_hermitian(c.op));
    EXPECT_NEAR((c.op * c.op).trace().real(), 2.0, 1e-13);
  }
  EXPECT_EQ(random_couplings(Benchmark::transfer2, 3, 5)[2].coefficients, cs[2].coefficients);
  EXPECT_NE(random_couplings(Benchmark::transfer2, 3, 6)[0].coefficients, cs[0].coefficients);
}

TEST(RandomCouplings, TwoQubitFrobeniusIdentity) {
  for (const auto& c : random_couplings(Benchmark::cz, 20, 1)) {
    ASSERT_EQ(c.coefficients.size(), 16u);
    EXPECT_NEAR((c.op.adjoint() * c.op).trace().real(), 4.0, 1e-12);
  }
}

TEST(Serialization, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_THROW(format_double(std::nan("")), NumericalError);
  const nlohmann::json j = {{"a", 0.1}, {"b", {1, 2}}, {"c", "text"}, {"d", nullptr}, {"e", nlohmann::json::object()}};
  EXPECT_EQ(nlohmann::json::parse(to_json_text(j)), j);
}

class TinyRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    report_ = new RunReport(run_benchmark(tiny(Benchmark::transfer2), StrategySelection::both));
  }
  static void TearDownTestSuite() {
    delete report_;
    report_ = nullptr;
  }
  static RunReport* report_;
};
RunReport* TinyRun::report_ = nullptr;

TEST_F(TinyRun, TablesAlignWithLambdaGrid) {
  const RunReport& r = *report_;
  ASSERT_EQ(r.runs.size(), 2u);
  EXPECT_EQ(r.specific_rows.size(), 2u * 3u);
  EXPECT_EQ(r.random_rows.size(), 2u * 3u * 2u);
  for (const auto& run : r.runs) {
    EXPECT_EQ(run.curves.specific.size(), 3u);
    EXPECT_EQ(run.curves.random_mean.size(), 3u);
  }
  EXPECT_EQ(r.bloch.size(), 2u * 121u);
}

TEST_F(TinyRun, ZeroCouplingRowsMatchUnitaryFidelity) {
  for (const auto& run : report_->runs) {
    EXPECT_NEAR(run.curves.specific[0], run.noise_free_fidelity, 1e-8);
    EXPECT_NEAR(run.curves.random_mean[0], run.noise_free_fidelity, 1e-8);
  }
}

TEST_F(TinyRun, RandomCouplingRowsReuseTheOptimisedPulses) {
  // Rebuild the robust pulses from nothing but the reported coefficients and reproduce one row.
  const RunReport& r = *report_;
  const StrategyRun* robust = r.find(Strategy::robust);
  ASSERT_NE(robust, nullptr);
  const auto coeffs = robust->optimization.pulses.coefficients();
  ControlPulseSet rebuilt(2, r.config.tau);
  rebuilt.set_coefficients(std::vector<double>(coeffs.begin(), coeffs.end()));
  const BenchmarkProblem p = make_problem(r.config);
  const double f = noisy_task_fidelity(rebuilt, p.system, p.objective(robust->c_weight),
                                       NoiseChannel(r.couplings[1].op, r.lambdas[2]), r.config.bath(), r.config.grid());
  bool found = false;
  for (const auto& row : r.random_rows) {
    if (row.strategy == Strategy::robust && row.realization == 1 && row.lambda == r.lambdas[2]) {
      EXPECT_EQ(row.fidelity, f);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(TinyRun, EmittedJsonRoundTripsEveryNumber) {
  const fs::path dir = scratch_dir("roundtrip");
  const OutputFiles files = emit_outputs(*report_, dir);
  for (const auto& name : files.names) EXPECT_TRUE(fs::exists(dir / name)) << name;
  const nlohmann::json back = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(back, report_json(*report_));
  const auto& s = back["strategies"][1];
  EXPECT_EQ(s["d_eff"].get<double>(), report_->runs[1].optimization.objective.d_eff);
  const auto coeffs = report_->runs[1].optimization.pulses.coefficients();
  for (std::size_t i = 0; i < coeffs.size(); ++i) EXPECT_EQ(s["coefficients"][i].get<double>(), coeffs[i]);
  EXPECT_TRUE(slurp(dir / "fidelity_specific.csv").starts_with("lambda,strategy,noise_kind,realization,fidelity\n"));
  EXPECT_TRUE(slurp(dir / "bloch.csv").starts_with("t,rx,ry,rz,strategy\n"));
  EXPECT_TRUE(slurp(dir / "pulses_robust.csv").starts_with("t,u_1,u_2\n"));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), files.names.size() - 1);
  fs::remove_all(dir);
}

TEST(EmitOutputs, EmptyEnsembleGivesHeaderOnlyCsv) {
  ExperimentConfig c = tiny(Benchmark::hadamard);
  c.ensemble_size = 0;
  c.n_restarts = 1;
  c.max_iterations = 1;
  const RunReport r = run_benchmark(c, StrategySelection::target_only);
  const fs::path dir = scratch_dir("empty");
  emit_outputs(r, dir);
  EXPECT_EQ(slurp(dir / "fidelity_random.csv"), "lambda,strategy,noise_kind,realization,fidelity\n");
  fs::remove_all(dir);
}

TEST(EmitOutputs, UnwritableDirectoryIsAnIoError) {
  RunReport r;
  r.config = tiny(Benchmark::transfer2);
  const fs::path blocker = scratch_dir("blocked") / "file";
  std::ofstream(blocker) << "x";
  EXPECT_THROW(emit_outputs(r, blocker / "sub"), IoError);
}

// --- command line -----------------------------------------------------------------------------

struct CliResult {
  int exit_code = -1;
  std::string stderr_text;
};

CliResult run_cli(const std::string& args, const fs::path& work, const std::string& env = "") {
  const fs::path err = work / "stderr.txt";
  const std::string cmd = env + " " + std::string(ROBUSTQOC_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stderr_text = slurp(err);
  return r;
}

nlohmann::json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line.front() == '{') last = line;
  return nlohmann::json::parse(last);
}

TEST(Cli, RerunsAreByteIdentical) {
  const fs::path work = scratch_dir("cli_rerun");
  std::ofstream(work / "tiny.cfg") << kTinyConfigText;
  for (const char* task : {"transfer2", "cz"}) {
    for (const char* out : {"a", "b"}) {
      const CliResult r = run_cli(std::string("run --task ") + task + " --config " + (work / "tiny.cfg").string() +
                                      " --out " + (work / (std::string(task) + out)).string() + " --seed 8 --jobs 1",
                                  work);
      ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
    }
    const fs::path a = work / (std::string(task) + "a");
    const fs::path b = work / (std::string(task) + "b");
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (name == "timing.txt") continue;
      EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << task << "/" << name;
      ++compared;
    }
    EXPECT_GE(compared, 5u);
  }
  const nlohmann::json rep = nlohmann::json::parse(slurp(work / "transfer2a" / "report.json"));
  EXPECT_EQ(rep["config"]["seed"].get<int>(), 8);
  fs::remove_all(work);
}

TEST(Cli, UnknownConfigKeyFailsWithJsonError) {
  const fs::path work = scratch_dir("cli_badkey");
  std::ofstream(work / "bad.cfg") << "tau = 1000\nwarp_factor = 9\n";
  const CliResult r = run_cli("run --task transfer2 --config " + (work / "bad.cfg").string() + " --out " +
                                  (work / "out").string(),
                              work);
  EXPECT_EQ(r.exit_code, 2);
  const nlohmann::json err = last_json_line(r.stderr_text);
  EXPECT_EQ(err["error"]["kind"], "config_error");
  EXPECT_NE(err["error"]["message"].get<std::string>().find("warp_factor"), std::string::npos);
  fs::remove_all(work);
}

TEST(Cli, UsageAndEnvironmentErrors) {
  const fs::path work = scratch_dir("cli_usage");
  std::ofstream(work / "ok.cfg") << kTinyConfigText;
  const std::string base = "run --task transfer2 --config " + (work / "ok.cfg").string() + " --out " +
                           (work / "out").string();
  CliResult r = run_cli("run --task toffoli --config x --out y", work);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(last_json_line(r.stderr_text)["error"]["kind"], "usage");
  r = run_cli("run --task transfer2 --config " + (work / "missing.cfg").string() + " --out y", work);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(last_json_line(r.stderr_text)["error"]["kind"], "io_error");
  r = run_cli(base, work, "ROBUSTQOC_JOBS=many");
  EXPECT_EQ(r.exit_code, 2);
  // --jobs overrides a bad environment value.
  r = run_cli(base + " --jobs 2 --strategy target-only", work, "ROBUSTQOC_JOBS=many");
  EXPECT_EQ(r.exit_code, 0) << r.stderr_text;
  EXPECT_TRUE(fs::exists(work / "out" / "pulses_target-only.csv"));
  EXPECT_FALSE(fs::exists(work / "out" / "pulses_robust.csv"));
  fs::remove_all(work);
}

}  // namespace
}  // namespace robustqoc
