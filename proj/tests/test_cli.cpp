/*
 *   Copyright 2026 The heatbem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliRun {
  int status;
  std::string out;
};

CliRun run(const std::string &args, const std::string &env = "") {
  const std::string cmd =
      env + (env.empty() ? "" : " ") + HEATBEM_CLI_PATH + " " + args + " 2>&1";
  FILE *p = popen(cmd.c_str(), "r");
  if (!p)
    return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0)
    out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path &p) { return json::parse(slurp(p)); }

class Cli : public ::testing::Test {
protected:
  fs::path dir;
  void SetUp() override {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() /
          ("heatbem_cli_" + std::to_string(getpid()) + "_" + info->name());
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string out(const std::string &sub = "") const {
    return "--out " + (dir / sub).string();
  }
};

// Tiny configuration for format and reproducibility checks.
const std::string tiny = "--subdivisions 1 --timesteps 2 --interior-points 50 ";

} // namespace

TEST_F(Cli, MeshGenWritesRefinedCube) {
  const CliRun r = run("mesh-gen --refine 1 " + out());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("elements 768 nodes 386"), std::string::npos) << r.out;
  const std::string mesh = slurp(dir / "mesh.txt");
  EXPECT_EQ(mesh.rfind("heatbem-mesh 1", 0), 0u);
  // Refining the written mesh once more gives level 2 of the default cube.
  const CliRun r2 = run("mesh-gen --refine 1 --mesh " + (dir / "mesh.txt").string() +
                     " " + out("again"));
  ASSERT_EQ(r2.status, 0) << r2.out;
  EXPECT_NE(r2.out.find("elements 3072"), std::string::npos) << r2.out;
}

TEST_F(Cli, DirichletLevelZero) {
  const CliRun r = run("solve --problem dirichlet --interior-points 200 " + out());
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = load_json(dir / "report.json");
  const json &d = j["result"]["dirichlet"];
  EXPECT_TRUE(d["solve"]["converged"].get<bool>());
  EXPECT_LE(d["solve"]["relative_residual"].get<double>(), 1e-8);
  EXPECT_NEAR(d["err_computed"].get<double>(), 6.07e-1, 0.1 * 6.07e-1);
  EXPECT_NEAR(d["err_projected"].get<double>(), 5.49e-1, 0.05 * 5.49e-1);
  EXPECT_LE(d["forward_difference"].get<double>(), 1e-6);
  EXPECT_EQ(j["result"]["Et"], 8);
  EXPECT_EQ(j["result"]["Ex"], 192);
  ASSERT_EQ(j["result"]["assembly"].size(), 2u);
  for (const auto &t : j["result"]["assembly"]) {
    EXPECT_EQ(t["time_passes"], 9);
    EXPECT_EQ(t["kernel_batches"], 192 * 192 * 9);
  }
  EXPECT_TRUE(fs::exists(dir / "solution_dirichlet.csv"));
}

TEST_F(Cli, NeumannLevelZero) {
  const CliRun r = run("solve --problem neumann --interior-points 200 " + out());
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = load_json(dir / "report.json");
  const json &n = j["result"]["neumann"];
  EXPECT_TRUE(n["solve"]["converged"].get<bool>());
  EXPECT_NEAR(n["err_computed"].get<double>(), 3.14e-1, 0.1 * 3.14e-1);
  EXPECT_NEAR(n["err_projected"].get<double>(), 2.50e-1, 0.05 * 2.50e-1);
  EXPECT_TRUE(fs::exists(dir / "solution_neumann.csv"));
}

TEST_F(Cli, ConvergenceCsvFormatAndReproducibility) {
  const CliRun r1 = run("convergence --problem both --levels 2 " + tiny + out("a"));
  ASSERT_EQ(r1.status, 0) << r1.out;
  const CliRun r2 = run("convergence --problem both --levels 2 " + tiny + out("b"));
  ASSERT_EQ(r2.status, 0) << r2.out;
  for (const char *name : {"convergence_dirichlet.csv", "convergence_neumann.csv"}) {
    const std::string a = slurp(dir / "a" / name), b = slurp(dir / "b" / name);
    EXPECT_EQ(a, b) << name;
    std::istringstream in(a);
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    EXPECT_EQ(header, "Et,Ex,err_computed,eoc_computed,err_projected,"
                      "eoc_projected,err_repr,eoc_repr");
    EXPECT_EQ(row0.rfind("2,12,", 0), 0u) << row0;
    EXPECT_EQ(row1.rfind("4,48,", 0), 0u) << row1;
    // First row: the three eoc cells are empty.
    double e0, p0, r0;
    char c1, c2, c3, c4, c5, c6, c7;
    int et, ex;
    std::istringstream rs(row0);
    rs >> et >> c1 >> ex >> c2 >> e0 >> c3 >> c4 >> p0 >> c5 >> c6 >> r0 >> c7;
    EXPECT_EQ(c3, ',');
    EXPECT_EQ(c4, ',');
    EXPECT_EQ(c6, ',');
    EXPECT_EQ(row0.back(), ',');
    // The projection is the L2 best approximation.
    EXPECT_LE(p0, e0);
  }
}

TEST_F(Cli, WorkerCountDoesNotChangeDeterministicSolutions) {
  std::string first;
  for (int w : {1, 2, 3}) {
    const std::string sub = "w" + std::to_string(w);
    const CliRun r = run("solve --problem both --subdivisions 2 --timesteps 4 "
                      "--interior-points 20 --deterministic --workers " +
                      std::to_string(w) + " " + out(sub));
    ASSERT_EQ(r.status, 0) << r.out;
    const std::string s = slurp(dir / sub / "solution_dirichlet.csv") +
                          slurp(dir / sub / "solution_neumann.csv");
    if (first.empty())
      first = s;
    else
      EXPECT_EQ(s, first) << "workers " << w;
  }
}

TEST_F(Cli, WorkersFallBackToEnvironment) {
  const CliRun r = run("solve " + tiny + out(), "HEATBEM_WORKERS=3");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(load_json(dir / "report.json")["config"]["workers"], 3);
  const CliRun r2 = run("solve --workers 2 " + tiny + out("x"), "HEATBEM_WORKERS=3");
  ASSERT_EQ(r2.status, 0) << r2.out;
  EXPECT_EQ(load_json(dir / "x" / "report.json")["config"]["workers"], 2);
}

TEST_F(Cli, NonConvergenceGivesNonZeroExitAndReport) {
  const CliRun r = run("solve --problem dirichlet --max-iter 1 " + tiny + out());
  EXPECT_EQ(r.status, 2) << r.out;
  EXPECT_NE(r.out.find("NOT converged"), std::string::npos);
  const json j = load_json(dir / "report.json");
  EXPECT_FALSE(j["result"]["dirichlet"]["solve"]["converged"].get<bool>());
}

TEST_F(Cli, SourcePointAndAlphaAreUsed) {
  const CliRun r = run("solve --source-point 0.2,-0.1,2 --alpha 1 " + tiny + out());
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = load_json(dir / "report.json");
  EXPECT_EQ(j["config"]["source_point"], json({0.2, -0.1, 2.0}));
  EXPECT_EQ(j["config"]["alpha"], 1.0);
}

TEST_F(Cli, RejectsBadInput) {
  EXPECT_NE(run("solve --source-point 0,0,0 " + tiny + out()).status, 0);
  EXPECT_NE(run("solve --source-point 1,2 " + tiny + out()).status, 0);
  EXPECT_NE(run("solve --problem heat " + out()).status, 0);
  EXPECT_NE(run("solve --quad-regular 11 " + out()).status, 0);
  EXPECT_NE(run("convergence --levels 1 " + out()).status, 0);
  EXPECT_NE(run("solve --mesh /nonexistent/mesh.txt " + out()).status, 0);
  EXPECT_NE(run("").status, 0);
}

TEST_F(Cli, VerifyKernels) {
  const CliRun ok = run("verify-kernels --entry-pairs 4 " + out());
  EXPECT_EQ(ok.status, 0) << ok.out;
  EXPECT_NE(ok.out.find("kernel grid: 360 checks"), std::string::npos) << ok.out;
  EXPECT_TRUE(load_json(dir / "verify.json")["kernel_grid"]["pass"].get<bool>());

  const CliRun bad = run("verify-kernels --entry-pairs 0 --perturb-alpha 1e-6");
  EXPECT_EQ(bad.status, 3) << bad.out;
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);

  const CliRun empty = run("verify-kernels --empty-grid");
  EXPECT_EQ(empty.status, 0) << empty.out;
  EXPECT_NE(empty.out.find("warning"), std::string::npos);
}
