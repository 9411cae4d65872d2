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


// heatbem command-line driver: mesh generation, solves, convergence tables
// and the kernel/entry oracle suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatbem/study.hpp"
#include "heatbem/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace heatbem;

namespace {

constexpr int exit_not_converged = 2;
constexpr int exit_verification_failed = 3;

struct RunConfig {
  std::string problem = "dirichlet";
  int refine = 0;
  int levels = 3;
  int timesteps = 8;
  double alpha = 0.5;
  int quad_regular = 4;
  int quad_singular = 4;
  int workers = default_workers();
  bool deterministic = true;
  std::string out = ".";
  std::string mesh;
  std::vector<double> source{0.0, 0.0, 1.5};
  int subdivisions = 4;
  double half_width = 1.0;
  int interior_points = 10000;
  std::string precondition = "none";
  int max_iter = 500;
  int restart = 50;
  bool forward_check = true;
  bool verbose = false;
};

void add_common(CLI::App *cmd, RunConfig &c) {
  cmd->add_option("--refine", c.refine, "Uniform refinements of the base mesh")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--mesh", c.mesh, "Base mesh file (default: cube)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--subdivisions", c.subdivisions, "Cube: squares per face edge")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--half-width", c.half_width, "Cube half width")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_flag("-v,--verbose", c.verbose, "Progress messages on stderr");
}

void add_solver_options(CLI::App *cmd, RunConfig &c) {
  add_common(cmd, c);
  cmd->add_option("--problem", c.problem, "dirichlet or neumann")
      ->check(CLI::IsMember({"dirichlet", "neumann", "both"}));
  cmd->add_option("--timesteps", c.timesteps, "Time steps on level 0")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", c.alpha, "Heat capacity constant")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--quad-regular", c.quad_regular, "Triangle rule order (1-10)")
      ->check(CLI::Range(1, 10));
  cmd->add_option("--quad-singular", c.quad_singular,
                  "Gauss points per axis in the singular rules")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", c.workers,
                  "Worker threads (default: HEATBEM_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic,!--economical", c.deterministic,
                "Fixed-order accumulation (default) or atomic adds");
  cmd->add_option("--source-point", c.source, "Source y* as x,y,z")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--interior-points", c.interior_points,
                  "Interior points for the representation error")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--precondition", c.precondition,
                  "Neumann preconditioner: none, operator, v11")
      ->check(CLI::IsMember({"none", "operator", "v11"}));
  cmd->add_option("--max-iter", c.max_iter, "FGMRES iteration limit")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--restart", c.restart, "FGMRES restart length")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--forward-check,!--no-forward-check", c.forward_check,
                "Also solve by forward substitution and compare");
}

SurfaceMesh base_mesh(const RunConfig &c) {
  if (c.mesh.empty())
    return generate_cube_surface(c.subdivisions, c.half_width);
  LoadedMesh lm = load_mesh(c.mesh);
  if (lm.non_manifold)
    throw NonManifoldMesh("mesh '" + c.mesh + "' is not a closed edge-manifold surface");
  return std::move(lm.mesh);
}

StudyConfig study_config(const RunConfig &c) {
  StudyConfig s;
  s.solution.source = {c.source[0], c.source[1], c.source[2]};
  s.solution.alpha = c.alpha;
  s.base_steps = c.timesteps;
  s.base_mesh = base_mesh(c);
  s.quadrature.regular_order = c.quad_regular;
  s.quadrature.singular_order = c.quad_singular;
  s.quadrature.validate();
  s.assembly.workers = c.workers;
  s.assembly.deterministic = c.deterministic;
  s.interior_points = c.interior_points;
  s.forward_check = c.forward_check;
  s.fgmres.max_iter = c.max_iter;
  s.fgmres.restart = c.restart;
  s.precondition = c.precondition == "operator" ? Preconditioner::operator_form
                   : c.precondition == "v11"    ? Preconditioner::v11_inverse
                                                : Preconditioner::none;
  // y* must lie outside the body; the bounding box is a conservative test.
  Vec3 lo = s.base_mesh->vertex(0), hi = lo;
  for (int i = 0; i < s.base_mesh->n_nodes(); ++i)
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], s.base_mesh->vertex(i)[k]);
      hi[k] = std::max(hi[k], s.base_mesh->vertex(i)[k]);
    }
  bool inside = true;
  for (int k = 0; k < 3; ++k)
    inside = inside && s.solution.source[k] >= lo[k] && s.solution.source[k] <= hi[k];
  if (inside)
    throw std::invalid_argument("--source-point must lie outside the mesh bounding box");
  if (c.verbose)
    s.log = [](const std::string &m) { std::cerr << m << std::endl; };
  return s;
}

json config_json(const RunConfig &c) {
  return {{"problem", c.problem},
          {"refine", c.refine},
          {"timesteps", c.timesteps},
          {"alpha", c.alpha},
          {"quad_regular", c.quad_regular},
          {"quad_singular", c.quad_singular},
          {"workers", c.workers},
          {"deterministic", c.deterministic},
          {"mesh", c.mesh.empty() ? "cube" : c.mesh},
          {"source_point", c.source},
          {"interior_points", c.interior_points},
          {"precondition", c.precondition},
          {"max_iter", c.max_iter},
          {"restart", c.restart}};
}

json level_json(const LevelResult &lr) {
  json j{{"level", lr.level},
         {"Et", lr.n_steps},
         {"Ex", lr.n_elements},
         {"nodes", lr.n_nodes}};
  json timings = json::array();
  for (const auto &t : lr.timings)
    timings.push_back({{"matrix", t.name},
                       {"seconds", t.seconds},
                       {"kernel_batches", t.kernel_batches},
                       {"time_passes", t.time_passes}});
  j["assembly"] = timings;
  for (Problem p : {Problem::dirichlet, Problem::neumann}) {
    const auto &opt = p == Problem::dirichlet ? lr.dirichlet : lr.neumann;
    if (!opt)
      continue;
    const ProblemResult &r = *opt;
    json pj{{"solve",
             {{"iterations", r.solve.iterations},
              {"relative_residual", r.solve.relative_residual},
              {"converged", r.solve.converged},
              {"seconds", r.solve.seconds},
              {"restart_residuals", r.solve.restart_residuals}}},
            {"err_computed", r.err_computed},
            {"err_projected", r.err_projected},
            {"err_repr", r.err_repr},
            {"near_boundary", r.near_boundary},
            {"representation_seconds", r.representation_seconds}};
    if (!std::isnan(r.forward_difference))
      pj["forward_difference"] = r.forward_difference;
    j[to_string(p)] = pj;
  }
  return j;
}

void write_json(const fs::path &path, const json &j) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_coefficients(const fs::path &path, const SpaceTimeVector &x) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "step,dof,value\n";
  char buf[64];
  for (int i = 0; i < x.n_steps(); ++i)
    for (int j = 0; j < x.n_dofs(); ++j) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i, j, x(i, j));
      out << buf;
    }
}

bool all_converged(const LevelResult &lr) {
  return (!lr.dirichlet || lr.dirichlet->solve.converged) &&
         (!lr.neumann || lr.neumann->solve.converged);
}

int cmd_mesh_gen(const RunConfig &c) {
  const SurfaceMesh mesh = refine(base_mesh(c), c.refine);
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / "mesh.txt";
  save_mesh(mesh, path.string());
  std::cout << "elements " << mesh.n_elements() << " nodes " << mesh.n_nodes()
            << " h_max " << mesh.max_element_diameter() << '\n'
            << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_solve(const RunConfig &c) {
  const StudyConfig s = study_config(c);
  const bool d = c.problem != "neumann", n = c.problem != "dirichlet";
  const LevelResult lr = run_level(s, c.refine, d, n);
  fs::create_directories(c.out);
  if (lr.dirichlet)
    write_coefficients(fs::path(c.out) / "solution_dirichlet.csv",
                       lr.dirichlet->solution);
  if (lr.neumann)
    write_coefficients(fs::path(c.out) / "solution_neumann.csv",
                       lr.neumann->solution);
  json report{{"command", "solve"}, {"config", config_json(c)},
              {"result", level_json(lr)}};
  write_json(fs::path(c.out) / "report.json", report);
  for (Problem p : {Problem::dirichlet, Problem::neumann}) {
    const auto &opt = p == Problem::dirichlet ? lr.dirichlet : lr.neumann;
    if (!opt)
      continue;
    std::printf("%s Et %d Ex %d: %s after %d iterations (residual %.3e)\n"
                "  err_computed %.6e err_projected %.6e err_repr %.6e\n",
                to_string(p), lr.n_steps, lr.n_elements,
                opt->solve.converged ? "converged" : "NOT converged",
                opt->solve.iterations, opt->solve.relative_residual,
                opt->err_computed, opt->err_projected, opt->err_repr);
  }
  for (const auto &t : lr.timings)
    std::printf("  assembly %-3s %.2f s\n", t.name.c_str(), t.seconds);
  return all_converged(lr) ? 0 : exit_not_converged;
}

int cmd_convergence(const RunConfig &c) {
  if (c.levels < 2)
    throw std::invalid_argument("--levels must be at least 2");
  const StudyConfig s = study_config(c);
  const bool d = c.problem != "neumann", n = c.problem != "dirichlet";
  std::vector<LevelResult> levels;
  json jl = json::array();
  bool converged = true;
  fs::create_directories(c.out);
  for (int l = 0; l < c.levels; ++l) {
    levels.push_back(run_level(s, l, d, n));
    converged = converged && all_converged(levels.back());
    jl.push_back(level_json(levels.back()));
    // Written after every level so a long run leaves partial results.
    write_json(fs::path(c.out) / "report.json",
               {{"command", "convergence"}, {"config", config_json(c)}, {"levels", jl}});
  }
  for (Problem p : {Problem::dirichlet, Problem::neumann}) {
    if ((p == Problem::dirichlet && !d) || (p == Problem::neumann && !n))
      continue;
    const fs::path path =
        fs::path(c.out) / (std::string("convergence_") + to_string(p) + ".csv");
    std::ofstream out(path);
    write_convergence_csv(out, levels, p);
    std::cout << to_string(p) << '\n';
    write_convergence_csv(std::cout, levels, p);
  }
  return converged ? 0 : exit_not_converged;
}

struct VerifyConfig {
  double perturb_alpha = 0.0;
  bool empty_grid = false;
  int entry_pairs = 20;
  int workers = default_workers();
  std::string out;
};

int cmd_verify_kernels(const VerifyConfig &v) {
  KernelGrid grid;
  grid.perturb_alpha = v.perturb_alpha;
  if (v.empty_grid)
    grid.blocks.clear();
  const KernelGridReport kr = verify_kernel_grid(grid);
  if (kr.empty)
    std::cout << "warning: kernel grid is empty, nothing checked\n";
  std::printf("kernel grid: %zu checks, max abs deviation %.3e, max rel "
              "deviation %.3e: %s\n",
              kr.checks.size(), kr.max_abs_deviation, kr.max_rel_deviation,
              kr.all_pass ? "pass" : "FAIL");
  for (const auto &c : kr.checks)
    if (!c.pass)
      std::printf("  %s rho %.4g alpha %.3g h %.4g d %d: %.17g vs %.17g\n",
                  to_string(c.kind), c.rho, c.alpha, c.h_t, c.d, c.closed_form,
                  c.oracle);
  bool ok = kr.all_pass;
  json report{{"command", "verify-kernels"},
              {"kernel_grid",
               {{"checks", kr.checks.size()},
                {"max_abs_deviation", kr.max_abs_deviation},
                {"max_rel_deviation", kr.max_rel_deviation},
                {"pass", kr.all_pass}}}};
  if (v.entry_pairs > 0 && !v.empty_grid) {
    EntrySuite suite;
    suite.pairs_per_kind = v.entry_pairs;
    suite.perturb_alpha = v.perturb_alpha;
    suite.workers = v.workers;
    const EntryReport er = verify_galerkin_entries(suite);
    std::printf("galerkin entries: %d pairs, %zu checks, max rel deviation "
                "%.3e: %s\n",
                er.n_pairs, er.checks.size(), er.max_rel_deviation,
                er.all_pass ? "pass" : "FAIL");
    ok = ok && er.all_pass;
    report["entries"] = {{"pairs", er.n_pairs},
                         {"checks", er.checks.size()},
                         {"max_rel_deviation", er.max_rel_deviation},
                         {"pass", er.all_pass}};
  }
  if (!v.out.empty()) {
    fs::create_directories(v.out);
    write_json(fs::path(v.out) / "verify.json", report);
  }
  return ok ? 0 : exit_verification_failed;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Space-time Galerkin boundary elements for the heat equation"};
  app.require_subcommand(1);
  RunConfig cfg;
  VerifyConfig vcfg;

  auto *mesh_gen = app.add_subcommand("mesh-gen", "Write a (refined) surface mesh");
  add_common(mesh_gen, cfg);

  auto *solve = app.add_subcommand("solve", "Solve one level and write a report");
  add_solver_options(solve, cfg);

  auto *conv = app.add_subcommand("convergence", "Convergence table over levels");
  add_solver_options(conv, cfg);
  conv->add_option("--levels", cfg.levels, "Number of levels, starting at 0")
      ->check(CLI::Range(2, 8));

  auto *verify = app.add_subcommand("verify-kernels",
                                    "Closed-form kernels and entries against the oracle");
  verify->add_option("--perturb-alpha", vcfg.perturb_alpha,
                     "Relative perturbation of alpha in the tested values");
  verify->add_flag("--empty-grid", vcfg.empty_grid, "Run with an empty grid");
  verify->add_option("--entry-pairs", vcfg.entry_pairs,
                     "Random separated pairs per operator (0 skips entries)")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--workers", vcfg.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  verify->add_option("--out", vcfg.out, "Directory for verify.json");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*mesh_gen)
      return cmd_mesh_gen(cfg);
    if (*solve)
      return cmd_solve(cfg);
    if (*conv)
      return cmd_convergence(cfg);
    if (*verify)
      return cmd_verify_kernels(vcfg);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
