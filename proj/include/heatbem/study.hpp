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

#ifndef HEATBEM_STUDY_HPP
#define HEATBEM_STUDY_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatbem/assembly.hpp"
#include "heatbem/field.hpp"
#include "heatbem/mesh.hpp"
#include "heatbem/solver.hpp"

// Dirichlet and Neumann solves for the manufactured solution on one
// refinement level, and the level sweep behind the convergence tables.

namespace heatbem {

enum class Problem { dirichlet, neumann };

inline const char *to_string(Problem p) {
  return p == Problem::dirichlet ? "dirichlet" : "neumann";
}

/// Right preconditioner for the hypersingular system.
enum class Preconditioner { none, operator_form, v11_inverse };

struct StudyConfig {
  ManufacturedSolution solution;
  double end_time = 1.0;
  int base_steps = 8;
  /// Cube n x n per face, used when base_mesh is empty.
  int base_subdivisions = 4;
  double half_width = 1.0;
  std::optional<SurfaceMesh> base_mesh;
  QuadratureConfig quadrature;
  AssemblyOptions assembly;
  FgmresOptions fgmres;
  Preconditioner precondition = Preconditioner::none;
  /// Also solve by forward substitution and record the difference.
  bool forward_check = true;
  int interior_points = 10000;
  std::function<void(const std::string &)> log;
};

struct MatrixTiming {
  std::string name;
  double seconds = 0.0;
  std::uint64_t kernel_batches = 0;
  int time_passes = 0;
};

struct ProblemResult {
  Problem problem = Problem::dirichlet;
  /// w_h for Dirichlet, u_h for Neumann.
  SpaceTimeVector solution;
  SolveReport solve;
  /// ||x_forward - x_fgmres|| / ||x_fgmres||, NaN when not computed.
  double forward_difference = std::numeric_limits<double>::quiet_NaN();
  double err_computed = 0.0;
  double err_projected = 0.0;
  double err_repr = 0.0;
  bool near_boundary = false;
  double representation_seconds = 0.0;
};

struct LevelResult {
  int level = 0;
  int n_steps = 0;
  int n_elements = 0;
  int n_nodes = 0;
  std::vector<MatrixTiming> timings;
  std::optional<ProblemResult> dirichlet, neumann;

  const ProblemResult &result(Problem p) const {
    const auto &r = p == Problem::dirichlet ? dirichlet : neumann;
    if (!r)
      throw std::logic_error("LevelResult: problem was not solved");
    return *r;
  }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

template <class F>
BlockToeplitzMatrix timed_assembly(const std::string &name,
                                   const StudyConfig &cfg,
                                   std::vector<MatrixTiming> &timings, F &&f) {
  AssemblyStats stats;
  AssemblyOptions opt = cfg.assembly;
  opt.stats = &stats;
  if (cfg.log)
    cfg.log("assembling " + name);
  const auto t0 = std::chrono::steady_clock::now();
  BlockToeplitzMatrix m = f(opt);
  timings.push_back({name, seconds_since(t0), stats.kernel_batches,
                     stats.time_passes});
  if (cfg.log) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %.2f s", timings.back().seconds);
    cfg.log(buf);
  }
  return m;
}

inline void solve_system(const LinearOperator &op, const BlockToeplitzMatrix &A,
                         const SpaceTimeVector &rhs, const StudyConfig &cfg,
                         const LinearOperator *precond, ProblemResult &out) {
  auto [x, report] = fgmres(op, rhs, cfg.fgmres, precond);
  if (cfg.log)
    cfg.log("  fgmres: " + std::to_string(report.iterations) + " iterations, " +
            "residual " + std::to_string(report.relative_residual));
  if (cfg.forward_check) {
    const SpaceTimeVector xf = forward_block_solve(A, rhs);
    const double xn = x.values().norm();
    out.forward_difference =
        (xf.values() - x.values()).norm() / (xn > 0.0 ? xn : 1.0);
  }
  out.solution = std::move(x);
  out.solve = report;
}

} // namespace detail

inline SurfaceMesh study_mesh(const StudyConfig &cfg, int level) {
  const SurfaceMesh base =
      cfg.base_mesh ? *cfg.base_mesh
                    : generate_cube_surface(cfg.base_subdivisions, cfg.half_width);
  return refine(base, level);
}

inline TimeGrid study_grid(const StudyConfig &cfg, int level) {
  return TimeGrid(cfg.end_time, cfg.base_steps << level);
}

/// Runs the requested problems on one level. Matrices are assembled in an
/// order that keeps at most two of them alive: K first (both right-hand
/// sides, then freed), V for the Dirichlet solve, and D^2 with V streamed
/// into it for the Neumann solve.
inline LevelResult run_level(const StudyConfig &cfg, int level, bool dirichlet,
                             bool neumann) {
  cfg.quadrature.validate();
  const SurfaceMesh mesh = study_mesh(cfg, level);
  const TimeGrid grid = study_grid(cfg, level);
  const KernelParams params(cfg.solution.alpha, grid.step(), mesh.diameter());
  LevelResult lr;
  lr.level = level;
  lr.n_steps = grid.n_steps();
  lr.n_elements = mesh.n_elements();
  lr.n_nodes = mesh.n_nodes();
  if (cfg.log)
    cfg.log("level " + std::to_string(level) + ": Et " +
            std::to_string(lr.n_steps) + ", Ex " + std::to_string(lr.n_elements));

  const auto dir_fn = cfg.solution.dirichlet();
  const auto neu_fn = cfg.solution.neumann();
  const SpaceTimeVector g = project_to_space(dir_fn, mesh, grid, Space::p1);
  const SpaceTimeVector h = project_to_space(neu_fn, mesh, grid, Space::p0);
  const BlockToeplitzMatrix M = assemble_mass(mesh, grid);

  SpaceTimeVector rhs_d, rhs_n;
  {
    const BlockToeplitzMatrix K =
        detail::timed_assembly("K", cfg, lr.timings, [&](const auto &opt) {
          return assemble_double_layer(mesh, grid, params, cfg.quadrature, opt);
        });
    if (dirichlet) {
      rhs_d = apply_toeplitz(K, g);
      rhs_d.values() += 0.5 * apply_toeplitz(M, g).values();
    }
    if (neumann) {
      rhs_n = apply_toeplitz(M, h, true);
      rhs_n.values() *= 0.5;
      rhs_n.values() -= apply_toeplitz(K, h, true).values();
    }
  }

  const auto points = interior_evaluation_points(cfg.interior_points);
  const PotentialOptions popt{cfg.assembly.workers};
  auto representation = [&](ProblemResult &r, const SpaceTimeVector &u,
                            const SpaceTimeVector &w) {
    if (points.empty())
      return;
    const auto t0 = std::chrono::steady_clock::now();
    const PotentialResult pr =
        represent(u, w, points, mesh, grid, params, cfg.quadrature, popt);
    r.err_repr = relative_error_points(pr.values, points, cfg.solution);
    r.near_boundary = pr.near_boundary;
    r.representation_seconds = detail::seconds_since(t0);
  };

  BlockToeplitzMatrix V =
      detail::timed_assembly("V", cfg, lr.timings, [&](const auto &opt) {
        return assemble_single_layer(mesh, grid, params, cfg.quadrature,
                                     Space::p0, Space::p0, opt);
      });

  if (dirichlet) {
    if (cfg.log)
      cfg.log("dirichlet solve");
    ProblemResult r;
    r.problem = Problem::dirichlet;
    detail::solve_system(LinearOperator::from(V), V, rhs_d, cfg, nullptr, r);
    r.err_computed =
        relative_error_sigma(r.solution, neu_fn, Space::p0, mesh, grid);
    r.err_projected = relative_error_sigma(h, neu_fn, Space::p0, mesh, grid);
    representation(r, g, r.solution);
    lr.dirichlet = std::move(r);
  }

  if (neumann) {
    BlockToeplitzMatrix D =
        detail::timed_assembly("D2", cfg, lr.timings, [&](const auto &opt) {
          return assemble_hypersingular_d2(mesh, grid, params, cfg.quadrature,
                                           opt);
        });
    {
      const auto t0 = std::chrono::steady_clock::now();
      add_curl_transformed(D, V, curl_transform(mesh), params.alpha, true,
                           cfg.assembly.workers);
      lr.timings.push_back({"D1", detail::seconds_since(t0), 0, 0});
    }
    V = BlockToeplitzMatrix();

    std::optional<BlockToeplitzMatrix> V11;
    std::optional<LinearOperator> precond;
    if (cfg.precondition != Preconditioner::none) {
      V11 = detail::timed_assembly("V11", cfg, lr.timings, [&](const auto &opt) {
        return assemble_single_layer(mesh, grid, params, cfg.quadrature,
                                     Space::p1, Space::p1, opt);
      });
      if (cfg.precondition == Preconditioner::operator_form)
        precond = build_operator_preconditioner(
            *V11, grid.step() * p1_mass_matrix(mesh));
      else
        precond = build_hypersingular_preconditioner(*V11);
    }
    if (cfg.log)
      cfg.log("neumann solve");
    ProblemResult r;
    r.problem = Problem::neumann;
    detail::solve_system(LinearOperator::from(D), D, rhs_n, cfg,
                         precond ? &*precond : nullptr, r);
    r.err_computed =
        relative_error_sigma(r.solution, dir_fn, Space::p1, mesh, grid);
    r.err_projected = relative_error_sigma(g, dir_fn, Space::p1, mesh, grid);
    D = BlockToeplitzMatrix();
    representation(r, r.solution, h);
    lr.neumann = std::move(r);
  }
  return lr;
}

/// Levels 0 .. max_level.
inline std::vector<LevelResult> run_study(const StudyConfig &cfg, int max_level,
                                          bool dirichlet, bool neumann) {
  std::vector<LevelResult> out;
  for (int l = 0; l <= max_level; ++l)
    out.push_back(run_level(cfg, l, dirichlet, neumann));
  return out;
}

/// Convergence table with one row per level; eoc cells of the first row
/// are empty.
inline void write_convergence_csv(std::ostream &os,
                                  const std::vector<LevelResult> &levels,
                                  Problem problem) {
  os << "Et,Ex,err_computed,eoc_computed,err_projected,eoc_projected,err_repr,"
        "eoc_repr\n";
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  auto rate = [&](double prev, double cur) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", std::log2(prev / cur));
    return std::string(buf);
  };
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const ProblemResult &r = levels[i].result(problem);
    os << levels[i].n_steps << ',' << levels[i].n_elements << ','
       << num(r.err_computed) << ',';
    if (i > 0)
      os << rate(levels[i - 1].result(problem).err_computed, r.err_computed);
    os << ',' << num(r.err_projected) << ',';
    if (i > 0)
      os << rate(levels[i - 1].result(problem).err_projected, r.err_projected);
    os << ',' << num(r.err_repr) << ',';
    if (i > 0)
      os << rate(levels[i - 1].result(problem).err_repr, r.err_repr);
    os << '\n';
  }
}

} // namespace heatbem

#endif // HEATBEM_STUDY_HPP
