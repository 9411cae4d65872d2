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


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Levels 0-2 of the convergence study dominate the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "heatbem/assembly.hpp"
#include "heatbem/study.hpp"
#include "heatbem/verify.hpp"

using namespace heatbem;

namespace {

int failures = 0;

void report(int id, const char *name, bool pass, const std::string &detail,
            double seconds) {
  std::printf("%s %d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass)
    ++failures;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double max_abs(const DenseBlock &a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

double asymmetry(const DenseBlock &a) {
  return max_abs(a - a.transpose()) / std::max(max_abs(a), 1e-300);
}

bool within(double v, double target, double rel) {
  return std::abs(v - target) <= rel * target;
}

const KernelParams alpha_half(0.5, 1.0, 1.0);

void criterion_kernel_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  const KernelGridReport r = verify_kernel_grid(KernelGrid{});
  const double s = since(t0);
  report(1, "kernel oracle grid", r.all_pass && !r.empty && s < 30.0,
         fmt("%zu checks, max abs %.2e, max rel %.2e", r.checks.size(),
             r.max_abs_deviation, r.max_rel_deviation),
         s);
}

void criterion_structural() {
  const auto t0 = std::chrono::steady_clock::now();
  const QuadratureConfig quad;
  bool ok = true;
  std::string detail;
  auto note = [&](bool pass, const std::string &what) {
    ok = ok && pass;
    if (!pass)
      detail += what + " ";
  };

  const SurfaceMesh m1 = generate_cube_surface(1, 1.0);
  const SurfaceMesh m2 = generate_cube_surface(2, 1.0);

  // Causality: input on steps >= 2 leaves steps 0 and 1 untouched.
  {
    const TimeGrid g(1.0, 4);
    const auto V = assemble_single_layer(m1, g, alpha_half, quad, Space::p0,
                                         Space::p0);
    SpaceTimeVector x(4, m1.n_elements());
    for (int i = 2; i < 4; ++i)
      for (int j = 0; j < m1.n_elements(); ++j)
        x(i, j) = 1.0 + 0.1 * j;
    const SpaceTimeVector y = apply_toeplitz(V, x);
    double before = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < m1.n_elements(); ++j)
        before = std::max(before, std::abs(y(i, j)));
    note(before == 0.0 && std::abs(y(2, 0)) > 0.0, "causality");
  }

  // Toeplitz reuse: the same step size with more steps repeats the blocks.
  {
    const auto a = assemble_single_layer(m1, TimeGrid(0.5, 2), alpha_half, quad,
                                         Space::p0, Space::p0);
    const auto b = assemble_single_layer(m1, TimeGrid(1.0, 4), alpha_half, quad,
                                         Space::p0, Space::p0);
    bool same = true;
    for (int d = 0; d < 2; ++d)
      same = same && a.block(d) == b.block(d);
    note(same, "toeplitz-reuse");
  }

  // Symmetry of V and D blocks.
  {
    const TimeGrid g(1.0, 3);
    const auto V = assemble_single_layer(m2, g, alpha_half, quad, Space::p0,
                                         Space::p0);
    const auto D = assemble_hypersingular(m2, g, alpha_half, quad);
    double worst = 0.0;
    for (int d = 0; d < 3; ++d)
      worst = std::max({worst, asymmetry(V.block(d)), asymmetry(D.block(d))});
    note(worst <= 1e-12, fmt("symmetry(%.1e)", worst));
    detail += fmt("asym %.1e, ", worst);
  }

  // K^T by transposed apply against the directly assembled adjoint.
  {
    const TimeGrid g(1.0, 3);
    const auto K = assemble_double_layer(m1, g, alpha_half, quad);
    const auto Kt = assemble_adjoint_double_layer(m1, g, alpha_half, quad);
    SpaceTimeVector x(3, m1.n_elements());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < m1.n_elements(); ++j)
        x(i, j) = std::sin(1.0 + i + 0.37 * j);
    const auto y1 = apply_toeplitz(K, x, true);
    const auto y2 = apply_toeplitz(Kt, x, false);
    const double dev = (y1.values() - y2.values()).norm() / y1.values().norm();
    note(dev <= 1e-9, fmt("K-transpose(%.1e)", dev));
    detail += fmt("K^T %.1e, ", dev);
  }

  // D^1 by the sparse curl transform against direct assembly.
  {
    const TimeGrid g(1.0, 2);
    auto V = assemble_single_layer(m1, g, alpha_half, quad, Space::p0,
                                   Space::p0);
    BlockToeplitzMatrix D1(2, m1.n_nodes(), m1.n_nodes());
    add_curl_transformed(D1, V, curl_transform(m1), alpha_half.alpha);
    const auto direct = assemble_hypersingular_d1_direct(m1, g, alpha_half, quad);
    double dev = 0.0;
    for (int d = 0; d < 2; ++d)
      dev = std::max(dev, max_abs(D1.block(d) - direct.block(d)) /
                              max_abs(direct.block(d)));
    note(dev <= 1e-12, fmt("D1(%.1e)", dev));
    detail += fmt("D1 %.1e, ", dev);
  }

  // Mass row sums.
  {
    const TimeGrid g(1.0, 4);
    double dev = 0.0;
    for (const SurfaceMesh *m : {&m1, &m2}) {
      const auto M = assemble_mass(*m, g);
      for (int l = 0; l < m->n_elements(); ++l)
        dev = std::max(dev, std::abs(M.block(0).row(l).sum() -
                                     g.step() * m->area(l)));
    }
    note(dev <= 1e-13, fmt("mass(%.1e)", dev));
    detail += fmt("mass %.1e", dev);
  }
  const double s = since(t0);
  report(2, "structural suite", ok && s < 60.0, detail, s);
}

void criterion_entries() {
  const auto t0 = std::chrono::steady_clock::now();
  const EntryReport r = verify_galerkin_entries(EntrySuite{});
  const double s = since(t0);
  report(3, "galerkin entry oracle",
         r.all_pass && r.n_pairs >= 50 && s < 120.0,
         fmt("%d pairs, %zu checks, max rel %.2e", r.n_pairs, r.checks.size(),
             r.max_rel_deviation),
         s);
}

struct ReferenceRow {
  double computed, projected, repr;
};

void criteria_reproduction() {
  StudyConfig cfg;
  const int max_level = 2;
  std::vector<LevelResult> levels;
  std::vector<double> seconds;
  for (int l = 0; l <= max_level; ++l) {
    const auto t0 = std::chrono::steady_clock::now();
    levels.push_back(run_level(cfg, l, true, true));
    seconds.push_back(since(t0));
    for (Problem p : {Problem::dirichlet, Problem::neumann}) {
      const ProblemResult &r = levels.back().result(p);
      std::printf("  level %d %-9s Et %d Ex %d: computed %.4e projected "
                  "%.4e repr %.4e, %d iterations (%.1f s level total)\n",
                  l, to_string(p), levels.back().n_steps,
                  levels.back().n_elements, r.err_computed, r.err_projected,
                  r.err_repr, r.solve.iterations, seconds.back());
    }
    std::fflush(stdout);
  }
  double total = 0.0;
  for (double s : seconds)
    total += s;

  // Dirichlet.
  {
    const ReferenceRow reference[3] = {{6.07e-1, 5.49e-1, 2.99e-2},
                                       {4.28e-1, 3.77e-1, 3.46e-3},
                                       {1.80e-1, 1.70e-1, 6.51e-4}};
    const double eoc_reference[2] = {0.50, 1.25};
    bool ok = true;
    std::string detail;
    std::vector<double> computed;
    for (int l = 0; l <= max_level; ++l) {
      const ProblemResult &r = levels[l].result(Problem::dirichlet);
      const bool c = within(r.err_computed, reference[l].computed, 0.10);
      const bool p = within(r.err_projected, reference[l].projected, 0.05);
      const bool q = within(r.err_repr, reference[l].repr, 0.25);
      ok = ok && c && p && q;
      computed.push_back(r.err_computed);
      detail += fmt("L%d %.3e%s/%.3e%s/%.3e%s ", l, r.err_computed,
                    c ? "" : "!", r.err_projected, p ? "" : "!", r.err_repr,
                    q ? "" : "!");
    }
    const auto e = eoc(computed);
    for (int k = 0; k < 2; ++k) {
      const bool c = std::abs(e[k] - eoc_reference[k]) <= 0.15;
      ok = ok && c;
      detail += fmt("eoc %.3f%s ", e[k], c ? "" : "!");
    }
    report(4, "dirichlet reproduction", ok, detail, total);
  }

  // Neumann: level 2 by rate and bracket instead of the tabulated cell.
  {
    const ReferenceRow reference[2] = {{3.14e-1, 2.50e-1, 5.16e-2},
                                       {1.51e-1, 1.27e-1, 1.57e-2}};
    bool ok = true;
    std::string detail;
    for (int l = 0; l < 2; ++l) {
      const ProblemResult &r = levels[l].result(Problem::neumann);
      const bool c = within(r.err_computed, reference[l].computed, 0.10);
      const bool p = within(r.err_projected, reference[l].projected, 0.05);
      const bool q = within(r.err_repr, reference[l].repr, 0.25);
      ok = ok && c && p && q;
      detail += fmt("L%d %.3e%s/%.3e%s/%.3e%s ", l, r.err_computed,
                    c ? "" : "!", r.err_projected, p ? "" : "!", r.err_repr,
                    q ? "" : "!");
    }
    const double e1 = levels[1].result(Problem::neumann).err_computed;
    const double e2 = levels[2].result(Problem::neumann).err_computed;
    const double rate = std::log2(e1 / e2);
    const double lo = 0.9 * 3.45e-2 * std::pow(2.0, 0.9);
    const double hi = 1.1 * 1.51e-1 / std::pow(2.0, 0.9);
    const bool c2 = e2 < e1 && rate >= 0.9 && rate <= 1.3 && e2 >= lo && e2 <= hi;
    ok = ok && c2;
    detail += fmt("L2 %.3e in [%.3e, %.3e] eoc %.3f%s", e2, lo, hi, rate,
                  c2 ? "" : "!");
    report(5, "neumann reproduction", ok, detail, total);
  }

  // Solver on every system above.
  {
    bool ok = true;
    double worst_res = 0.0, worst_fwd = 0.0;
    int max_it = 0;
    for (const auto &lr : levels)
      for (Problem p : {Problem::dirichlet, Problem::neumann}) {
        const ProblemResult &r = lr.result(p);
        ok = ok && r.solve.converged && r.solve.relative_residual <= 1e-8 &&
             r.forward_difference <= 1e-6;
        worst_res = std::max(worst_res, r.solve.relative_residual);
        worst_fwd = std::max(worst_fwd, r.forward_difference);
        max_it = std::max(max_it, r.solve.iterations);
      }
    report(6, "solver", ok,
           fmt("6 systems, max residual %.2e, max forward difference %.2e, "
               "max %d iterations",
               worst_res, worst_fwd, max_it),
           total);
  }
}

void criterion_concurrency() {
  const auto t0 = std::chrono::steady_clock::now();
  const int hw = int(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> counts{1, 2, hw};
  // A small machine still gets a run with more workers than cores.
  if (hw <= 2)
    counts.push_back(4);
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  bool ok = true;
  std::string detail = "workers";
  for (int w : counts)
    detail += fmt(" %d", w);

  // Full solves on a small configuration.
  StudyConfig cfg;
  cfg.base_subdivisions = 2;
  cfg.base_steps = 4;
  cfg.interior_points = 0;
  cfg.forward_check = false;
  std::vector<LevelResult> runs;
  for (int w : counts) {
    cfg.assembly.workers = w;
    cfg.assembly.deterministic = true;
    runs.push_back(run_level(cfg, 0, true, true));
  }
  bool identical = true;
  for (const auto &r : runs)
    for (Problem p : {Problem::dirichlet, Problem::neumann})
      identical = identical && r.result(p).solution.values() ==
                                   runs[0].result(p).solution.values();
  ok = ok && identical;
  detail += identical ? ", solutions identical" : ", solutions DIFFER";

  // Economical mode against deterministic, per entry on the block scale.
  {
    const SurfaceMesh m = generate_cube_surface(2, 1.0);
    const TimeGrid g(1.0, 4);
    const QuadratureConfig quad;
    AssemblyOptions det, eco;
    det.workers = 1;
    eco.workers = counts.back();
    eco.deterministic = false;
    double drift = 0.0;
    for (Space s : {Space::p0, Space::p1}) {
      const auto a = assemble_single_layer(m, g, alpha_half, quad, s, s, det);
      const auto b = assemble_single_layer(m, g, alpha_half, quad, s, s, eco);
      for (int d = 0; d < 4; ++d)
        drift = std::max(drift, max_abs(a.block(d) - b.block(d)) /
                                    max_abs(a.block(d)));
    }
    const auto a = assemble_double_layer(m, g, alpha_half, quad, det);
    const auto b = assemble_double_layer(m, g, alpha_half, quad, eco);
    for (int d = 0; d < 4; ++d)
      drift = std::max(drift,
                       max_abs(a.block(d) - b.block(d)) / max_abs(a.block(d)));
    ok = ok && drift <= 1e-12;
    detail += fmt(", economical drift %.1e", drift);
  }

  // Work counter: E_t + 1 passes over the element pairs.
  {
    const auto &t = runs[0].timings;
    const std::uint64_t pairs =
        std::uint64_t(runs[0].n_elements) * runs[0].n_elements;
    const int E = runs[0].n_steps;
    bool counted = !t.empty();
    for (const auto &mt : t) {
      if (mt.name != "K" && mt.name != "V")
        continue;
      counted = counted && mt.time_passes == E + 1 &&
                mt.kernel_batches == pairs * (E + 1) &&
                mt.kernel_batches < pairs * 3 * E;
    }
    ok = ok && counted;
    detail += fmt(", %d passes for Et %d%s", t.front().time_passes, E,
                  counted ? "" : " (counter mismatch)");
  }
  report(7, "concurrency", ok, detail, since(t0));
}

} // namespace

int main() {
  try {
    criterion_kernel_grid();
    criterion_structural();
    criterion_entries();
    criteria_reproduction();
    criterion_concurrency();
  } catch (const std::exception &e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
