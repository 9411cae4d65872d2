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

#ifndef HEATBEM_VERIFY_HPP
#define HEATBEM_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "heatbem/assembly.hpp"
#include "heatbem/kernels.hpp"
#include "heatbem/mesh.hpp"
#include "heatbem/oracle.hpp"

// Closed-form temporal weights and assembled entries against the oracle.

namespace heatbem {

struct KernelGrid {
  /// Distances as multiples of length_scale.
  std::vector<double> rho_factors{0.05, 0.2, 1.0, 3.0};
  std::vector<double> alphas{0.5, 1.0, 2.0};
  std::vector<double> steps{1.0 / 8, 1.0 / 32};
  std::vector<int> blocks{0, 1, 2, 5, 20};
  /// Diameter of the reference cube [-1, 1]^3.
  double length_scale = 2.0 * std::sqrt(3.0);
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  /// Relative perturbation of alpha in the closed form only (mutation hook).
  double perturb_alpha = 0.0;
};

struct KernelCheck {
  TemporalWeightKind kind;
  double rho, alpha, h_t;
  int d;
  double closed_form, oracle, deviation;
  bool pass;
};

struct KernelGridReport {
  std::vector<KernelCheck> checks;
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;
  bool all_pass = true;
  bool empty = true;
};

inline const char *to_string(TemporalWeightKind k) {
  switch (k) {
  case TemporalWeightKind::SingleLayer:
    return "single_layer";
  case TemporalWeightKind::DoubleLayer:
    return "double_layer";
  case TemporalWeightKind::HypersingularD2:
    return "hypersingular_d2";
  }
  return "?";
}

inline KernelGridReport verify_kernel_grid(const KernelGrid &grid,
                                           const OracleConfig &cfg = {}) {
  KernelGridReport rep;
  const Vec3 dir{1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
  const Vec3 n_y{0.0, 0.6, 0.8};
  for (auto kind : {TemporalWeightKind::SingleLayer,
                    TemporalWeightKind::DoubleLayer,
                    TemporalWeightKind::HypersingularD2})
    for (double rf : grid.rho_factors)
      for (double a : grid.alphas)
        for (double h : grid.steps)
          for (int d : grid.blocks) {
            const double rho = rf * grid.length_scale;
            const Vec3 r = rho * dir;
            const KernelParams exact(a, h, grid.length_scale);
            const KernelParams tested(a * (1.0 + grid.perturb_alpha), h,
                                      grid.length_scale);
            const double c = temporal_weight(kind, r, n_y, d, tested);
            const double o = oracle_temporal_weight(kind, r, n_y, d, exact, cfg).value;
            const double dev = std::abs(c - o);
            const bool ok =
                dev <= std::max(grid.abs_tol, grid.rel_tol * std::abs(o));
            rep.checks.push_back({kind, rho, a, h, d, c, o, dev, ok});
            rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
            // Relative deviation only where the relative bound is the binding one.
            if (std::abs(o) * grid.rel_tol >= grid.abs_tol)
              rep.max_rel_deviation =
                  std::max(rep.max_rel_deviation, dev / std::abs(o));
            rep.all_pass = rep.all_pass && ok;
            rep.empty = false;
          }
  return rep;
}

struct EntryCheck {
  OperatorKind kind;
  int test_dof, trial_dof, d;
  double assembled, oracle, rel_deviation;
  bool pass;
};

/// Dofs whose supports are pairwise separated, drawn reproducibly.
inline std::vector<std::pair<int, int>>
random_separated_dofs(const SurfaceMesh &mesh, Space test, Space trial,
                      int count, unsigned seed) {
  auto support = [&](Space s, int dof) {
    std::vector<int> out;
    if (s == Space::p0)
      return std::vector<int>{dof};
    for (int e = 0; e < mesh.n_elements(); ++e)
      for (int k = 0; k < 3; ++k)
        if (mesh.triangle(e)[k] == dof)
          out.push_back(e);
    return out;
  };
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick_test(0, n_dofs(mesh, test) - 1);
  std::uniform_int_distribution<int> pick_trial(0, n_dofs(mesh, trial) - 1);
  std::vector<std::pair<int, int>> out;
  for (int attempt = 0; attempt < 100000 && int(out.size()) < count; ++attempt) {
    const int a = pick_test(rng), b = pick_trial(rng);
    bool ok = true;
    for (int e : support(test, a))
      for (int f : support(trial, b))
        ok = ok && classify_pair(mesh, e, f).type == PairType::separated;
    if (ok && std::find(out.begin(), out.end(), std::make_pair(a, b)) == out.end())
      out.push_back({a, b});
  }
  return out;
}

struct EntrySuite {
  int subdivisions = 2;
  int n_steps = 4;
  double alpha = 0.5;
  /// Requested pairs per operator; fewer are used when the mesh does not
  /// have enough separated pairs.
  int pairs_per_kind = 20;
  std::vector<int> blocks{1, 2, 3};
  std::vector<OperatorKind> kinds{OperatorKind::SingleLayer,
                                  OperatorKind::DoubleLayer,
                                  OperatorKind::HypersingularD2};
  unsigned seed = 2024;
  double rel_tol = 1e-8;
  QuadratureConfig quadrature;
  int workers = 1;
  /// Relative perturbation of alpha in the assembled matrices only.
  double perturb_alpha = 0.0;
};

struct EntryReport {
  std::vector<EntryCheck> checks;
  int n_pairs = 0;
  double max_rel_deviation = 0.0;
  bool all_pass = true;
};

inline const char *to_string(OperatorKind k) {
  switch (k) {
  case OperatorKind::SingleLayer:
    return "V";
  case OperatorKind::SingleLayer11:
    return "V11";
  case OperatorKind::DoubleLayer:
    return "K";
  case OperatorKind::HypersingularD2:
    return "D2";
  }
  return "?";
}

/// Assembled entries of random separated dof pairs against
/// oracle_galerkin_entry with the same spatial nodes.
inline EntryReport verify_galerkin_entries(const EntrySuite &suite,
                                           const OracleConfig &cfg = {}) {
  const SurfaceMesh mesh = generate_cube_surface(suite.subdivisions);
  const TimeGrid grid(1.0, suite.n_steps);
  const KernelParams exact(suite.alpha, grid.step(), mesh.diameter());
  const KernelParams tested(suite.alpha * (1.0 + suite.perturb_alpha),
                            grid.step(), mesh.diameter());
  const AssemblyOptions opt{suite.workers, true, nullptr};
  EntryReport rep;
  for (OperatorKind kind : suite.kinds) {
    Space test = Space::p0, trial = Space::p0;
    BlockToeplitzMatrix A;
    switch (kind) {
    case OperatorKind::SingleLayer:
      A = assemble_single_layer(mesh, grid, tested, suite.quadrature, test,
                                trial, opt);
      break;
    case OperatorKind::SingleLayer11:
      test = trial = Space::p1;
      A = assemble_single_layer(mesh, grid, tested, suite.quadrature, test,
                                trial, opt);
      break;
    case OperatorKind::DoubleLayer:
      trial = Space::p1;
      A = assemble_double_layer(mesh, grid, tested, suite.quadrature, opt);
      break;
    case OperatorKind::HypersingularD2:
      test = trial = Space::p1;
      A = assemble_hypersingular_d2(mesh, grid, tested, suite.quadrature, opt);
      break;
    }
    const auto pairs = random_separated_dofs(mesh, test, trial,
                                             suite.pairs_per_kind, suite.seed);
    rep.n_pairs += int(pairs.size());
    for (auto [a, b] : pairs)
      for (int d : suite.blocks) {
        if (d < 0 || d >= suite.n_steps)
          throw std::invalid_argument("verify_galerkin_entries: bad block index");
        const double o =
            oracle_galerkin_entry(kind, mesh, a, b, d, exact, suite.quadrature, cfg);
        const double v = A.block(d)(a, b);
        const double dev = std::abs(v - o) / std::max(std::abs(o), 1e-300);
        const bool ok = std::abs(v - o) <= suite.rel_tol * std::abs(o);
        rep.checks.push_back({kind, a, b, d, v, o, dev, ok});
        rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev);
        rep.all_pass = rep.all_pass && ok;
      }
  }
  return rep;
}

} // namespace heatbem

#endif // HEATBEM_VERIFY_HPP
