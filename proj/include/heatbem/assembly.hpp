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

#ifndef HEATBEM_ASSEMBLY_HPP
#define HEATBEM_ASSEMBLY_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "heatbem/block_toeplitz.hpp"
#include "heatbem/kernels.hpp"
#include "heatbem/mesh.hpp"
#include "heatbem/parallel.hpp"
#include "heatbem/quadrature.hpp"

namespace heatbem {

/// p0: piecewise constant on triangles; p1: continuous piecewise linear.
enum class Space { p0, p1 };

inline int n_dofs(const SurfaceMesh &mesh, Space s) {
  return s == Space::p0 ? mesh.n_elements() : mesh.n_nodes();
}

struct AssemblyStats {
  /// One batch = all quadrature nodes of one element pair at one i_t.
  std::uint64_t kernel_batches = 0;
  std::uint64_t element_pairs = 0;
  int time_passes = 0;
  double seconds = 0.0;
};

struct AssemblyOptions {
  int workers = default_workers();
  /// Fixed-order accumulation; results do not depend on the worker count.
  /// When false, shared rows are accumulated with atomic adds.
  bool deterministic = true;
  AssemblyStats *stats = nullptr;
};

/// How the antiderivative at delta = i_t h_t enters the blocks.
struct PlanEntry {
  int d;
  double multiplier;
  /// d = 0 from i_t = 0 also receives the delta = 0 extra term.
  bool with_extra;
};

class AssemblyPlan {
public:
  explicit AssemblyPlan(int n_steps) : n_steps_(n_steps) {}

  int n_steps() const { return n_steps_; }
  int n_passes() const { return n_steps_ + 1; }

  /// Blocks receiving the value computed at i_t.
  std::vector<PlanEntry> targets(int i_t) const {
    std::vector<PlanEntry> out;
    const int last = n_steps_ - 1;
    if (i_t == 0) {
      out.push_back({0, 1.0, true});
      if (last >= 1)
        out.push_back({1, -1.0, false});
      return out;
    }
    out.push_back({i_t - 1, -1.0, false});
    if (i_t <= last)
      out.push_back({i_t, 2.0, false});
    if (i_t + 1 <= last)
      out.push_back({i_t + 1, -1.0, false});
    return out;
  }

  /// Values of i_t contributing to block d.
  std::vector<int> sources(int d) const {
    if (d == 0)
      return {0, 1};
    return {d - 1, d, d + 1};
  }

private:
  int n_steps_;
};

/// Surface curls of the p1 hat functions: T[o](m, j) is component o of
/// n_m x grad phi_j on triangle m.
struct CurlTransform {
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  std::array<Sparse, 3> T;
};

/// n x grad(lambda_k) on triangle e for local vertex k.
inline Vec3 surface_curl(const SurfaceMesh &mesh, int e, int k) {
  const auto c = mesh.corners(e);
  const Vec3 &n = mesh.normal(e);
  const Vec3 grad =
      (1.0 / (2.0 * mesh.area(e))) * cross(n, c[(k + 2) % 3] - c[(k + 1) % 3]);
  return cross(n, grad);
}

inline CurlTransform curl_transform(const SurfaceMesh &mesh) {
  CurlTransform ct;
  std::array<std::vector<Eigen::Triplet<double>>, 3> trips;
  for (int m = 0; m < mesh.n_elements(); ++m) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 c = surface_curl(mesh, m, k);
      for (int o = 0; o < 3; ++o)
        trips[o].emplace_back(m, mesh.triangle(m)[k], c[o]);
    }
  }
  for (int o = 0; o < 3; ++o) {
    ct.T[o].resize(mesh.n_elements(), mesh.n_nodes());
    ct.T[o].setFromTriplets(trips[o].begin(), trips[o].end());
  }
  return ct;
}

namespace detail {

struct Scratch {
  PairPoints pts;
  /// |x_q - y_q| and the normal component used by the policy.
  std::vector<double> rho, rn;
  std::vector<double> f, e;

  void reserve(std::size_t n) {
    if (f.size() < n) {
      rho.resize(n);
      rn.resize(n);
      f.resize(n);
      e.resize(n);
    }
  }
};

inline void compute_distances(Scratch &s) {
  const PairPoints &p = s.pts;
  for (std::size_t q = 0; q < p.size(); ++q) {
    const double dx = p.x[0][q] - p.y[0][q];
    const double dy = p.x[1][q] - p.y[1][q];
    const double dz = p.x[2][q] - p.y[2][q];
    s.rho[q] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

/// rn_q = sign (x_q - y_q) . n
inline void compute_normal_component(Scratch &s, const Vec3 &n, double sign) {
  const PairPoints &p = s.pts;
  for (std::size_t q = 0; q < p.size(); ++q)
    s.rn[q] = sign * ((p.x[0][q] - p.y[0][q]) * n[0] +
                      (p.x[1][q] - p.y[1][q]) * n[1] +
                      (p.x[2][q] - p.y[2][q]) * n[2]);
}

/// L[a*3+b] = sum_q w_q v_q phi_a(x_q) phi_b(y_q).
inline void integrate_local(const PairPoints &pts, const double *v, Space test,
                            Space trial, double *L) {
  const std::size_t n = pts.size();
  const double *w = pts.w.data();
  if (test == Space::p0 && trial == Space::p0) {
    double s = 0.0;
    for (std::size_t q = 0; q < n; ++q)
      s += w[q] * v[q];
    L[0] = s;
    return;
  }
  if (test == Space::p0) {
    for (int b = 0; b < 3; ++b) {
      const double *lb = pts.trial_bary[b].data();
      double s = 0.0;
      for (std::size_t q = 0; q < n; ++q)
        s += w[q] * v[q] * lb[q];
      L[b] = s;
    }
    return;
  }
  if (trial == Space::p0) {
    for (int a = 0; a < 3; ++a) {
      const double *la = pts.test_bary[a].data();
      double s = 0.0;
      for (std::size_t q = 0; q < n; ++q)
        s += w[q] * v[q] * la[q];
      L[3 * a] = s;
    }
    return;
  }
  for (int a = 0; a < 3; ++a) {
    const double *la = pts.test_bary[a].data();
    for (int b = 0; b < 3; ++b) {
      const double *lb = pts.trial_bary[b].data();
      double s = 0.0;
      for (std::size_t q = 0; q < n; ++q)
        s += w[q] * v[q] * la[q] * lb[q];
      L[3 * a + b] = s;
    }
  }
}

inline double sum_weighted(const PairPoints &pts, const double *v) {
  double s = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q)
    s += pts.w[q] * v[q];
  return s;
}

// Kernel policies. local() fills the local matrices Lf (antiderivative at
// delta = i_t h_t) and, when i_t == 0, Le (the extra delta = 0 term).

struct SingleLayerPolicy {
  KernelParams kp;
  Space test, trial;
  double factor = 1.0;
  static constexpr bool has_extra = true;

  void prepare(int, int, Scratch &s) const { compute_distances(s); }

  void local(int i_t, int, int, Scratch &s, double *Lf, double *Le) const {
    const PairPoints &p = s.pts;
    const std::size_t n = p.size();
    const double delta = i_t * kp.h_t;
    antideriv_tau_t_batch(s.rho.data(), n, delta, kp, s.f.data());
    if (factor != 1.0)
      for (std::size_t q = 0; q < n; ++q)
        s.f[q] *= factor;
    if (i_t == 0)
      for (std::size_t q = 0; q < n; ++q)
        s.e[q] = factor * kp.h_t * antideriv_tau(s.rho[q], 0.0, kp);
    integrate_local(p, s.f.data(), test, trial, Lf);
    if (i_t == 0)
      integrate_local(p, s.e.data(), test, trial, Le);
  }
};

/// p0 test x p1 trial, derivative in the trial normal.
struct DoubleLayerPolicy {
  const SurfaceMesh *mesh;
  KernelParams kp;
  static constexpr Space test = Space::p0, trial = Space::p1;
  static constexpr bool has_extra = true;

  void prepare(int, int j, Scratch &s) const {
    compute_distances(s);
    compute_normal_component(s, mesh->normal(j), 1.0);
  }

  void local(int i_t, int, int, Scratch &s, double *Lf, double *Le) const {
    const PairPoints &p = s.pts;
    const std::size_t n = p.size();
    const double delta = i_t * kp.h_t;
    normal_deriv_antideriv_tau_t_batch(s.rho.data(), s.rn.data(), n, delta, kp,
                                       s.f.data());
    if (i_t == 0)
      for (std::size_t q = 0; q < n; ++q)
        s.e[q] = kp.h_t * normal_deriv_antideriv_tau(s.rho[q], s.rn[q], 0.0, kp);
    integrate_local(p, s.f.data(), test, trial, Lf);
    if (i_t == 0)
      integrate_local(p, s.e.data(), test, trial, Le);
  }
};

/// p1 test x p0 trial with the roles of x and y exchanged: the blocks are
/// the transposes of the double-layer blocks.
struct AdjointDoubleLayerPolicy {
  const SurfaceMesh *mesh;
  KernelParams kp;
  static constexpr Space test = Space::p1, trial = Space::p0;
  static constexpr bool has_extra = true;

  void prepare(int l, int, Scratch &s) const {
    compute_distances(s);
    compute_normal_component(s, mesh->normal(l), -1.0);
  }

  void local(int i_t, int, int, Scratch &s, double *Lf, double *Le) const {
    const PairPoints &p = s.pts;
    const std::size_t n = p.size();
    const double delta = i_t * kp.h_t;
    normal_deriv_antideriv_tau_t_batch(s.rho.data(), s.rn.data(), n, delta, kp,
                                       s.f.data());
    if (i_t == 0)
      for (std::size_t q = 0; q < n; ++q)
        s.e[q] = kp.h_t * normal_deriv_antideriv_tau(s.rho[q], s.rn[q], 0.0, kp);
    integrate_local(p, s.f.data(), test, trial, Lf);
    if (i_t == 0)
      integrate_local(p, s.e.data(), test, trial, Le);
  }
};

/// (n_x . n_y) phi_l phi_j alpha G^dtau.
struct HypersingularD2Policy {
  const SurfaceMesh *mesh;
  KernelParams kp;
  static constexpr Space test = Space::p1, trial = Space::p1;
  static constexpr bool has_extra = false;

  void prepare(int, int, Scratch &s) const { compute_distances(s); }

  void local(int i_t, int l, int j, Scratch &s, double *Lf, double *) const {
    const PairPoints &p = s.pts;
    const std::size_t n = p.size();
    const double delta = i_t * kp.h_t;
    const double c = kp.alpha * dot(mesh->normal(l), mesh->normal(j));
    antideriv_tau_batch(s.rho.data(), n, delta, kp, s.f.data());
    for (std::size_t q = 0; q < n; ++q)
      s.f[q] *= c;
    integrate_local(p, s.f.data(), test, trial, Lf);
  }
};

/// alpha^2 (curl phi_l . curl phi_j) with single-layer temporal weights,
/// integrated directly (reference path for the sparse curl transform).
struct CurlSingleLayerPolicy {
  const SurfaceMesh *mesh;
  KernelParams kp;
  static constexpr Space test = Space::p1, trial = Space::p1;
  static constexpr bool has_extra = true;

  void prepare(int, int, Scratch &s) const { compute_distances(s); }

  void local(int i_t, int l, int j, Scratch &s, double *Lf, double *Le) const {
    const PairPoints &p = s.pts;
    const std::size_t n = p.size();
    const double delta = i_t * kp.h_t;
    antideriv_tau_t_batch(s.rho.data(), n, delta, kp, s.f.data());
    if (i_t == 0)
      for (std::size_t q = 0; q < n; ++q)
        s.e[q] = kp.h_t * antideriv_tau(s.rho[q], 0.0, kp);
    const double a2 = kp.alpha * kp.alpha;
    const double If = a2 * sum_weighted(p, s.f.data());
    const double Ie = i_t == 0 ? a2 * sum_weighted(p, s.e.data()) : 0.0;
    for (int a = 0; a < 3; ++a) {
      const Vec3 ca = surface_curl(*mesh, l, a);
      for (int b = 0; b < 3; ++b) {
        const double c = dot(ca, surface_curl(*mesh, j, b));
        Lf[3 * a + b] = c * If;
        Le[3 * a + b] = c * Ie;
      }
    }
  }
};

inline int dof_of(const SurfaceMesh &mesh, Space s, int e, int k) {
  return s == Space::p0 ? e : mesh.triangle(e)[k];
}

/// Each element pair's nodes and distances are generated once; the
/// antiderivative is then evaluated at all E_t + 1 gaps delta = i_t h_t and
/// scattered into the blocks listed by the plan.
template <class Policy>
void assemble_toeplitz(const SurfaceMesh &mesh, const TimeGrid &grid,
                       const PairQuadrature &pq, const Policy &policy,
                       Space test, Space trial, const AssemblyOptions &opt,
                       BlockToeplitzMatrix &out) {
  const auto start = std::chrono::steady_clock::now();
  const int E = grid.n_steps();
  const int Ex = mesh.n_elements();
  const int n_cols = n_dofs(mesh, trial);
  const int n_test_local = test == Space::p0 ? 1 : 3;
  const int n_trial_local = trial == Space::p0 ? 1 : 3;
  const bool staged = test == Space::p1 && opt.deterministic;
  const AssemblyPlan plan(E);
  const int n_passes = plan.n_passes();
  const int workers = std::max(1, opt.workers);
  const int chunk = staged ? std::max(16, 4 * workers) : Ex;

  std::vector<std::vector<PlanEntry>> targets(n_passes);
  for (int i_t = 0; i_t < n_passes; ++i_t)
    targets[i_t] = plan.targets(i_t);

  std::vector<Scratch> scratch(workers);
  for (auto &s : scratch) {
    // Largest rule: identical-pair Duffy rule or near-field product rule.
    const std::size_t m = pq.config().singular_order;
    const std::size_t nn = triangle_rule(std::min(10, pq.config().regular_order + 2)).size();
    s.reserve(std::max(6 * m * m * m * m * 2, nn * nn));
  }
  const std::size_t row_len = std::size_t(n_test_local) * n_cols;
  // Per element slot: one row set per i_t, then the extra-term rows.
  const std::size_t slot_len = (n_passes + 1) * row_len;
  std::vector<std::vector<double>> stage(staged ? chunk : workers,
                                         std::vector<double>(slot_len));

  auto scatter = [&](int l, const double *R, bool atomic) {
    const double *Re = R + n_passes * row_len;
    for (int i_t = 0; i_t < n_passes; ++i_t) {
      const double *Rf = R + i_t * row_len;
      for (const auto &t : targets[i_t]) {
        DenseBlock &B = out.block(t.d);
        for (int a = 0; a < n_test_local; ++a) {
          double *row = B.data() + std::size_t(dof_of(mesh, test, l, a)) * n_cols;
          const double *rf = Rf + std::size_t(a) * n_cols;
          const double *re = Re + std::size_t(a) * n_cols;
          for (int c = 0; c < n_cols; ++c) {
            const double v =
                t.with_extra ? t.multiplier * (rf[c] + re[c]) : t.multiplier * rf[c];
            if (atomic)
              std::atomic_ref<double>(row[c]).fetch_add(v, std::memory_order_relaxed);
            else
              row[c] += v;
          }
        }
      }
    }
  };

  std::atomic<std::uint64_t> batches{0};
  for (int c0 = 0; c0 < Ex; c0 += chunk) {
    const int c1 = std::min(Ex, c0 + chunk);
    parallel_for(c1 - c0, workers, [&](int idx, int worker) {
      const int l = c0 + idx;
      Scratch &s = scratch[worker];
      std::vector<double> &buf = stage[staged ? idx : worker];
      std::fill(buf.begin(), buf.end(), 0.0);
      double *Re = buf.data() + n_passes * row_len;
      double Lf[9], Le[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
      for (int j = 0; j < Ex; ++j) {
        pq.fill(l, j, s.pts);
        s.reserve(s.pts.size());
        policy.prepare(l, j, s);
        for (int i_t = 0; i_t < n_passes; ++i_t) {
          const bool extra = i_t == 0 && Policy::has_extra;
          policy.local(i_t, l, j, s, Lf, Le);
          double *Rf = buf.data() + i_t * row_len;
          for (int a = 0; a < n_test_local; ++a) {
            for (int b = 0; b < n_trial_local; ++b) {
              const std::size_t col =
                  std::size_t(a) * n_cols + dof_of(mesh, trial, j, b);
              Rf[col] += Lf[3 * a + b];
              if (extra)
                Re[col] += Le[3 * a + b];
            }
          }
        }
      }
      batches.fetch_add(std::uint64_t(Ex) * n_passes, std::memory_order_relaxed);
      if (!staged)
        scatter(l, buf.data(), test == Space::p1);
    });
    if (staged)
      for (int l = c0; l < c1; ++l)
        scatter(l, stage[l - c0].data(), false);
  }

  if (opt.stats) {
    opt.stats->kernel_batches += batches.load();
    opt.stats->element_pairs += std::uint64_t(Ex) * Ex;
    opt.stats->time_passes += n_passes;
    opt.stats->seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
}

inline KernelParams assembly_params(const KernelParams &params,
                                    const SurfaceMesh &mesh,
                                    const TimeGrid &grid) {
  return KernelParams(params.alpha, grid.step(), mesh.diameter());
}

} // namespace detail

/// V_h (p0 x p0) or V_h^11 (p1 x p1). Only params.alpha is used; h_t and the
/// length scale come from the grid and mesh.
inline BlockToeplitzMatrix
assemble_single_layer(const SurfaceMesh &mesh, const TimeGrid &grid,
                      const KernelParams &params, const QuadratureConfig &config,
                      Space test_space, Space trial_space,
                      const AssemblyOptions &opt = {}) {
  if (test_space != trial_space)
    throw std::invalid_argument(
        "assemble_single_layer: test and trial spaces must match");
  const PairQuadrature pq(mesh, config);
  detail::SingleLayerPolicy policy{detail::assembly_params(params, mesh, grid),
                                   test_space, trial_space};
  BlockToeplitzMatrix out(grid.n_steps(), n_dofs(mesh, test_space),
                          n_dofs(mesh, trial_space));
  detail::assemble_toeplitz(mesh, grid, pq, policy, test_space, trial_space,
                            opt, out);
  return out;
}

/// K_h: p0 test x p1 trial.
inline BlockToeplitzMatrix
assemble_double_layer(const SurfaceMesh &mesh, const TimeGrid &grid,
                      const KernelParams &params, const QuadratureConfig &config,
                      const AssemblyOptions &opt = {}) {
  const PairQuadrature pq(mesh, config);
  detail::DoubleLayerPolicy policy{&mesh,
                                   detail::assembly_params(params, mesh, grid)};
  BlockToeplitzMatrix out(grid.n_steps(), mesh.n_elements(), mesh.n_nodes());
  detail::assemble_toeplitz(mesh, grid, pq, policy, Space::p0, Space::p1, opt,
                            out);
  return out;
}

/// Blocks (K_h^d)^T assembled directly as p1 test x p0 trial with the
/// derivative taken in the test normal.
inline BlockToeplitzMatrix assemble_adjoint_double_layer(
    const SurfaceMesh &mesh, const TimeGrid &grid, const KernelParams &params,
    const QuadratureConfig &config, const AssemblyOptions &opt = {}) {
  const PairQuadrature pq(mesh, config);
  detail::AdjointDoubleLayerPolicy policy{
      &mesh, detail::assembly_params(params, mesh, grid)};
  BlockToeplitzMatrix out(grid.n_steps(), mesh.n_nodes(), mesh.n_elements());
  detail::assemble_toeplitz(mesh, grid, pq, policy, Space::p1, Space::p0, opt,
                            out);
  return out;
}

/// D_h^{2,d}: p1 x p1.
inline BlockToeplitzMatrix assemble_hypersingular_d2(
    const SurfaceMesh &mesh, const TimeGrid &grid, const KernelParams &params,
    const QuadratureConfig &config, const AssemblyOptions &opt = {}) {
  const PairQuadrature pq(mesh, config);
  detail::HypersingularD2Policy policy{
      &mesh, detail::assembly_params(params, mesh, grid)};
  BlockToeplitzMatrix out(grid.n_steps(), mesh.n_nodes(), mesh.n_nodes());
  detail::assemble_toeplitz(mesh, grid, pq, policy, Space::p1, Space::p1, opt,
                            out);
  return out;
}

/// D_h^{1,d} assembled with curl-weighted kernels, without the transform.
inline BlockToeplitzMatrix assemble_hypersingular_d1_direct(
    const SurfaceMesh &mesh, const TimeGrid &grid, const KernelParams &params,
    const QuadratureConfig &config, const AssemblyOptions &opt = {}) {
  const PairQuadrature pq(mesh, config);
  detail::CurlSingleLayerPolicy policy{
      &mesh, detail::assembly_params(params, mesh, grid)};
  BlockToeplitzMatrix out(grid.n_steps(), mesh.n_nodes(), mesh.n_nodes());
  detail::assemble_toeplitz(mesh, grid, pq, policy, Space::p1, Space::p1, opt,
                            out);
  return out;
}

/// Adds T^T diag(alpha^2 V^d) T to every block of D. With release_v set, each
/// V block is freed once used.
inline void add_curl_transformed(BlockToeplitzMatrix &D, BlockToeplitzMatrix &V,
                                 const CurlTransform &ct, double alpha,
                                 bool release_v = false, int workers = 1) {
  if (V.block_rows() != V.block_cols() ||
      D.block_rows() != int(ct.T[0].cols()) ||
      V.block_rows() != int(ct.T[0].rows()) || D.n_blocks() != V.n_blocks())
    throw std::invalid_argument("add_curl_transformed: dimension mismatch");
  const double a2 = alpha * alpha;
  parallel_for(V.n_blocks(), workers, [&](int d, int) {
    const DenseBlock &Vd = V.block(d);
    DenseBlock acc = DenseBlock::Zero(D.block_rows(), D.block_cols());
    for (int o = 0; o < 3; ++o) {
      const DenseBlock W = Vd * ct.T[o];
      acc.noalias() += ct.T[o].transpose() * W;
    }
    D.block(d).noalias() += a2 * acc;
    if (release_v)
      V.release_block(d);
  });
}

/// D_h = D^1 + D^2 with D^1 from an already assembled p0 single-layer
/// matrix. V is released block by block when release_v is set.
inline BlockToeplitzMatrix
assemble_hypersingular(const SurfaceMesh &mesh, const TimeGrid &grid,
                       const KernelParams &params,
                       const QuadratureConfig &config, BlockToeplitzMatrix &V,
                       bool release_v, const AssemblyOptions &opt = {}) {
  BlockToeplitzMatrix D =
      assemble_hypersingular_d2(mesh, grid, params, config, opt);
  add_curl_transformed(D, V, curl_transform(mesh), params.alpha, release_v,
                       opt.workers);
  return D;
}

inline BlockToeplitzMatrix
assemble_hypersingular(const SurfaceMesh &mesh, const TimeGrid &grid,
                       const KernelParams &params,
                       const QuadratureConfig &config,
                       const AssemblyOptions &opt = {}) {
  BlockToeplitzMatrix V = assemble_single_layer(mesh, grid, params, config,
                                                Space::p0, Space::p0, opt);
  return assemble_hypersingular(mesh, grid, params, config, V, true, opt);
}

/// h_t M_x with M_x[l, j] = |gamma_l| / 3 for the three vertices j of l;
/// stored as a single block repeated on the block diagonal.
inline BlockToeplitzMatrix assemble_mass(const SurfaceMesh &mesh,
                                         const TimeGrid &grid) {
  BlockToeplitzMatrix M(grid.n_steps(), mesh.n_elements(), mesh.n_nodes(),
                        true);
  DenseBlock &B = M.block(0);
  for (int l = 0; l < mesh.n_elements(); ++l)
    for (int k = 0; k < 3; ++k)
      B(l, mesh.triangle(l)[k]) += grid.step() * mesh.area(l) / 3.0;
  return M;
}

} // namespace heatbem

#endif // HEATBEM_ASSEMBLY_HPP
