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

#ifndef HEATBEM_FIELD_HPP
#define HEATBEM_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "heatbem/assembly.hpp"
#include "heatbem/block_toeplitz.hpp"
#include "heatbem/kernels.hpp"
#include "heatbem/mesh.hpp"
#include "heatbem/parallel.hpp"
#include "heatbem/quadrature.hpp"

namespace heatbem {

/// Scalar data on the lateral boundary: f(x, n(x), t).
using BoundaryFunction =
    std::function<double(const Vec3 &x, const Vec3 &n, double t)>;

/// u(x, t) = G_alpha(x - y*, t) with y* outside the closed domain.
struct ManufacturedSolution {
  Vec3 source{0.0, 0.0, 1.5};
  double alpha = 0.5;

  double value(const Vec3 &x, double t) const {
    return fundamental(x - source, t, alpha);
  }
  /// alpha du/dn.
  double flux(const Vec3 &x, const Vec3 &n, double t) const {
    return grad_fundamental_normal(x - source, n, t, alpha);
  }

  BoundaryFunction dirichlet() const {
    return [s = *this](const Vec3 &x, const Vec3 &, double t) {
      return s.value(x, t);
    };
  }
  BoundaryFunction neumann() const {
    return [s = *this](const Vec3 &x, const Vec3 &n, double t) {
      return s.flux(x, n, t);
    };
  }
};

struct EvalPoint {
  Vec3 x{};
  double t = 0.0;
};

/// t = k h_t + eps with eps in [0, h_t); t values within 1e-12 h_t below a
/// grid node are snapped onto it.
inline std::pair<int, double> split_time(double t, double h) {
  const int k = int(std::floor(t / h + 1e-12));
  return {k, std::max(0.0, t - k * h)};
}

struct QuadraturePoint1D {
  double t, w;
};

namespace detail {

/// Gauss-4 nodes on every time step, weights summing to h.
inline std::vector<QuadraturePoint1D> step_rule(const TimeGrid &grid, int i,
                                                int n = 4) {
  const LineRule g = gauss01(n);
  std::vector<QuadraturePoint1D> out;
  for (std::size_t q = 0; q < g.size(); ++q)
    out.push_back({(i + g.nodes[q]) * grid.step(), g.weights[q] * grid.step()});
  return out;
}

inline constexpr int projection_space_order = 6;

} // namespace detail

/// p1 spatial mass matrix with entries |gamma| (1 + [a == b]) / 12.
inline Eigen::MatrixXd p1_mass_matrix(const SurfaceMesh &mesh) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(mesh.n_nodes(), mesh.n_nodes());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto &t = mesh.triangle(e);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        M(t[a], t[b]) += mesh.area(e) * (a == b ? 2.0 : 1.0) / 12.0;
  }
  return M;
}

/// L2(Sigma_h) projection onto X00 (p0 in space) or X10 (p1 in space), both
/// p0 in time.
inline SpaceTimeVector project_to_space(const BoundaryFunction &fn,
                                        const SurfaceMesh &mesh,
                                        const TimeGrid &grid, Space space) {
  const TriangleRule &rule = triangle_rule(detail::projection_space_order);
  const int E = grid.n_steps();
  const double h = grid.step();
  SpaceTimeVector out(E, n_dofs(mesh, space));
  Eigen::LLT<Eigen::MatrixXd> mass;
  if (space == Space::p1)
    mass.compute(p1_mass_matrix(mesh));
  for (int i = 0; i < E; ++i) {
    const auto times = detail::step_rule(grid, i);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(out.n_dofs());
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto c = mesh.corners(e);
      const Vec3 &n = mesh.normal(e);
      const auto &tri = mesh.triangle(e);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double u = rule.nodes[q][0], v = rule.nodes[q][1];
        const Vec3 x = c[0] + u * (c[1] - c[0]) + v * (c[2] - c[0]);
        double f = 0.0;
        for (const auto &tq : times)
          f += tq.w * fn(x, n, tq.t);
        // Time average times the surface measure of the node.
        const double wf = 2.0 * mesh.area(e) * rule.weights[q] * f / h;
        if (space == Space::p0) {
          load[e] += wf;
        } else {
          const double lam[3] = {1.0 - u - v, u, v};
          for (int k = 0; k < 3; ++k)
            load[tri[k]] += wf * lam[k];
        }
      }
    }
    if (space == Space::p0) {
      for (int e = 0; e < mesh.n_elements(); ++e)
        load[e] /= mesh.area(e);
      out.step(i) = load;
    } else {
      out.step(i) = mass.solve(load);
    }
  }
  return out;
}

/// ||f - f_h|| / ||f|| in L2(Sigma_h) with triangle order 6 and Gauss-4 per
/// time step.
inline double relative_error_sigma(const SpaceTimeVector &coeffs,
                                   const BoundaryFunction &exact, Space space,
                                   const SurfaceMesh &mesh,
                                   const TimeGrid &grid) {
  if (coeffs.n_steps() != grid.n_steps() ||
      coeffs.n_dofs() != n_dofs(mesh, space))
    throw std::invalid_argument("relative_error_sigma: dimension mismatch");
  const TriangleRule &rule = triangle_rule(detail::projection_space_order);
  double err2 = 0.0, ref2 = 0.0;
  for (int i = 0; i < grid.n_steps(); ++i) {
    const auto times = detail::step_rule(grid, i);
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto c = mesh.corners(e);
      const Vec3 &n = mesh.normal(e);
      const auto &tri = mesh.triangle(e);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double u = rule.nodes[q][0], v = rule.nodes[q][1];
        const Vec3 x = c[0] + u * (c[1] - c[0]) + v * (c[2] - c[0]);
        double uh;
        if (space == Space::p0) {
          uh = coeffs(i, e);
        } else {
          uh = (1.0 - u - v) * coeffs(i, tri[0]) + u * coeffs(i, tri[1]) +
               v * coeffs(i, tri[2]);
        }
        const double ws = 2.0 * mesh.area(e) * rule.weights[q];
        for (const auto &tq : times) {
          const double f = exact(x, n, tq.t);
          err2 += ws * tq.w * (f - uh) * (f - uh);
          ref2 += ws * tq.w * f * f;
        }
      }
    }
  }
  if (!(ref2 > 0.0))
    throw std::domain_error("relative_error_sigma: exact function has zero norm");
  return std::sqrt(err2 / ref2);
}

/// eoc_k = log2(e_{k-1} / e_k).
inline std::vector<double> eoc(const std::vector<double> &errors) {
  for (double e : errors)
    if (!(e > 0.0))
      throw std::domain_error("eoc: errors must be positive");
  std::vector<double> out;
  for (std::size_t k = 1; k < errors.size(); ++k)
    out.push_back(std::log2(errors[k - 1] / errors[k]));
  return out;
}

/// Distance from p to the closed triangle (a, b, c).
inline double point_triangle_distance(const Vec3 &p, const Vec3 &a,
                                      const Vec3 &b, const Vec3 &c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0)
    return norm(ap);
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3)
    return norm(bp);
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0)
    return norm(p - (a + (d1 / (d1 - d3)) * ab));
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6)
    return norm(cp);
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0)
    return norm(p - (a + (d2 / (d2 - d6)) * ac));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return norm(p - (b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b)));
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return norm(p - (a + v * ab + w * ac));
}

struct PotentialResult {
  std::vector<double> values;
  /// Set when some point lies within 1e-8 diam of the boundary.
  bool near_boundary = false;
};

struct PotentialOptions {
  int workers = default_workers();
};

namespace detail {

// Single- and double-layer potentials at once; the erf/exp values at the
// shifted times are shared between the two. Either density may be null.
inline void evaluate_potentials(const std::vector<EvalPoint> &points,
                                const SurfaceMesh &mesh, const TimeGrid &grid,
                                const KernelParams &params,
                                const QuadratureConfig &config,
                                const SpaceTimeVector *w,
                                const SpaceTimeVector *u, std::vector<double> *Vw,
                                std::vector<double> *Wu, bool &near_boundary,
                                const PotentialOptions &opt) {
  const int E = grid.n_steps();
  const double h = grid.step();
  const KernelParams kp(params.alpha, h, mesh.diameter());
  const double alpha = kp.alpha;
  if (w && (w->n_steps() != E || w->n_dofs() != mesh.n_elements()))
    throw std::invalid_argument("single-layer density: dimension mismatch");
  if (u && (u->n_steps() != E || u->n_dofs() != mesh.n_nodes()))
    throw std::invalid_argument("double-layer density: dimension mismatch");
  const ElementPoints ep(mesh, config.regular_order);
  const int nq = ep.n_per_element;
  const int Ex = mesh.n_elements();
  const std::size_t np = points.size();
  if (Vw)
    Vw->assign(np, 0.0);
  if (Wu)
    Wu->assign(np, 0.0);
  std::vector<char> near(np, 0);
  const double near_tol = 1e-8 * mesh.diameter();

  parallel_for(int(np), std::max(1, opt.workers), [&](int ip, int) {
    const EvalPoint &pt = points[ip];
    const auto [k, eps] = split_time(pt.t, h);
    for (int e = 0; e < Ex; ++e) {
      const auto c = mesh.corners(e);
      if (point_triangle_distance(pt.x, c[0], c[1], c[2]) < near_tol) {
        near[ip] = 1;
        break;
      }
    }
    // History steps s = k - 1 - d for d = 0 .. k - 1 (only s < E exist) and
    // the current step s = k when eps > 0.
    const int d_first = std::max(0, k - E);
    const bool current = eps > 0.0 && k < E;
    if (d_first > k - 1 && !current)
      return;
    // delta_m = m h + eps, m = d_first .. k.
    const int m0 = d_first, m1 = k;
    std::vector<double> inv_two_sqrt(m1 - m0 + 1), sqrt_pad(m1 - m0 + 1);
    for (int m = m0; m <= m1; ++m) {
      const double delta = m * h + eps;
      inv_two_sqrt[m - m0] = delta > kp.delta_eps()
                                 ? 1.0 / (2.0 * std::sqrt(alpha * delta))
                                 : 0.0;
      sqrt_pad[m - m0] = std::sqrt(detail::pi * alpha * delta);
    }
    std::vector<double> gt(m1 - m0 + 1), gn(m1 - m0 + 1);
    double vsum = 0.0, wsum = 0.0;
    for (int e = 0; e < Ex; ++e) {
      const auto &tri = mesh.triangle(e);
      const Vec3 &ny = mesh.normal(e);
      const double scale = 2.0 * mesh.area(e);
      for (int q = 0; q < nq; ++q) {
        const std::size_t iq = std::size_t(e) * nq + q;
        const Vec3 r{pt.x[0] - ep.x[0][iq], pt.x[1] - ep.x[1][iq],
                     pt.x[2] - ep.x[2][iq]};
        const double rho = norm(r);
        const double rn = dot(r, ny);
        const double wq = scale * ep.w[q];
        // g_m = G^dtau(rho, delta_m), n_m = alpha dG^dtau/dn_y(rho, delta_m)
        for (int m = m0; m <= m1; ++m) {
          const int i = m - m0;
          if (inv_two_sqrt[i] == 0.0) {
            gt[i] = antideriv_tau(rho, 0.0, kp);
            gn[i] = normal_deriv_antideriv_tau(rho, rn, 0.0, kp);
            continue;
          }
          const double x = rho * inv_two_sqrt[i];
          if (x < detail::series_switch) {
            gt[i] = antideriv_tau(rho, m * h + eps, kp);
            gn[i] = normal_deriv_antideriv_tau(rho, rn, m * h + eps, kp);
            continue;
          }
          const double erfx = std::erf(x);
          gt[i] = erfx * detail::inv_four_pi / (alpha * rho);
          gn[i] = detail::inv_four_pi * rn / (rho * rho) *
                  (erfx / rho - std::exp(-x * x) / sqrt_pad[i]);
        }
        double sv = 0.0, sw = 0.0;
        for (int d = d_first; d <= k - 1; ++d) {
          const int s = k - 1 - d;
          const int i = d - m0;
          if (w)
            sv += (*w)(s, e) * (gt[i] - gt[i + 1]);
          if (u) {
            const double ph = ep.bary[0][iq] * (*u)(s, tri[0]) +
                              ep.bary[1][iq] * (*u)(s, tri[1]) +
                              ep.bary[2][iq] * (*u)(s, tri[2]);
            sw += ph * (gn[i] - gn[i + 1]);
          }
        }
        if (current) {
          // m0 == 0 here, so gt[0] is the value at delta = eps.
          const double g0 = antideriv_tau(rho, 0.0, kp);
          const double n0 = normal_deriv_antideriv_tau(rho, rn, 0.0, kp);
          if (w)
            sv += (*w)(k, e) * (g0 - gt[0]);
          if (u) {
            const double ph = ep.bary[0][iq] * (*u)(k, tri[0]) +
                              ep.bary[1][iq] * (*u)(k, tri[1]) +
                              ep.bary[2][iq] * (*u)(k, tri[2]);
            sw += ph * (n0 - gn[0]);
          }
        }
        vsum += wq * sv;
        wsum += wq * sw;
      }
    }
    if (Vw)
      (*Vw)[ip] = vsum;
    if (Wu)
      (*Wu)[ip] = wsum;
  }, 16);
  near_boundary = std::any_of(near.begin(), near.end(), [](char c) { return c; });
}

} // namespace detail

inline PotentialResult eval_single_layer_potential(
    const SpaceTimeVector &w, const std::vector<EvalPoint> &points,
    const SurfaceMesh &mesh, const TimeGrid &grid, const KernelParams &params,
    const QuadratureConfig &config, const PotentialOptions &opt = {}) {
  PotentialResult r;
  detail::evaluate_potentials(points, mesh, grid, params, config, &w, nullptr,
                              &r.values, nullptr, r.near_boundary, opt);
  return r;
}

inline PotentialResult eval_double_layer_potential(
    const SpaceTimeVector &u, const std::vector<EvalPoint> &points,
    const SurfaceMesh &mesh, const TimeGrid &grid, const KernelParams &params,
    const QuadratureConfig &config, const PotentialOptions &opt = {}) {
  PotentialResult r;
  detail::evaluate_potentials(points, mesh, grid, params, config, nullptr, &u,
                              nullptr, &r.values, r.near_boundary, opt);
  return r;
}

/// u(x, t) = (V~ w)(x, t) - (W u)(x, t).
inline PotentialResult represent(const SpaceTimeVector &u_coeffs,
                                 const SpaceTimeVector &w_coeffs,
                                 const std::vector<EvalPoint> &points,
                                 const SurfaceMesh &mesh, const TimeGrid &grid,
                                 const KernelParams &params,
                                 const QuadratureConfig &config,
                                 const PotentialOptions &opt = {}) {
  PotentialResult r;
  std::vector<double> vw, wu;
  detail::evaluate_potentials(points, mesh, grid, params, config, &w_coeffs,
                              &u_coeffs, &vw, &wu, r.near_boundary, opt);
  r.values.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    r.values[i] = vw[i] - wu[i];
  return r;
}

/// Relative l2 error of values against exact(x, t) over the points.
inline double relative_error_points(const std::vector<double> &values,
                                    const std::vector<EvalPoint> &points,
                                    const ManufacturedSolution &exact) {
  double e2 = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double u = exact.value(points[i].x, points[i].t);
    e2 += (u - values[i]) * (u - values[i]);
    r2 += u * u;
  }
  if (!(r2 > 0.0))
    throw std::domain_error("relative_error_points: exact values vanish");
  return std::sqrt(e2 / r2);
}

/// Interior evaluation set used by the convergence study: the 22^3 lattice
/// on [-0.5, 0.5]^3 in lexicographic order, truncated to `count` points,
/// with times 0.25 + 0.025 (j mod 21).
inline std::vector<EvalPoint> interior_evaluation_points(int count = 10000) {
  std::vector<EvalPoint> out;
  out.reserve(count);
  const int n = 22;
  for (int i = 0; i < n && int(out.size()) < count; ++i)
    for (int j = 0; j < n && int(out.size()) < count; ++j)
      for (int k = 0; k < n && int(out.size()) < count; ++k) {
        const int idx = int(out.size());
        out.push_back({{-0.5 + i / 21.0, -0.5 + j / 21.0, -0.5 + k / 21.0},
                       0.25 + 0.025 * (idx % 21)});
      }
  return out;
}

} // namespace heatbem

#endif // HEATBEM_FIELD_HPP
