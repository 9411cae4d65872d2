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

#ifndef HEATBEM_ORACLE_HPP
#define HEATBEM_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "heatbem/assembly.hpp"
#include "heatbem/kernels.hpp"
#include "heatbem/mesh.hpp"
#include "heatbem/quadrature.hpp"

// Brute-force time integration of the heat kernel. Only pointwise values of
// G and its normal derivative are used, never the antiderivatives.

namespace heatbem {

struct OracleConfig {
  /// Relative tolerance per panel.
  double tolerance = 1e-13;
  /// Bisection depth limit per initial panel.
  unsigned max_depth = 30;
  /// Kronrod points per panel: 15, 31 or 61.
  int points = 31;
};

struct OracleResult {
  double value = 0.0;
  double error = 0.0;
  /// Integral of |g|; the tolerance check is relative to it.
  double l1 = 0.0;
};

class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Bisection driven by the single-panel Kronrod estimate. Boost 1.74 reports
// that estimate on the reference interval [-1, 1] (unscaled), which also
// skews its own recursion on short panels, so the scaling is applied here.
// A panel is accepted when its estimate is below the relative tolerance,
// the rounding floor, or the absolute floor abs_tol (which lets panels of
// negligible mass with denormal-range values through).
template <unsigned N, class F>
OracleResult gk_panel(F &&f, double a, double b, const OracleConfig &cfg,
                      double abs_tol, unsigned depth = 0) {
  double err = 0.0, l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, N>::integrate(
      f, a, b, 0, 0.0, &err, &l1);
  err *= 0.5 * (b - a);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (err <= std::max({cfg.tolerance * l1, floor, abs_tol}))
    return {v, err, l1};
  if (depth >= cfg.max_depth)
    throw OracleError("oracle quadrature did not reach the tolerance");
  const double m = 0.5 * (a + b);
  const auto lo = gk_panel<N>(f, a, m, cfg, 0.5 * abs_tol, depth + 1);
  const auto hi = gk_panel<N>(f, m, b, cfg, 0.5 * abs_tol, depth + 1);
  return {lo.value + hi.value, lo.error + hi.error, lo.l1 + hi.l1};
}

template <class F>
OracleResult gk(F &&f, double a, double b, const OracleConfig &cfg,
                double abs_tol = 0.0) {
  if (cfg.points <= 15)
    return gk_panel<15>(f, a, b, cfg, abs_tol);
  if (cfg.points <= 31)
    return gk_panel<31>(f, a, b, cfg, abs_tol);
  return gk_panel<61>(f, a, b, cfg, abs_tol);
}

// Integral over s in [a, b] of g(s), where g may vary on the scale
// s_peak (and on the scale of s itself near s = 0). Panels are split at the
// peak and graded geometrically towards 0.
template <class F>
OracleResult integrate_time(F &&g, double a, double b, double s_peak,
                            const OracleConfig &cfg) {
  OracleResult out;
  if (!(b > a))
    return out;
  std::vector<double> cuts{a, b};
  for (double f : {1.0 / 16, 0.25, 1.0, 4.0, 16.0}) {
    const double c = f * s_peak;
    if (c > a && c < b)
      cuts.push_back(c);
  }
  if (a == 0.0) {
    // Geometric grading; below 1e-4 s_peak the kernels underflow.
    const double stop = std::max(1e-4 * s_peak, 1e-300);
    for (double c = b / 2; c > stop; c /= 2)
      cuts.push_back(c);
    cuts.push_back(std::min(stop, b / 2));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // Rough mass of the whole interval sets the absolute floor per panel.
  const std::size_t n_panels = cuts.size() - 1;
  double mass = 0.0;
  for (std::size_t i = 0; i < n_panels; ++i) {
    double err = 0.0, l1 = 0.0;
    boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        g, cuts[i], cuts[i + 1], 0, 0.0, &err, &l1);
    mass += l1;
  }
  const double abs_tol = 1e-3 * cfg.tolerance * mass / double(n_panels);
  for (std::size_t i = 0; i < n_panels; ++i) {
    const auto r = gk(g, cuts[i], cuts[i + 1], cfg, abs_tol);
    out.value += r.value;
    out.error += r.error;
    out.l1 += r.l1;
  }
  return out;
}

} // namespace detail

/// Double time integral behind a temporal weight. SingleLayer, DoubleLayer:
///   int_{d h}^{(d+1) h} int_0^h g(r, t - tau) dtau dt
/// with g = G or alpha dG/dn_y; for d = 0 the inner integral runs over
/// (0, t). For HypersingularD2,
///   d = 0:  alpha int_0^h G(r, s) ds,
///   d >= 1: -alpha int_{d h}^{(d+1) h} [G(r, t - h) - G(r, t)] dt.
inline OracleResult oracle_temporal_weight(TemporalWeightKind kind,
                                           const Vec3 &r, const Vec3 &n_y,
                                           int d, const KernelParams &p,
                                           const OracleConfig &cfg = {}) {
  const double rho = norm(r);
  if (!(rho > 0.0))
    throw std::invalid_argument("oracle_temporal_weight: |r| must be positive");
  if (d < 0)
    throw std::invalid_argument("oracle_temporal_weight: negative d");
  const double a = p.alpha, h = p.h_t;
  const double s_peak = rho * rho / (6.0 * a);
  auto G = [&](double s) { return fundamental(r, s, a); };
  auto dG = [&](double s) { return grad_fundamental_normal_y(r, n_y, s, a); };

  if (kind == TemporalWeightKind::HypersingularD2) {
    if (d == 0) {
      auto res = detail::integrate_time(G, 0.0, h, s_peak, cfg);
      return {a * res.value, a * res.error};
    }
    const auto lo = detail::integrate_time(G, (d - 1) * h, d * h, s_peak, cfg);
    const auto hi = detail::integrate_time(G, d * h, (d + 1) * h, s_peak, cfg);
    return {-a * (lo.value - hi.value), a * (lo.error + hi.error)};
  }
  if (kind == TemporalWeightKind::DoubleLayer && dot(r, n_y) == 0.0)
    return {0.0, 0.0};

  double inner_error = 0.0;
  auto inner = [&](double t) {
    const double s0 = std::max(0.0, t - h);
    OracleResult res;
    if (kind == TemporalWeightKind::SingleLayer)
      res = detail::integrate_time(G, s0, t, s_peak, cfg);
    else
      res = detail::integrate_time(dG, s0, t, s_peak, cfg);
    inner_error = std::max(inner_error, res.error);
    return res.value;
  };
  const auto outer = detail::integrate_time(inner, d * h, (d + 1) * h,
                                            d == 0 ? s_peak : 0.0, cfg);
  return {outer.value, outer.error + h * inner_error};
}

/// Same integral reduced to one dimension: the measure of
/// {t in [d h, (d+1) h] : t - h <= s <= t} is a tent in s, so the weight
/// is int g(s) tent(s) ds. Used for the Galerkin-entry oracle.
inline OracleResult oracle_temporal_weight_1d(TemporalWeightKind kind,
                                              const Vec3 &r, const Vec3 &n_y,
                                              int d, const KernelParams &p,
                                              const OracleConfig &cfg = {}) {
  if (kind == TemporalWeightKind::HypersingularD2)
    return oracle_temporal_weight(kind, r, n_y, d, p, cfg);
  const double rho = norm(r);
  if (!(rho > 0.0))
    throw std::invalid_argument("oracle_temporal_weight: |r| must be positive");
  const double a = p.alpha, h = p.h_t;
  const double s_peak = rho * rho / (6.0 * a);
  if (kind == TemporalWeightKind::DoubleLayer && dot(r, n_y) == 0.0)
    return {0.0, 0.0};
  auto g = [&](double s) {
    return kind == TemporalWeightKind::SingleLayer
               ? fundamental(r, s, a)
               : grad_fundamental_normal_y(r, n_y, s, a);
  };
  if (d == 0) {
    auto f = [&](double s) { return g(s) * (h - s); };
    return detail::integrate_time(f, 0.0, h, s_peak, cfg);
  }
  auto up = [&](double s) { return g(s) * (s - (d - 1) * h); };
  auto down = [&](double s) { return g(s) * ((d + 1) * h - s); };
  const auto r1 = detail::integrate_time(up, (d - 1) * h, d * h, s_peak, cfg);
  const auto r2 = detail::integrate_time(down, d * h, (d + 1) * h, s_peak, cfg);
  return {r1.value + r2.value, r1.error + r2.error};
}

enum class OperatorKind { SingleLayer, SingleLayer11, DoubleLayer, HypersingularD2 };

/// Entry (test dof, trial dof) of block d computed with the spatial nodes of
/// `spatial` and oracle time integration at every node pair. Every element
/// pair in the supports must be separated.
inline double oracle_galerkin_entry(OperatorKind kind, const SurfaceMesh &mesh,
                                    int test_dof, int trial_dof, int d,
                                    const KernelParams &params,
                                    const QuadratureConfig &spatial,
                                    const OracleConfig &cfg = {}) {
  const Space test = kind == OperatorKind::SingleLayer || kind == OperatorKind::DoubleLayer
                         ? Space::p0
                         : Space::p1;
  const Space trial = kind == OperatorKind::SingleLayer ? Space::p0 : Space::p1;
  auto support = [&](Space s, int dof) {
    std::vector<std::pair<int, int>> out; // (element, local vertex)
    if (s == Space::p0) {
      out.push_back({dof, -1});
      return out;
    }
    for (int e = 0; e < mesh.n_elements(); ++e)
      for (int k = 0; k < 3; ++k)
        if (mesh.triangle(e)[k] == dof)
          out.push_back({e, k});
    return out;
  };
  const TemporalWeightKind tk =
      kind == OperatorKind::DoubleLayer       ? TemporalWeightKind::DoubleLayer
      : kind == OperatorKind::HypersingularD2 ? TemporalWeightKind::HypersingularD2
                                              : TemporalWeightKind::SingleLayer;
  const PairQuadrature pq(mesh, spatial);
  PairPoints pts;
  double sum = 0.0;
  for (const auto &[el, ka] : support(test, test_dof)) {
    for (const auto &[ej, kb] : support(trial, trial_dof)) {
      if (pq.fill(el, ej, pts).type != PairType::separated)
        throw std::invalid_argument(
            "oracle_galerkin_entry: element pair is not separated");
      const Vec3 &nx = mesh.normal(el);
      const Vec3 &ny = mesh.normal(ej);
      const double nn = kind == OperatorKind::HypersingularD2 ? dot(nx, ny) : 1.0;
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const Vec3 r{pts.x[0][q] - pts.y[0][q], pts.x[1][q] - pts.y[1][q],
                     pts.x[2][q] - pts.y[2][q]};
        const double phi_a = ka < 0 ? 1.0 : pts.test_bary[ka][q];
        const double phi_b = kb < 0 ? 1.0 : pts.trial_bary[kb][q];
        const double wt =
            oracle_temporal_weight_1d(tk, r, ny, d, params, cfg).value;
        sum += pts.w[q] * nn * phi_a * phi_b * wt;
      }
    }
  }
  return sum;
}

} // namespace heatbem

#endif // HEATBEM_ORACLE_HPP
