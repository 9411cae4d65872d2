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

#ifndef HEATBEM_KERNELS_HPP
#define HEATBEM_KERNELS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heatbem/errors.hpp"
#include "heatbem/vec3.hpp"

// Heat kernel G(r, t) = (4 pi alpha t)^{-3/2} exp(-|r|^2 / (4 alpha t)) and
// its closed-form antiderivatives in the time variables.
//
// Limit branches are taken below fixed thresholds: delta < 1e-14 h_t is
// treated as delta = 0 and rho < 1e-12 * length_scale as rho = 0. std::erf
// is expected to be accurate to about 1e-14 relative (true for glibc and
// the usual C++ runtimes).

namespace heatbem {

struct KernelParams {
  double alpha = 1.0;
  double h_t = 1.0;
  /// Reference length (typically the mesh diameter) for the rho -> 0 switch.
  double length_scale = 1.0;

  KernelParams() = default;
  KernelParams(double alpha_, double h_t_, double length_scale_ = 1.0)
      : alpha(alpha_), h_t(h_t_), length_scale(length_scale_) {
    if (!(alpha > 0.0) || !(h_t > 0.0) || !(length_scale > 0.0))
      throw std::invalid_argument("KernelParams: alpha, h_t must be positive");
  }

  double delta_eps() const { return 1e-14 * h_t; }
  double rho_eps() const { return 1e-12 * length_scale; }
};

enum class TemporalWeightKind { SingleLayer, DoubleLayer, HypersingularD2 };

namespace detail {

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt_pi = 1.7724538509055160272981674833411;
inline constexpr double inv_four_pi = 1.0 / (4.0 * pi);

// (1/2 - 1/(4x^2)) erf(x) + exp(-x^2) / (2 x sqrt(pi)) for x < 0.05, where the
// direct form loses about 1/x^2 digits.
inline double dn_tau_t_series(double x) {
  const double x2 = x * x;
  const double p =
      4.0 / 3.0 +
      x2 * (-4.0 / 15.0 +
            x2 * (2.0 / 35.0 +
                  x2 * (-2.0 / 189.0 +
                        x2 * (1.0 / 594.0 +
                              x2 * (-1.0 / 4290.0 + x2 * (1.0 / 35100.0))))));
  return x * p / (2.0 * sqrt_pi);
}

// (erf(x) - 2x exp(-x^2) / sqrt(pi)) * sqrt(pi) / (2x) for x < 0.05.
inline double dn_tau_series(double x) {
  const double x2 = x * x;
  return x2 * (2.0 / 3.0 +
               x2 * (-2.0 / 5.0 +
                     x2 * (1.0 / 7.0 +
                           x2 * (-1.0 / 27.0 +
                                 x2 * (1.0 / 132.0 + x2 * (-1.0 / 780.0))))));
}

inline constexpr double series_switch = 0.05;

} // namespace detail

/// G_alpha(r, dt); zero for dt <= 0.
inline double fundamental(const Vec3 &r, double dt, double alpha) {
  if (dt <= 0.0)
    return 0.0;
  const double s = 4.0 * alpha * dt;
  return std::exp(-dot(r, r) / s) / std::pow(detail::pi * s, 1.5);
}

/// alpha dG/dn_x (r, dt) with r = x - y.
inline double grad_fundamental_normal(const Vec3 &r, const Vec3 &n_x, double dt,
                                      double alpha) {
  if (dt <= 0.0)
    return 0.0;
  const double c = 16.0 * std::pow(detail::pi * alpha, 1.5) * std::pow(dt, 2.5);
  return -dot(r, n_x) * std::exp(-dot(r, r) / (4.0 * alpha * dt)) / c;
}

/// alpha dG/dn_y (r, dt) with r = x - y.
inline double grad_fundamental_normal_y(const Vec3 &r, const Vec3 &n_y,
                                        double dt, double alpha) {
  return -grad_fundamental_normal(r, n_y, dt, alpha);
}

/// G^dtau(rho, delta): antiderivative of G(r, t - tau) in tau, evaluated at
/// tau = t - delta.
inline double antideriv_tau(double rho, double delta, const KernelParams &p) {
  const double a = p.alpha;
  const bool rho0 = rho < p.rho_eps();
  const bool delta0 = delta < p.delta_eps();
  if (rho0 && delta0)
    throw SingularEvaluation("G^dtau evaluated at rho = 0, delta = 0");
  if (delta0)
    return detail::inv_four_pi / (a * rho);
  if (rho0)
    return 1.0 / (4.0 * std::sqrt(detail::pi * detail::pi * detail::pi * a * a *
                                  a * delta));
  return std::erf(rho / (2.0 * std::sqrt(a * delta))) *
         detail::inv_four_pi / (a * rho);
}

/// G^dt = -G^dtau.
inline double antideriv_t(double rho, double delta, const KernelParams &p) {
  return -antideriv_tau(rho, delta, p);
}

/// G^dtau dt(rho, delta): second antiderivative; d/ddelta of it is G^dtau.
inline double antideriv_tau_t(double rho, double delta, const KernelParams &p) {
  const double a = p.alpha;
  const bool rho0 = rho < p.rho_eps();
  const bool delta0 = delta < p.delta_eps();
  if (delta0)
    return rho0 ? 0.0 : rho / (8.0 * detail::pi * a * a);
  if (rho0)
    return std::sqrt(delta) /
           (2.0 * std::sqrt(detail::pi * detail::pi * detail::pi * a * a * a));
  const double sad = std::sqrt(a * delta);
  const double x = rho / (2.0 * sad);
  return detail::inv_four_pi *
         ((rho / (2.0 * a * a) + delta / (a * rho)) * std::erf(x) +
          std::sqrt(delta) / (detail::sqrt_pi * a * std::sqrt(a)) *
              std::exp(-x * x));
}

/// alpha dG^dtau dt / dn_y given rho = |r| and r.n_y.
inline double normal_deriv_antideriv_tau_t(double rho, double rdotn,
                                           double delta, const KernelParams &p) {
  const double a = p.alpha;
  const bool rho0 = rho < p.rho_eps();
  const bool delta0 = delta < p.delta_eps();
  if (rho0 && delta0)
    throw SingularEvaluation("dG^dtau dt/dn evaluated at rho = 0, delta = 0");
  if (delta0)
    return -rdotn / (8.0 * detail::pi * a * rho);
  if (rho0)
    return 0.0;
  const double x = rho / (2.0 * std::sqrt(a * delta));
  double bracket;
  if (x < detail::series_switch) {
    bracket = detail::dn_tau_t_series(x) / a;
  } else {
    bracket = (0.5 / a - delta / (rho * rho)) * std::erf(x) +
              std::sqrt(delta) / (rho * std::sqrt(detail::pi * a)) *
                  std::exp(-x * x);
  }
  return -detail::inv_four_pi * (rdotn / rho) * bracket;
}

inline double normal_deriv_antideriv_tau_t(const Vec3 &r, const Vec3 &n_y,
                                           double delta, const KernelParams &p) {
  return normal_deriv_antideriv_tau_t(norm(r), dot(r, n_y), delta, p);
}

/// alpha dG^dtau / dn_y given rho = |r| and r.n_y.
inline double normal_deriv_antideriv_tau(double rho, double rdotn, double delta,
                                         const KernelParams &p) {
  const double a = p.alpha;
  if (rho < p.rho_eps())
    throw SingularEvaluation("dG^dtau/dn evaluated at rho = 0");
  if (delta < p.delta_eps())
    return detail::inv_four_pi * rdotn / (rho * rho * rho);
  const double x = rho / (2.0 * std::sqrt(a * delta));
  double bracket;
  if (x < detail::series_switch) {
    bracket = detail::dn_tau_series(x) / std::sqrt(detail::pi * a * delta);
  } else {
    bracket = std::erf(x) / rho -
              std::exp(-x * x) / std::sqrt(detail::pi * a * delta);
  }
  return detail::inv_four_pi * rdotn / (rho * rho) * bracket;
}

inline double normal_deriv_antideriv_tau(const Vec3 &r, const Vec3 &n_y,
                                         double delta, const KernelParams &p) {
  return normal_deriv_antideriv_tau(norm(r), dot(r, n_y), delta, p);
}

/// Batch forms used by assembly: one delta, many distances. Constants that
/// depend only on delta are hoisted; limits match the scalar functions.
inline void antideriv_tau_t_batch(const double *rho, std::size_t n,
                                  double delta, const KernelParams &p,
                                  double *out) {
  if (delta < p.delta_eps()) {
    for (std::size_t q = 0; q < n; ++q)
      out[q] = antideriv_tau_t(rho[q], delta, p);
    return;
  }
  const double a = p.alpha;
  const double c_x = 1.0 / (2.0 * std::sqrt(a * delta));
  const double c_rho = detail::inv_four_pi / (2.0 * a * a);
  const double c_inv = detail::inv_four_pi * delta / a;
  const double c_exp =
      detail::inv_four_pi * std::sqrt(delta) / (detail::sqrt_pi * a * std::sqrt(a));
  const double rho_eps = p.rho_eps();
  for (std::size_t q = 0; q < n; ++q) {
    const double r = rho[q];
    if (r < rho_eps) {
      out[q] = antideriv_tau_t(r, delta, p);
      continue;
    }
    const double x = r * c_x;
    out[q] = (c_rho * r + c_inv / r) * std::erf(x) + c_exp * std::exp(-x * x);
  }
}

inline void antideriv_tau_batch(const double *rho, std::size_t n, double delta,
                                const KernelParams &p, double *out) {
  if (delta < p.delta_eps()) {
    for (std::size_t q = 0; q < n; ++q)
      out[q] = antideriv_tau(rho[q], delta, p);
    return;
  }
  const double c_x = 1.0 / (2.0 * std::sqrt(p.alpha * delta));
  const double c = detail::inv_four_pi / p.alpha;
  const double rho_eps = p.rho_eps();
  for (std::size_t q = 0; q < n; ++q) {
    const double r = rho[q];
    out[q] = r < rho_eps ? antideriv_tau(r, delta, p) : c * std::erf(r * c_x) / r;
  }
}

inline void normal_deriv_antideriv_tau_t_batch(const double *rho,
                                               const double *rdotn,
                                               std::size_t n, double delta,
                                               const KernelParams &p,
                                               double *out) {
  if (delta < p.delta_eps()) {
    for (std::size_t q = 0; q < n; ++q)
      out[q] = normal_deriv_antideriv_tau_t(rho[q], rdotn[q], delta, p);
    return;
  }
  const double a = p.alpha;
  const double c_x = 1.0 / (2.0 * std::sqrt(a * delta));
  const double c_exp = std::sqrt(delta) / std::sqrt(detail::pi * a);
  const double rho_eps = p.rho_eps();
  for (std::size_t q = 0; q < n; ++q) {
    const double r = rho[q];
    const double x = r * c_x;
    if (r < rho_eps || x < detail::series_switch) {
      out[q] = normal_deriv_antideriv_tau_t(r, rdotn[q], delta, p);
      continue;
    }
    const double bracket = (0.5 / a - delta / (r * r)) * std::erf(x) +
                           c_exp / r * std::exp(-x * x);
    out[q] = -detail::inv_four_pi * (rdotn[q] / r) * bracket;
  }
}

/// Contribution of the time-gap index i_t = delta / h_t to the temporal
/// weights. Blocks follow A^d = 2 F(d) - F(d+1) - F(d-1) for d >= 1 and
/// A^0 = extra + F(0) - F(1), where F is the kernel-specific antiderivative
/// evaluated at delta = i_t h_t.
///
/// For SingleLayer F = G^dtau dt and extra = h_t G^dtau(., 0); for
/// DoubleLayer F = alpha dG^dtau dt/dn_y and extra = h_t alpha dG^dtau/dn_y
/// (., 0); for HypersingularD2 F = alpha G^dtau (= -alpha G^dt) and no extra.
inline double temporal_antiderivative(TemporalWeightKind kind, double rho,
                                      double rdotn, int i_t,
                                      const KernelParams &p) {
  const double delta = i_t * p.h_t;
  switch (kind) {
  case TemporalWeightKind::SingleLayer:
    return antideriv_tau_t(rho, delta, p);
  case TemporalWeightKind::DoubleLayer:
    return normal_deriv_antideriv_tau_t(rho, rdotn, delta, p);
  case TemporalWeightKind::HypersingularD2:
    return -p.alpha * antideriv_t(rho, delta, p);
  }
  return 0.0;
}

inline double temporal_extra(TemporalWeightKind kind, double rho, double rdotn,
                             const KernelParams &p) {
  switch (kind) {
  case TemporalWeightKind::SingleLayer:
    return p.h_t * antideriv_tau(rho, 0.0, p);
  case TemporalWeightKind::DoubleLayer:
    return p.h_t * normal_deriv_antideriv_tau(rho, rdotn, 0.0, p);
  case TemporalWeightKind::HypersingularD2:
    return 0.0;
  }
  return 0.0;
}

/// V^d, K^d or D^{2,d} at displacement r (n_y used by DoubleLayer only).
inline double temporal_weight(TemporalWeightKind kind, const Vec3 &r,
                              const Vec3 &n_y, int d, const KernelParams &p) {
  if (d < 0)
    throw std::invalid_argument("temporal_weight: negative block index");
  const double rho = norm(r);
  const double rdotn = dot(r, n_y);
  auto F = [&](int i_t) {
    return temporal_antiderivative(kind, rho, rdotn, i_t, p);
  };
  if (d == 0)
    return temporal_extra(kind, rho, rdotn, p) + F(0) - F(1);
  return 2.0 * F(d) - F(d + 1) - F(d - 1);
}

} // namespace heatbem

#endif // HEATBEM_KERNELS_HPP
