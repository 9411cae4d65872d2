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

#ifndef HEATBEM_QUADRATURE_HPP
#define HEATBEM_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heatbem/mesh.hpp"
#include "heatbem/vec3.hpp"

namespace heatbem {

/// Rule on the reference triangle {(u, v) : u, v >= 0, u + v <= 1}.
struct TriangleRule {
  int order = 0;
  std::vector<std::array<double, 2>> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

struct QuadratureConfig {
  int regular_order = 4;
  int singular_order = 4;

  void validate() const {
    if (regular_order < 1 || regular_order > 10)
      throw std::invalid_argument("regular_order must be in [1, 10]");
    if (singular_order < 1)
      throw std::invalid_argument("singular_order must be >= 1");
  }
};

enum class PairType { separated, common_vertex, common_edge, identical };

inline const char *to_string(PairType t) {
  switch (t) {
  case PairType::separated:
    return "separated";
  case PairType::common_vertex:
    return "common_vertex";
  case PairType::common_edge:
    return "common_edge";
  case PairType::identical:
    return "identical";
  }
  return "?";
}

/// Adjacency of two triangles. test_perm[k] / trial_perm[k] give the local
/// vertex placed at position k of the reordered triangle; shared vertices
/// come first and appear in the same order in both triangles.
struct PairClass {
  PairType type = PairType::separated;
  std::array<int, 3> test_perm{0, 1, 2};
  std::array<int, 3> trial_perm{0, 1, 2};
};

/// Mapped nodes on the reference pair for one adjacency case. Weights include
/// the Duffy Jacobians and add up to 1/4, the measure of the reference pair.
struct DuffyRule {
  PairType type = PairType::identical;
  int order = 0;
  int n_subdomains = 0;
  std::vector<std::array<double, 2>> test_nodes;
  std::vector<std::array<double, 2>> trial_nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

namespace detail {

// Symmetric rules: {kind, a, b, w} with kind 0 = centroid, 1 = (a, a, 1-2a)
// orbit, 2 = (a, b, 1-a-b) orbit. Weights are per point and sum to 1 over
// the rule.
struct Orbit {
  int kind;
  double a, b, w;
};

inline void expand_orbit(const Orbit &o, TriangleRule &r) {
  auto push = [&](double u, double v) {
    r.nodes.push_back({u, v});
    r.weights.push_back(0.5 * o.w);
  };
  if (o.kind == 0) {
    push(1.0 / 3.0, 1.0 / 3.0);
  } else if (o.kind == 1) {
    const double b = 1.0 - 2.0 * o.a;
    push(o.a, o.a);
    push(o.a, b);
    push(b, o.a);
  } else {
    const double c = 1.0 - o.a - o.b;
    push(o.a, o.b);
    push(o.b, o.a);
    push(o.a, c);
    push(c, o.a);
    push(o.b, c);
    push(c, o.b);
  }
}

inline std::vector<Orbit> orbits_for_degree(int degree) {
  switch (degree) {
  case 1:
    return {{0, 0, 0, 1.0}};
  case 2:
    return {{1, 0.166666666666666666667, 0, 0.333333333333333333333}};
  case 4:
    return {{1, 0.445948490915964886318, 0, 0.223381589678011465695},
            {1, 0.0915762135097707434596, 0, 0.109951743655321867638}};
  case 5:
    return {{0, 0, 0, 0.225},
            {1, 0.47014206410511508977, 0, 0.132394152788506180738},
            {1, 0.101286507323456338801, 0, 0.125939180544827152596}};
  case 6:
    return {{1, 0.249286745170910421292, 0, 0.116786275726379366025},
            {1, 0.0630890144915022283403, 0, 0.0508449063702068169209},
            {2, 0.0531450498448169473532, 0.310352451033784405417,
             0.0828510756183735751936}};
  case 8:
    return {{0, 0, 0, 0.144315607677787168251},
            {1, 0.459292588292723156029, 0, 0.0950916342672846247939},
            {1, 0.170569307751760206622, 0, 0.103217370534718250282},
            {1, 0.0505472283170309754584, 0, 0.0324584976231980803109},
            {2, 0.00839477740995760533721, 0.263112829634638113422,
             0.0272303141744349942648}};
  case 9:
    return {{0, 0, 0, 0.0971357962827988338192},
            {1, 0.489682519198737627784, 0, 0.0313347002271390705369},
            {1, 0.43708959149293663727, 0, 0.0778275410047742793167},
            {1, 0.188203535619032730241, 0, 0.0796477389272102530329},
            {1, 0.0447295133944527098651, 0, 0.0255776756586980312617},
            {2, 0.0368384120547362836348, 0.221962989160765695675,
             0.0432835393772893772894}};
  case 10:
    return {{0, 0, 0, 0.0908179903827535800953},
            {1, 0.485577633383657377368, 0, 0.036725957756466704717},
            {1, 0.109481575485037054795, 0, 0.0453210594355279347826},
            {2, 0.141707219414879954757, 0.307939838764120950165,
             0.0727579168454201086043},
            {2, 0.025003534762686386074, 0.246672560639902693917,
             0.0283272425310574848367},
            {2, 0.00954081540029945758015, 0.0668032510122002657735,
             0.00942166696373282345993}};
  }
  return {};
}

inline TriangleRule make_triangle_rule(int order) {
  // No positive symmetric rule of exact degree 3 or 7 with few points; the
  // next higher degree is used.
  static constexpr int degree_for_order[11] = {0, 1, 2, 4, 4, 5,
                                               6, 8, 8, 9, 10};
  TriangleRule r;
  r.order = order;
  for (const auto &o : orbits_for_degree(degree_for_order[order]))
    expand_orbit(o, r);
  return r;
}

inline LineRule make_gauss01(int n) {
  LineRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1)
        p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1)
        p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = 0.5 * (1.0 - x);
    r.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1)
    r.nodes[n / 2] = 0.5;
  return r;
}

using Point4 = std::array<double, 4>; // xi, eta1, eta2, eta3
using MappedPair = std::array<double, 5>; // x1, x2, y1, y2, jacobian

inline MappedPair map_vertex(int s, const Point4 &p) {
  const double xi = p[0], e1 = p[1], e2 = p[2], e3 = p[3];
  const double j = xi * xi * xi * e2;
  const double ax = xi * (1.0 - e1), bx = xi * e1;
  const double ay = xi * e2 * (1.0 - e3), by = xi * e2 * e3;
  if (s == 0)
    return {ax, bx, ay, by, j};
  return {ay, by, ax, bx, j};
}

inline MappedPair map_edge(int s, const Point4 &p) {
  const double xi = p[0], e1 = p[1], e2 = p[2], e3 = p[3];
  const double j = xi * xi * xi * e1 * e1;
  switch (s) {
  case 0:
    return {xi * (1.0 - e1 * e3), xi * e1 * e3, xi * (1.0 - e1),
            xi * e1 * (1.0 - e2), j};
  case 1:
    return {xi * (1.0 - e1), xi * e1, xi * (1.0 - e1 * e2),
            xi * e1 * e2 * (1.0 - e3), j * e2};
  case 2:
    return {xi * (1.0 - e1), xi * e1 * (1.0 - e2), xi * (1.0 - e1 * e2 * e3),
            xi * e1 * e2 * e3, j * e2};
  case 3:
    return {xi * (1.0 - e1 * e2), xi * e1 * e2 * (1.0 - e3), xi * (1.0 - e1),
            xi * e1, j * e2};
  default:
    return {xi * (1.0 - e1), xi * e1 * (1.0 - e2 * e3), xi * (1.0 - e1 * e2),
            xi * e1 * e2, j * e2};
  }
}

inline MappedPair map_identical(int s, const Point4 &p) {
  const double xi = p[0], e1 = p[1], e2 = p[2], e3 = p[3];
  const double j = xi * xi * xi * e1 * e1 * e2;
  switch (s) {
  case 0:
    return {xi * e1 * (1.0 - e2), xi * (1.0 - e1 * (1.0 - e2)),
            xi * e1 * (1.0 - e2 * e3), xi * (1.0 - e1), j};
  case 1:
    return {xi * e1 * (1.0 - e2 * e3), xi * (1.0 - e1), xi * e1 * (1.0 - e2),
            xi * (1.0 - e1 * (1.0 - e2)), j};
  case 2:
    return {xi * (1.0 - e1 * (1.0 - e2 * (1.0 - e3))),
            xi * e1 * (1.0 - e2 * (1.0 - e3)), xi * (1.0 - e1),
            xi * e1 * (1.0 - e2), j};
  case 3:
    return {xi * (1.0 - e1), xi * e1 * (1.0 - e2),
            xi * (1.0 - e1 * (1.0 - e2 * (1.0 - e3))),
            xi * e1 * (1.0 - e2 * (1.0 - e3)), j};
  case 4:
    return {xi * (1.0 - e1), xi * e1 * (1.0 - e2 * e3),
            xi * (1.0 - e1 * (1.0 - e2)), xi * e1 * (1.0 - e2), j};
  default:
    return {xi * (1.0 - e1 * (1.0 - e2)), xi * e1 * (1.0 - e2),
            xi * (1.0 - e1), xi * e1 * (1.0 - e2 * e3), j};
  }
}

inline DuffyRule make_duffy_rule(PairType type, int order) {
  DuffyRule r;
  r.type = type;
  r.order = order;
  r.n_subdomains = type == PairType::identical     ? 6
                   : type == PairType::common_edge ? 5
                                                   : 2;
  const LineRule g = make_gauss01(order);
  const int m = order;
  for (int s = 0; s < r.n_subdomains; ++s) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) {
            const Point4 p{g.nodes[a], g.nodes[b], g.nodes[c], g.nodes[d]};
            const double w =
                g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d];
            MappedPair q;
            if (type == PairType::identical)
              q = map_identical(s, p);
            else if (type == PairType::common_edge)
              q = map_edge(s, p);
            else
              q = map_vertex(s, p);
            r.test_nodes.push_back({q[0], q[1]});
            r.trial_nodes.push_back({q[2], q[3]});
            r.weights.push_back(w * q[4]);
          }
  }
  if (type == PairType::common_edge) {
    // The edge decomposition is not invariant under swapping the two
    // triangles; average with the swapped rule so that symmetric kernels
    // give symmetric matrices.
    const std::size_t n = r.weights.size();
    for (std::size_t i = 0; i < n; ++i) {
      r.weights[i] *= 0.5;
      r.test_nodes.push_back(r.trial_nodes[i]);
      r.trial_nodes.push_back(r.test_nodes[i]);
      r.weights.push_back(r.weights[i]);
    }
  }
  return r;
}

} // namespace detail

/// Symmetric rule exact for polynomials of total degree <= order. Orders 3
/// and 7 return rules of degree 4 and 8.
inline const TriangleRule &triangle_rule(int order) {
  if (order < 1 || order > 10)
    throw std::invalid_argument("triangle_rule: unsupported order " +
                                std::to_string(order));
  static const std::array<TriangleRule, 11> rules = [] {
    std::array<TriangleRule, 11> out;
    for (int k = 1; k <= 10; ++k)
      out[k] = detail::make_triangle_rule(k);
    return out;
  }();
  return rules[order];
}

inline LineRule gauss01(int n_points) {
  if (n_points < 1)
    throw std::invalid_argument("gauss01: n_points must be >= 1");
  return detail::make_gauss01(n_points);
}

/// Cached rule; the same object is returned for repeated (type, order).
inline const DuffyRule &duffy_rule(PairType type, int singular_order) {
  if (type == PairType::separated)
    throw std::invalid_argument("duffy_rule: separated pairs use regular rules");
  if (singular_order < 1)
    throw std::invalid_argument("duffy_rule: singular_order must be >= 1");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<DuffyRule>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[{int(type), singular_order}];
  if (!slot)
    slot = std::make_unique<DuffyRule>(
        detail::make_duffy_rule(type, singular_order));
  return *slot;
}

inline PairClass classify_pair(const SurfaceMesh &mesh, int i_test,
                               int i_trial) {
  PairClass pc;
  const Triangle &t = mesh.triangle(i_test);
  const Triangle &s = mesh.triangle(i_trial);
  if (i_test == i_trial) {
    pc.type = PairType::identical;
    return pc;
  }
  int in_trial[3]; // position in s of t[k], or -1
  int shared = 0;
  for (int k = 0; k < 3; ++k) {
    in_trial[k] = -1;
    for (int l = 0; l < 3; ++l)
      if (t[k] == s[l])
        in_trial[k] = l;
    shared += in_trial[k] >= 0;
  }
  if (shared == 0)
    return pc;
  if (shared == 3) {
    // Distinct elements with the same vertex set; treat like identical
    // with the trial reordered to match.
    pc.type = PairType::identical;
    for (int k = 0; k < 3; ++k)
      pc.trial_perm[k] = in_trial[k];
    return pc;
  }
  if (shared == 1) {
    pc.type = PairType::common_vertex;
    int k = 0;
    while (in_trial[k] < 0)
      ++k;
    const int l = in_trial[k];
    pc.test_perm = {k, (k + 1) % 3, (k + 2) % 3};
    pc.trial_perm = {l, (l + 1) % 3, (l + 2) % 3};
    return pc;
  }
  pc.type = PairType::common_edge;
  // Shared edge ordered by global vertex index so that (i, j) and (j, i)
  // produce mirrored node sets.
  int a = -1, b = -1, other = -1;
  for (int k = 0; k < 3; ++k) {
    if (in_trial[k] < 0)
      other = k;
    else if (a < 0)
      a = k;
    else
      b = k;
  }
  if (t[a] > t[b])
    std::swap(a, b);
  pc.test_perm = {a, b, other};
  const int la = in_trial[a], lb = in_trial[b];
  pc.trial_perm = {la, lb, 3 - la - lb};
  return pc;
}

/// Quadrature nodes for one element pair in structure-of-arrays layout.
/// Weights include the factor 4 |test| |trial|; barycentric coordinates
/// refer to the original local vertex order of each triangle.
struct PairPoints {
  std::array<std::vector<double>, 3> x, y;
  std::array<std::vector<double>, 3> test_bary, trial_bary;
  std::vector<double> w;

  std::size_t size() const { return w.size(); }

  void resize(std::size_t n) {
    for (int k = 0; k < 3; ++k) {
      x[k].resize(n);
      y[k].resize(n);
      test_bary[k].resize(n);
      trial_bary[k].resize(n);
    }
    w.resize(n);
  }
};

/// Physical nodes of a triangle rule on every element.
struct ElementPoints {
  int order = 0;
  int n_per_element = 0;
  std::array<std::vector<double>, 3> x;    // [element * n + q]
  std::array<std::vector<double>, 3> bary; // [element * n + q]
  std::vector<double> w;                   // reference weights, sum 1/2

  ElementPoints() = default;
  ElementPoints(const SurfaceMesh &mesh, int order_) : order(order_) {
    const TriangleRule &rule = triangle_rule(order);
    n_per_element = int(rule.size());
    const std::size_t total = std::size_t(mesh.n_elements()) * n_per_element;
    for (int k = 0; k < 3; ++k) {
      x[k].resize(total);
      bary[k].resize(total);
    }
    w = rule.weights;
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto c = mesh.corners(e);
      for (int q = 0; q < n_per_element; ++q) {
        const double u = rule.nodes[q][0], v = rule.nodes[q][1];
        const std::size_t i = std::size_t(e) * n_per_element + q;
        for (int k = 0; k < 3; ++k)
          x[k][i] = c[0][k] + u * (c[1][k] - c[0][k]) + v * (c[2][k] - c[0][k]);
        bary[0][i] = 1.0 - u - v;
        bary[1][i] = u;
        bary[2][i] = v;
      }
    }
  }
};

/// Chooses and fills the rule for element pairs of one mesh: regular product
/// rules for separated pairs (two orders higher when the pair is close) and
/// Duffy rules for touching pairs.
class PairQuadrature {
public:
  PairQuadrature(const SurfaceMesh &mesh, const QuadratureConfig &config)
      : mesh_(&mesh), config_(config) {
    config_.validate();
    const int near_order = std::min(10, config_.regular_order + 2);
    far_ = ElementPoints(mesh, config_.regular_order);
    near_ = ElementPoints(mesh, near_order);
    centroids_.resize(mesh.n_elements());
    diameters_.resize(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
      centroids_[e] = mesh.centroid(e);
      diameters_[e] = mesh.element_diameter(e);
    }
    for (PairType t : {PairType::common_vertex, PairType::common_edge,
                       PairType::identical})
      duffy_[int(t)] = &duffy_rule(t, config_.singular_order);
  }

  const SurfaceMesh &mesh() const { return *mesh_; }
  const QuadratureConfig &config() const { return config_; }

  bool is_near(int i_test, int i_trial) const {
    const double d = norm(centroids_[i_test] - centroids_[i_trial]);
    return d < 2.0 * std::max(diameters_[i_test], diameters_[i_trial]);
  }

  /// Fills out with the rule for (i_test, i_trial); returns the pair class.
  PairClass fill(int i_test, int i_trial, PairPoints &out) const {
    const PairClass pc = classify_pair(*mesh_, i_test, i_trial);
    const double scale =
        4.0 * mesh_->area(i_test) * mesh_->area(i_trial);
    if (pc.type == PairType::separated) {
      const ElementPoints &ep = is_near(i_test, i_trial) ? near_ : far_;
      const int n = ep.n_per_element;
      out.resize(std::size_t(n) * n);
      const std::size_t bt = std::size_t(i_test) * n;
      const std::size_t bs = std::size_t(i_trial) * n;
      std::size_t i = 0;
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q, ++i) {
          for (int k = 0; k < 3; ++k) {
            out.x[k][i] = ep.x[k][bt + p];
            out.y[k][i] = ep.x[k][bs + q];
            out.test_bary[k][i] = ep.bary[k][bt + p];
            out.trial_bary[k][i] = ep.bary[k][bs + q];
          }
          out.w[i] = scale * ep.w[p] * ep.w[q];
        }
      }
      return pc;
    }
    const DuffyRule &rule = *duffy_[int(pc.type)];
    const auto tc = mesh_->corners(i_test);
    const auto sc = mesh_->corners(i_trial);
    const Vec3 &t0 = tc[pc.test_perm[0]];
    const Vec3 t1 = tc[pc.test_perm[1]] - t0;
    const Vec3 t2 = tc[pc.test_perm[2]] - t0;
    const Vec3 &s0 = sc[pc.trial_perm[0]];
    const Vec3 s1 = sc[pc.trial_perm[1]] - s0;
    const Vec3 s2 = sc[pc.trial_perm[2]] - s0;
    const std::size_t n = rule.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rule.test_nodes[i][0], v = rule.test_nodes[i][1];
      const double a = rule.trial_nodes[i][0], b = rule.trial_nodes[i][1];
      for (int k = 0; k < 3; ++k) {
        out.x[k][i] = t0[k] + u * t1[k] + v * t2[k];
        out.y[k][i] = s0[k] + a * s1[k] + b * s2[k];
      }
      out.test_bary[pc.test_perm[0]][i] = 1.0 - u - v;
      out.test_bary[pc.test_perm[1]][i] = u;
      out.test_bary[pc.test_perm[2]][i] = v;
      out.trial_bary[pc.trial_perm[0]][i] = 1.0 - a - b;
      out.trial_bary[pc.trial_perm[1]][i] = a;
      out.trial_bary[pc.trial_perm[2]][i] = b;
      out.w[i] = scale * rule.weights[i];
    }
    return pc;
  }

private:
  const SurfaceMesh *mesh_;
  QuadratureConfig config_;
  ElementPoints far_, near_;
  std::vector<Vec3> centroids_;
  std::vector<double> diameters_;
  const DuffyRule *duffy_[4] = {nullptr, nullptr, nullptr, nullptr};
};

/// Integral of kernel(x, y, n_x, n_y) over test x trial element.
template <class Kernel>
double integrate_pair(const Kernel &kernel, const SurfaceMesh &mesh,
                      int i_test, int i_trial, const QuadratureConfig &config) {
  const PairQuadrature pq(mesh, config);
  return integrate_pair(kernel, pq, i_test, i_trial);
}

template <class Kernel>
double integrate_pair(const Kernel &kernel, const PairQuadrature &pq,
                      int i_test, int i_trial) {
  PairPoints pts;
  pq.fill(i_test, i_trial, pts);
  const Vec3 &nx = pq.mesh().normal(i_test);
  const Vec3 &ny = pq.mesh().normal(i_trial);
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 x{pts.x[0][i], pts.x[1][i], pts.x[2][i]};
    const Vec3 y{pts.y[0][i], pts.y[1][i], pts.y[2][i]};
    sum += pts.w[i] * kernel(x, y, nx, ny);
  }
  return sum;
}

} // namespace heatbem

#endif // HEATBEM_QUADRATURE_HPP
