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

#ifndef HEATBEM_MESH_HPP
#define HEATBEM_MESH_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heatbem/errors.hpp"
#include "heatbem/vec3.hpp"

namespace heatbem {

using Triangle = std::array<int, 3>;

/// Closed surface made of planar triangles. Vertices of each triangle are
/// ordered counter-clockwise when viewed from outside, so the normal
/// (v1 - v0) x (v2 - v0) points out of the enclosed body.
///
/// Immutable after construction.
class SurfaceMesh {
public:
  SurfaceMesh() = default;

  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    compute_geometry(nullptr);
  }

  /// Same as above but takes per-triangle normals instead of recomputing
  /// them (used by refinement so children carry the parent normal).
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
              std::vector<Vec3> normals)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    compute_geometry(&normals);
  }

  int n_nodes() const { return static_cast<int>(vertices_.size()); }
  int n_elements() const { return static_cast<int>(triangles_.size()); }

  const std::vector<Vec3> &vertices() const { return vertices_; }
  const std::vector<Triangle> &triangles() const { return triangles_; }
  const std::vector<double> &areas() const { return areas_; }
  const std::vector<Vec3> &normals() const { return normals_; }

  const Vec3 &vertex(int i) const { return vertices_[i]; }
  const Triangle &triangle(int i) const { return triangles_[i]; }
  double area(int i) const { return areas_[i]; }
  const Vec3 &normal(int i) const { return normals_[i]; }

  std::array<Vec3, 3> corners(int i) const {
    const auto &t = triangles_[i];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }

  Vec3 centroid(int i) const {
    const auto c = corners(i);
    return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
  }

  /// Longest edge of triangle i.
  double element_diameter(int i) const {
    const auto c = corners(i);
    return std::max({norm(c[1] - c[0]), norm(c[2] - c[1]), norm(c[0] - c[2])});
  }

  double max_element_diameter() const { return max_element_diameter_; }

  /// Diagonal of the axis-aligned bounding box.
  double diameter() const { return diameter_; }

  double total_area() const {
    double s = 0.0;
    for (double a : areas_)
      s += a;
    return s;
  }

  /// True when every undirected edge is shared by exactly two triangles that
  /// traverse it in opposite directions.
  bool is_closed_manifold() const {
    std::map<std::pair<int, int>, int> directed;
    for (const auto &t : triangles_) {
      for (int k = 0; k < 3; ++k) {
        const auto key = std::make_pair(t[k], t[(k + 1) % 3]);
        if (++directed[key] > 1)
          return false;
      }
    }
    for (const auto &[edge, count] : directed) {
      if (!directed.count({edge.second, edge.first}))
        return false;
    }
    return true;
  }

private:
  void compute_geometry(const std::vector<Vec3> *given_normals) {
    const int nv = n_nodes();
    if (given_normals && given_normals->size() != triangles_.size())
      throw std::invalid_argument("normal count does not match triangles");
    areas_.resize(triangles_.size());
    normals_.resize(triangles_.size());
    max_element_diameter_ = 0.0;
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      const auto &t = triangles_[i];
      for (int k = 0; k < 3; ++k) {
        if (t[k] < 0 || t[k] >= nv)
          throw std::invalid_argument("triangle " + std::to_string(i) +
                                      ": vertex index out of range");
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
        throw std::invalid_argument("triangle " + std::to_string(i) +
                                    ": repeated vertex");
      const Vec3 c = cross(vertices_[t[1]] - vertices_[t[0]],
                           vertices_[t[2]] - vertices_[t[0]]);
      const double twice_area = norm(c);
      if (!(twice_area > 0.0))
        throw std::invalid_argument("triangle " + std::to_string(i) +
                                    ": zero area");
      areas_[i] = 0.5 * twice_area;
      normals_[i] =
          given_normals ? (*given_normals)[i] : (1.0 / twice_area) * c;
      max_element_diameter_ =
          std::max(max_element_diameter_, element_diameter(int(i)));
    }
    if (!vertices_.empty()) {
      Vec3 lo = vertices_[0], hi = vertices_[0];
      for (const auto &v : vertices_) {
        for (int k = 0; k < 3; ++k) {
          lo[k] = std::min(lo[k], v[k]);
          hi[k] = std::max(hi[k], v[k]);
        }
      }
      diameter_ = norm(hi - lo);
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<double> areas_;
  std::vector<Vec3> normals_;
  double max_element_diameter_ = 0.0;
  double diameter_ = 0.0;
};

/// Uniform partition of (0, end_time) into n_steps intervals.
class TimeGrid {
public:
  TimeGrid(double end_time, int n_steps) : end_time_(end_time), n_steps_(n_steps) {
    if (!(end_time > 0.0) || n_steps < 1)
      throw std::invalid_argument("TimeGrid needs end_time > 0, n_steps >= 1");
    step_ = end_time_ / n_steps_;
  }

  double end_time() const { return end_time_; }
  int n_steps() const { return n_steps_; }
  double step() const { return step_; }
  double node(int i) const { return i * step_; }

  /// Same end time, twice the steps.
  TimeGrid bisected() const { return TimeGrid(end_time_, 2 * n_steps_); }

private:
  double end_time_;
  int n_steps_;
  double step_;
};

/// Surface of the cube [-half_width, half_width]^3 with each face split into
/// n x n squares and every square into two triangles: 12 n^2 triangles,
/// 6 n^2 + 2 vertices.
inline SurfaceMesh generate_cube_surface(int subdivisions_per_edge,
                                         double half_width = 1.0) {
  const int n = subdivisions_per_edge;
  if (n < 1)
    throw std::invalid_argument("subdivisions_per_edge must be >= 1");
  if (!(half_width > 0.0))
    throw std::invalid_argument("half_width must be positive");

  std::map<std::array<int, 3>, int> index_of;
  std::vector<Vec3> vertices;
  auto vertex = [&](std::array<int, 3> lattice) {
    auto [it, inserted] = index_of.emplace(lattice, int(vertices.size()));
    if (inserted) {
      Vec3 p;
      for (int k = 0; k < 3; ++k)
        p[k] = -half_width + 2.0 * half_width * lattice[k] / n;
      vertices.push_back(p);
    }
    return it->second;
  };

  // (fixed axis, fixed lattice value, in-face axis a, in-face axis b) with
  // e_a x e_b pointing outwards.
  struct Face {
    int axis, level, a, b;
  };
  const Face faces[6] = {{0, n, 1, 2}, {0, 0, 2, 1}, {1, n, 2, 0},
                         {1, 0, 0, 2}, {2, n, 0, 1}, {2, 0, 1, 0}};

  std::vector<Triangle> triangles;
  triangles.reserve(12 * n * n);
  for (const auto &f : faces) {
    auto at = [&](int i, int j) {
      std::array<int, 3> l{};
      l[f.axis] = f.level;
      l[f.a] = i;
      l[f.b] = j;
      return vertex(l);
    };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int p00 = at(i, j), p10 = at(i + 1, j);
        const int p11 = at(i + 1, j + 1), p01 = at(i, j + 1);
        triangles.push_back({p00, p10, p11});
        triangles.push_back({p00, p11, p01});
      }
    }
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

/// Uniform quadrisection through edge midpoints. Existing vertices keep their
/// indices; midpoints are appended in order of first appearance.
inline SurfaceMesh refine(const SurfaceMesh &mesh) {
  if (!mesh.is_closed_manifold())
    throw NonManifoldMesh("refine: mesh is not a closed edge-manifold");

  std::vector<Vec3> vertices = mesh.vertices();
  std::map<std::pair<int, int>, int> midpoint_of;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = midpoint_of.emplace(key, int(vertices.size()));
    if (inserted)
      vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    return it->second;
  };

  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;
  triangles.reserve(4 * mesh.n_elements());
  normals.reserve(4 * mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto [v0, v1, v2] = mesh.triangle(e);
    const int m01 = midpoint(v0, v1);
    const int m12 = midpoint(v1, v2);
    const int m20 = midpoint(v2, v0);
    triangles.push_back({v0, m01, m20});
    triangles.push_back({m01, v1, m12});
    triangles.push_back({m20, m12, v2});
    triangles.push_back({m01, m12, m20});
    for (int k = 0; k < 4; ++k)
      normals.push_back(mesh.normal(e));
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles),
                     std::move(normals));
}

inline SurfaceMesh refine(const SurfaceMesh &mesh, int levels) {
  SurfaceMesh out = mesh;
  for (int l = 0; l < levels; ++l)
    out = refine(out);
  return out;
}

// ---------------------------------------------------------------------------
// Text format
//
//   heatbem-mesh 1
//   vertices <N>
//   <x> <y> <z>          (N lines)
//   triangles <E>
//   <i> <j> <k>          (E lines, 0-based)
//
// Lines starting with '#' are comments.
// ---------------------------------------------------------------------------

struct LoadedMesh {
  SurfaceMesh mesh;
  /// Set when the surface is not a closed edge-manifold. The mesh is still
  /// returned; refinement and assembly will reject it.
  bool non_manifold = false;
};

namespace detail {

class LineReader {
public:
  explicit LineReader(std::istream &in) : in_(in) {}

  /// Next non-comment line split into whitespace tokens.
  std::vector<std::string_view> next(const char *expected) {
    while (std::getline(in_, line_)) {
      ++number_;
      if (!line_.empty() && line_.back() == '\r')
        line_.pop_back();
      const auto first = line_.find_first_not_of(" \t");
      if (first == std::string::npos || line_[first] == '#')
        continue;
      return split(line_);
    }
    throw ParseError(std::string("unexpected end of file, expected ") +
                         expected,
                     number_ + 1);
  }

  std::size_t line() const { return number_; }

private:
  static std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
        ++i;
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t')
        ++j;
      if (j > i)
        out.push_back(s.substr(i, j - i));
      i = j;
    }
    return out;
  }

  std::istream &in_;
  std::string line_;
  std::size_t number_ = 0;
};

template <class T>
T parse_number(std::string_view token, std::size_t line) {
  T value{};
  const auto *end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("malformed number '" + std::string(token) + "'", line);
  return value;
}

inline long header_count(LineReader &reader, std::string_view keyword) {
  const auto tokens = reader.next(std::string(keyword).c_str());
  if (tokens.size() != 2 || tokens[0] != keyword)
    throw ParseError("expected '" + std::string(keyword) + " <count>'",
                     reader.line());
  const long count = parse_number<long>(tokens[1], reader.line());
  if (count <= 0)
    throw ParseError("empty " + std::string(keyword) + " section",
                     reader.line());
  return count;
}

inline void write_double(std::ostream &out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

} // namespace detail

inline LoadedMesh read_mesh(std::istream &in) {
  detail::LineReader reader(in);
  {
    const auto tokens = reader.next("header");
    if (tokens.size() != 2 || tokens[0] != "heatbem-mesh" || tokens[1] != "1")
      throw ParseError("expected header 'heatbem-mesh 1'", reader.line());
  }
  const long nv = detail::header_count(reader, "vertices");
  std::vector<Vec3> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    const auto tokens = reader.next("vertex");
    if (tokens.size() != 3)
      throw ParseError("vertex line needs three coordinates", reader.line());
    for (int k = 0; k < 3; ++k)
      vertices[i][k] = detail::parse_number<double>(tokens[k], reader.line());
  }
  const long nt = detail::header_count(reader, "triangles");
  std::vector<Triangle> triangles(nt);
  for (long i = 0; i < nt; ++i) {
    const auto tokens = reader.next("triangle");
    if (tokens.size() != 3)
      throw ParseError("triangle line needs three indices", reader.line());
    for (int k = 0; k < 3; ++k) {
      const long idx = detail::parse_number<long>(tokens[k], reader.line());
      if (idx < 0 || idx >= nv)
        throw ParseError("index out of range: " + std::to_string(idx),
                         reader.line());
      triangles[i][k] = int(idx);
    }
  }
  LoadedMesh out;
  try {
    out.mesh = SurfaceMesh(std::move(vertices), std::move(triangles));
  } catch (const std::invalid_argument &e) {
    throw ParseError(e.what(), 0);
  }
  out.non_manifold = !out.mesh.is_closed_manifold();
  return out;
}

inline void write_mesh(std::ostream &out, const SurfaceMesh &mesh) {
  out << "heatbem-mesh 1\n";
  out << "vertices " << mesh.n_nodes() << '\n';
  for (const auto &v : mesh.vertices()) {
    detail::write_double(out, v[0]);
    out << ' ';
    detail::write_double(out, v[1]);
    out << ' ';
    detail::write_double(out, v[2]);
    out << '\n';
  }
  out << "triangles " << mesh.n_elements() << '\n';
  for (const auto &t : mesh.triangles())
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline LoadedMesh load_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open mesh file '" + path + "'", 0);
  return read_mesh(in);
}

inline void save_mesh(const SurfaceMesh &mesh, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write mesh file '" + path + "'");
  write_mesh(out, mesh);
}

} // namespace heatbem

#endif // HEATBEM_MESH_HPP
