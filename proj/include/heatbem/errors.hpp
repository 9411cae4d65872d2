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

#ifndef HEATBEM_ERRORS_HPP
#define HEATBEM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heatbem {

/// A kernel was asked for a value at a point where it has no finite limit
/// (zero distance together with zero time gap).
class SingularEvaluation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed mesh or matrix file. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Mesh that is not a closed edge-manifold surface.
class NonManifoldMesh : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Factorisation of a diagonal block failed or produced a useless solve.
class SingularBlock : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace heatbem

#endif // HEATBEM_ERRORS_HPP
