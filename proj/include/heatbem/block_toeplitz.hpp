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

#ifndef HEATBEM_BLOCK_TOEPLITZ_HPP
#define HEATBEM_BLOCK_TOEPLITZ_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace heatbem {

using DenseBlock =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Space-time coefficients, time-major: entry (step i, dof j) is stored at
/// i * n_dofs + j.
class SpaceTimeVector {
public:
  SpaceTimeVector() = default;
  SpaceTimeVector(int n_steps, int n_dofs)
      : n_steps_(n_steps), n_dofs_(n_dofs),
        values_(Eigen::VectorXd::Zero(Eigen::Index(n_steps) * n_dofs)) {}
  SpaceTimeVector(int n_steps, int n_dofs, Eigen::VectorXd values)
      : n_steps_(n_steps), n_dofs_(n_dofs), values_(std::move(values)) {
    if (values_.size() != Eigen::Index(n_steps) * n_dofs)
      throw std::invalid_argument("SpaceTimeVector: length mismatch");
  }

  int n_steps() const { return n_steps_; }
  int n_dofs() const { return n_dofs_; }
  Eigen::Index size() const { return values_.size(); }

  double &operator()(int step, int dof) {
    return values_[Eigen::Index(step) * n_dofs_ + dof];
  }
  double operator()(int step, int dof) const {
    return values_[Eigen::Index(step) * n_dofs_ + dof];
  }

  Eigen::VectorXd &values() { return values_; }
  const Eigen::VectorXd &values() const { return values_; }

  auto step(int i) { return values_.segment(Eigen::Index(i) * n_dofs_, n_dofs_); }
  auto step(int i) const {
    return values_.segment(Eigen::Index(i) * n_dofs_, n_dofs_);
  }

  /// n_dofs x n_steps column-major view; column i is time step i.
  Eigen::Map<Eigen::MatrixXd> as_matrix() {
    return {values_.data(), n_dofs_, n_steps_};
  }
  Eigen::Map<const Eigen::MatrixXd> as_matrix() const {
    return {values_.data(), n_dofs_, n_steps_};
  }

private:
  int n_steps_ = 0;
  int n_dofs_ = 0;
  Eigen::VectorXd values_;
};

/// Lower block-triangular Toeplitz operator: block (k, i) is A^{k-i} for
/// k >= i and zero otherwise. Only A^0 ... A^{n_blocks-1} are stored. With
/// block_diagonal set, only A^0 is stored and the operator is
/// diag(A^0, ..., A^0).
class BlockToeplitzMatrix {
public:
  BlockToeplitzMatrix() = default;
  BlockToeplitzMatrix(int n_blocks, int rows, int cols,
                      bool block_diagonal = false)
      : n_blocks_(n_blocks), rows_(rows), cols_(cols),
        block_diagonal_(block_diagonal) {
    if (n_blocks < 1 || rows < 0 || cols < 0)
      throw std::invalid_argument("BlockToeplitzMatrix: bad dimensions");
    blocks_.assign(block_diagonal ? 1 : n_blocks, DenseBlock::Zero(rows, cols));
  }

  int n_blocks() const { return n_blocks_; }
  int block_rows() const { return rows_; }
  int block_cols() const { return cols_; }
  bool block_diagonal() const { return block_diagonal_; }
  int stored_blocks() const { return int(blocks_.size()); }

  /// Apply with every block transposed (A^d)^T; the block-causal structure
  /// is kept.
  bool transpose_blocks_on_apply = false;

  DenseBlock &block(int d) { return blocks_.at(d); }
  const DenseBlock &block(int d) const { return blocks_.at(d); }

  /// Frees the storage of block d (used when streaming blocks into another
  /// operator). The block reads as empty afterwards.
  void release_block(int d) { DenseBlock().swap(blocks_.at(d)); }

  void scale(double s) {
    for (auto &b : blocks_)
      b *= s;
  }

  /// Binary dump: "HBTM1", then n_blocks, rows, cols as 64-bit
  /// little-endian integers, then every stored block row-major in d order
  /// as little-endian doubles.
  void save(const std::string &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write '" + path + "'");
    out.write("HBTM1", 5);
    write_u64(out, std::uint64_t(stored_blocks()));
    write_u64(out, std::uint64_t(rows_));
    write_u64(out, std::uint64_t(cols_));
    for (const auto &b : blocks_)
      for (Eigen::Index i = 0; i < b.size(); ++i)
        write_f64(out, b.data()[i]);
    if (!out)
      throw std::runtime_error("write failed for '" + path + "'");
  }

  static BlockToeplitzMatrix load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot open '" + path + "'");
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "HBTM1", 5) != 0)
      throw std::runtime_error("'" + path + "' is not an HBTM1 file");
    const auto n = read_u64(in), rows = read_u64(in), cols = read_u64(in);
    if (!in || n == 0 || n > (1u << 20) || rows > (1u << 24) ||
        cols > (1u << 24))
      throw std::runtime_error("'" + path + "': bad header");
    BlockToeplitzMatrix m{static_cast<int>(n), static_cast<int>(rows),
                          static_cast<int>(cols)};
    for (auto &b : m.blocks_)
      for (Eigen::Index i = 0; i < b.size(); ++i)
        b.data()[i] = read_f64(in);
    if (!in)
      throw std::runtime_error("'" + path + "': truncated");
    return m;
  }

private:
  static void write_u64(std::ostream &out, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k)
      b[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char *>(b), 8);
  }
  static std::uint64_t read_u64(std::istream &in) {
    unsigned char b[8] = {};
    in.read(reinterpret_cast<char *>(b), 8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= std::uint64_t(b[k]) << (8 * k);
    return v;
  }
  static void write_f64(std::ostream &out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    write_u64(out, v);
  }
  static double read_f64(std::istream &in) {
    const std::uint64_t v = read_u64(in);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }

  int n_blocks_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  bool block_diagonal_ = false;
  std::vector<DenseBlock> blocks_;
};

/// y^k = sum_{i <= k} A^{k-i} x^i, with (A^d)^T when transpose_blocks is set.
inline SpaceTimeVector apply_toeplitz(const BlockToeplitzMatrix &m,
                                      const SpaceTimeVector &x,
                                      bool transpose_blocks) {
  const int E = m.n_blocks();
  const int in_dofs = transpose_blocks ? m.block_rows() : m.block_cols();
  const int out_dofs = transpose_blocks ? m.block_cols() : m.block_rows();
  if (x.n_steps() != E || x.n_dofs() != in_dofs)
    throw std::invalid_argument("apply_toeplitz: dimension mismatch");
  SpaceTimeVector y(E, out_dofs);
  auto X = x.as_matrix();
  auto Y = y.as_matrix();
  const int n_used = m.block_diagonal() ? 1 : E;
  for (int d = 0; d < n_used; ++d) {
    const DenseBlock &A = m.block(d);
    if (A.size() == 0)
      throw std::logic_error("apply_toeplitz: block was released");
    const int cols = m.block_diagonal() ? E : E - d;
    // The transpose is materialised so that a matrix holding transposed
    // blocks, applied transposed, reproduces the plain product bitwise.
    if (transpose_blocks)
      Y.middleCols(d, cols).noalias() += DenseBlock(A.transpose()) * X.leftCols(cols);
    else
      Y.middleCols(d, cols).noalias() += A * X.leftCols(cols);
  }
  return y;
}

inline SpaceTimeVector apply_toeplitz(const BlockToeplitzMatrix &m,
                                      const SpaceTimeVector &x) {
  return apply_toeplitz(m, x, m.transpose_blocks_on_apply);
}

} // namespace heatbem

#endif // HEATBEM_BLOCK_TOEPLITZ_HPP
