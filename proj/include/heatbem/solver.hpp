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

#ifndef HEATBEM_SOLVER_HPP
#define HEATBEM_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heatbem/block_toeplitz.hpp"
#include "heatbem/errors.hpp"

namespace heatbem {

/// Linear map between space-time vectors with n_steps time steps.
class LinearOperator {
public:
  using Fn = std::function<void(const SpaceTimeVector &, SpaceTimeVector &)>;

  LinearOperator() = default;
  LinearOperator(int n_steps, int in_dofs, int out_dofs, Fn fn)
      : n_steps_(n_steps), in_dofs_(in_dofs), out_dofs_(out_dofs),
        fn_(std::move(fn)) {}

  int n_steps() const { return n_steps_; }
  int in_dofs() const { return in_dofs_; }
  int out_dofs() const { return out_dofs_; }
  explicit operator bool() const { return bool(fn_); }

  SpaceTimeVector apply(const SpaceTimeVector &x) const {
    if (x.n_steps() != n_steps_ || x.n_dofs() != in_dofs_)
      throw std::invalid_argument("LinearOperator: dimension mismatch");
    SpaceTimeVector y(n_steps_, out_dofs_);
    fn_(x, y);
    return y;
  }
  SpaceTimeVector operator()(const SpaceTimeVector &x) const {
    return apply(x);
  }

  /// Operator given by a block Toeplitz matrix. The matrix is referenced, not
  /// copied, and must outlive the operator.
  static LinearOperator from(const BlockToeplitzMatrix &m,
                             bool transpose_blocks = false) {
    const int in = transpose_blocks ? m.block_rows() : m.block_cols();
    const int out = transpose_blocks ? m.block_cols() : m.block_rows();
    const BlockToeplitzMatrix *p = &m;
    return LinearOperator(m.n_blocks(), in, out,
                          [p, transpose_blocks](const SpaceTimeVector &x,
                                                SpaceTimeVector &y) {
                            y = apply_toeplitz(*p, x, transpose_blocks);
                          });
  }

  static LinearOperator identity(int n_steps, int dofs, double scale = 1.0) {
    return LinearOperator(n_steps, dofs, dofs,
                          [scale](const SpaceTimeVector &x, SpaceTimeVector &y) {
                            y.values() = scale * x.values();
                          });
  }

  /// a * A + b * B, evaluated lazily.
  static LinearOperator combine(double a, LinearOperator A, double b,
                                LinearOperator B) {
    if (A.n_steps() != B.n_steps() || A.in_dofs() != B.in_dofs() ||
        A.out_dofs() != B.out_dofs())
      throw std::invalid_argument("LinearOperator::combine: shape mismatch");
    const int n = A.n_steps(), in = A.in_dofs(), out = A.out_dofs();
    return LinearOperator(
        n, in, out,
        [a, b, A = std::move(A), B = std::move(B)](const SpaceTimeVector &x,
                                                   SpaceTimeVector &y) {
          y = A.apply(x);
          y.values() *= a;
          y.values() += b * B.apply(x).values();
        });
  }

private:
  int n_steps_ = 0;
  int in_dofs_ = 0;
  int out_dofs_ = 0;
  Fn fn_;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  double seconds = 0.0;
  /// True relative residual at the end of every restart cycle.
  std::vector<double> restart_residuals;
};

struct FgmresOptions {
  double rel_tol = 1e-8;
  int max_iter = 500;
  int restart = 50;
};

/// Flexible GMRES with right preconditioning and restarts. Non-convergence
/// is reported through SolveReport, not thrown.
inline std::pair<SpaceTimeVector, SolveReport>
fgmres(const LinearOperator &op, const SpaceTimeVector &rhs,
       const FgmresOptions &options = {},
       const LinearOperator *right_precond = nullptr,
       const SpaceTimeVector *initial_guess = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  if (op.in_dofs() != op.out_dofs())
    throw std::invalid_argument("fgmres: operator must be square");
  if (!rhs.values().allFinite())
    throw std::invalid_argument("fgmres: rhs is not finite");
  const int n_steps = rhs.n_steps(), dofs = rhs.n_dofs();
  SolveReport report;
  SpaceTimeVector x = initial_guess ? *initial_guess
                                    : SpaceTimeVector(n_steps, dofs);
  const double bnorm = rhs.values().norm();
  auto finish = [&] {
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return std::make_pair(std::move(x), report);
  };
  if (bnorm == 0.0) {
    x.values().setZero();
    report.converged = true;
    return finish();
  }
  const int m = std::max(1, options.restart);
  const Eigen::Index n = rhs.size();
  Eigen::MatrixXd Vb(n, m + 1), Zb(n, m);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  Eigen::VectorXd r = rhs.values() - op.apply(x).values();
  double rnorm = r.norm();
  report.relative_residual = rnorm / bnorm;
  while (true) {
    if (rnorm <= options.rel_tol * bnorm) {
      report.converged = true;
      break;
    }
    if (report.iterations >= options.max_iter)
      break;
    Vb.col(0) = r / rnorm;
    g.setZero();
    g(0) = rnorm;
    H.setZero();
    int k = 0;
    for (; k < m && report.iterations < options.max_iter; ++k) {
      ++report.iterations;
      SpaceTimeVector v(n_steps, dofs, Vb.col(k));
      SpaceTimeVector z = right_precond ? right_precond->apply(v) : v;
      Zb.col(k) = z.values();
      Eigen::VectorXd w = op.apply(z).values();
      for (int i = 0; i <= k; ++i) {
        H(i, k) = Vb.col(i).dot(w);
        w -= H(i, k) * Vb.col(i);
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 0.0)
        Vb.col(k + 1) = w / H(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
        H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs(k) = denom > 0.0 ? H(k, k) / denom : 1.0;
      sn(k) = denom > 0.0 ? H(k + 1, k) / denom : 0.0;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      if (std::abs(g(k + 1)) <= options.rel_tol * bnorm || denom == 0.0) {
        ++k;
        break;
      }
    }
    if (k > 0) {
      const Eigen::VectorXd y = H.topLeftCorner(k, k)
                                    .triangularView<Eigen::Upper>()
                                    .solve(g.head(k));
      x.values() += Zb.leftCols(k) * y;
    }
    r = rhs.values() - op.apply(x).values();
    rnorm = r.norm();
    report.relative_residual = rnorm / bnorm;
    report.restart_residuals.push_back(report.relative_residual);
    if (k == 0)
      break;
  }
  return finish();
}

/// Time marching for the block lower-triangular system: A^0 x^k = rhs^k -
/// sum_{d >= 1} A^d x^{k-d}. A^0 is factorised once; each step is checked
/// against inner_rel_tol and a SingularBlock error is raised when the
/// factorisation cannot meet it.
class ForwardBlockSolver {
public:
  ForwardBlockSolver(const BlockToeplitzMatrix &m, double inner_rel_tol)
      : m_(&m), tol_(inner_rel_tol) {
    if (m.block_rows() != m.block_cols())
      throw std::invalid_argument("forward_block_solve: blocks must be square");
    lu_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(
        Eigen::MatrixXd(m.block(0)));
    const double rc = lu_->rcond();
    if (!(rc > 1e-14))
      throw SingularBlock("forward_block_solve: A^0 is singular (rcond " +
                          std::to_string(rc) + ")");
  }

  SpaceTimeVector solve(const SpaceTimeVector &rhs) const {
    const BlockToeplitzMatrix &m = *m_;
    const int E = m.n_blocks();
    if (rhs.n_steps() != E || rhs.n_dofs() != m.block_rows())
      throw std::invalid_argument("forward_block_solve: dimension mismatch");
    SpaceTimeVector x(E, m.block_cols());
    Eigen::VectorXd b;
    for (int k = 0; k < E; ++k) {
      b = rhs.step(k);
      if (!m.block_diagonal())
        for (int d = 1; d <= k; ++d)
          b.noalias() -= m.block(d) * x.step(k - d);
      x.step(k) = lu_->solve(b);
      const double bn = b.norm();
      if (bn > 0.0) {
        const double res = (m.block(0) * x.step(k) - b).norm();
        if (!(res <= tol_ * bn))
          throw SingularBlock("forward_block_solve: step " + std::to_string(k) +
                              " residual " + std::to_string(res / bn));
      }
    }
    return x;
  }

private:
  const BlockToeplitzMatrix *m_;
  double tol_;
  std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

inline SpaceTimeVector forward_block_solve(const BlockToeplitzMatrix &m,
                                           const SpaceTimeVector &rhs,
                                           double inner_rel_tol = 1e-10) {
  return ForwardBlockSolver(m, inner_rel_tol).solve(rhs);
}

/// x -> V11^{-1} x by forward block substitution, used as a flexible right
/// preconditioner for the hypersingular system. V11 must outlive the
/// returned operator.
inline LinearOperator
build_hypersingular_preconditioner(const BlockToeplitzMatrix &V11,
                                   double inner_rel_tol = 1e-2) {
  auto solver = std::make_shared<ForwardBlockSolver>(V11, inner_rel_tol);
  return LinearOperator(V11.n_blocks(), V11.block_cols(), V11.block_rows(),
                        [solver](const SpaceTimeVector &x, SpaceTimeVector &y) {
                          y = solver->solve(x);
                        });
}

/// Operator preconditioner x -> M^{-1} V11 M^{-1} x for the hypersingular
/// system, M = diag(h_t M_x) with M_x the spatial p1 mass matrix. Unlike
/// V11^{-1}, which has the same order as D, this approximates D^{-1}. V11
/// must outlive the returned operator.
inline LinearOperator
build_operator_preconditioner(const BlockToeplitzMatrix &V11,
                              const Eigen::MatrixXd &step_mass) {
  if (V11.block_rows() != step_mass.rows() || step_mass.rows() != step_mass.cols())
    throw std::invalid_argument("build_operator_preconditioner: dimension mismatch");
  auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(step_mass);
  if (llt->info() != Eigen::Success)
    throw SingularBlock("build_operator_preconditioner: mass matrix not SPD");
  const BlockToeplitzMatrix *v = &V11;
  return LinearOperator(
      V11.n_blocks(), V11.block_cols(), V11.block_rows(),
      [v, llt](const SpaceTimeVector &x, SpaceTimeVector &y) {
        SpaceTimeVector z(x.n_steps(), x.n_dofs());
        z.as_matrix() = llt->solve(x.as_matrix());
        y = apply_toeplitz(*v, z);
        y.as_matrix() = llt->solve(y.as_matrix()).eval();
      });
}

} // namespace heatbem

#endif // HEATBEM_SOLVER_HPP
