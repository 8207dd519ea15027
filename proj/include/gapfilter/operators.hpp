#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/model.hpp"

namespace gapfilter {

/// Discretised kernel operators on the node set S u [0, L]. Columns carry the
/// quadrature weight dt, so matrix-vector products realise the weighted sums
///   (B c)(t_j) = sum_k dt k_{1/(f+g)}(t_k - t_j) c(t_k)
///   (R a)(t_j) = sum_k dt k_{f/(f+g)}(t_k + t_j) a(t_k)
///   (Q a)(t_j) = sum_k dt k_{fg/(f+g)}(t_k - t_j) a(t_k)
struct OperatorSet {
  std::vector<std::int64_t> t_nodes;  // lattice indices, ascending
  Eigen::MatrixXd B, R, Q;
  double weight = 0.0;      // dt carried by each column
  std::size_t zero_pos = 0; // position of node 0 in t_nodes
  double cond_estimate = 0.0;
  bool regularized = false;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> factor;  // of B (after any shift)
};

namespace detail {

/// Largest / smallest eigenvalue of an SPD matrix by plain power iteration,
/// the smallest through inverse iteration on a ready factorisation.
inline double spd_extreme_eig(const Eigen::MatrixXd& M,
                              const Eigen::LLT<Eigen::MatrixXd>* inv_factor) {
  const Eigen::Index n = M.rows();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.25 * static_cast<double>(i % 7);
  x.normalize();
  double value = 0.0;
  for (int it = 0; it < 80; ++it) {
    Eigen::VectorXd y = inv_factor ? inv_factor->solve(x) : Eigen::VectorXd(M * x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    y /= norm;
    const double next = inv_factor ? 1.0 / norm : norm;
    if (it > 10 && std::abs(next - value) <= 1e-12 * std::abs(next)) {
      value = next;
      break;
    }
    value = next;
    x = y;
  }
  return value;
}

}  // namespace detail

/// Builds B, R, Q from the model densities by cosine quadrature of the three
/// spectral ratios. B is symmetric positive definite by construction; if its
/// estimated condition number exceeds 1e12 a diagonal shift of
/// 1e-10 tr(B)/n is applied once and flagged.
inline OperatorSet assemble_operators(const ProcessModel& model) {
  const Grids& g = model.grids;
  const std::int64_t n = static_cast<std::int64_t>(g.time.index.size());
  const double dt = g.time.step;

  std::vector<double> inv_ratio(model.f_vals.size()), rf_ratio(model.f_vals.size()),
      q_ratio(model.f_vals.size());
  for (std::size_t p = 0; p < model.f_vals.size(); ++p) {
    const double den = floored_sum(model.f_vals[p], model.g_vals[p]);
    inv_ratio[p] = 1.0 / den;
    rf_ratio[p] = model.f_vals[p] / den;
    q_ratio[p] = model.f_vals[p] * model.g_vals[p] / den;
  }

  std::int64_t span = 0;  // max |t_k - t_j| and t_k + t_j in lattice units
  const std::int64_t t_min = g.time.index.front();
  const std::int64_t t_max = g.time.index.back();
  span = std::max(span, t_max - t_min);
  span = std::max(span, std::abs(2 * t_min));
  span = std::max(span, 2 * t_max);

  const std::vector<double> k_inv = kernel_table(g, inv_ratio, span);
  const std::vector<double> k_rf = kernel_table(g, rf_ratio, span);
  const std::vector<double> k_q = kernel_table(g, q_ratio, span);

  OperatorSet ops;
  ops.t_nodes = g.time.index;
  ops.weight = dt;
  ops.B.resize(n, n);
  ops.R.resize(n, n);
  ops.Q.resize(n, n);
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t diff = std::abs(ops.t_nodes[k] - ops.t_nodes[j]);
      const std::int64_t sum = std::abs(ops.t_nodes[k] + ops.t_nodes[j]);
      ops.B(j, k) = dt * k_inv[static_cast<std::size_t>(diff)];
      ops.R(j, k) = dt * k_rf[static_cast<std::size_t>(sum)];
      ops.Q(j, k) = dt * k_q[static_cast<std::size_t>(diff)];
    }
  }
  for (std::size_t j = 0; j < ops.t_nodes.size(); ++j)
    if (ops.t_nodes[j] == 0) ops.zero_pos = j;

  auto factor = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(ops.B);
  if (factor->info() != Eigen::Success) {
    const double shift = 1e-10 * ops.B.trace() / static_cast<double>(n);
    ops.B.diagonal().array() += shift;
    ops.regularized = true;
    factor = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(ops.B);
    if (factor->info() != Eigen::Success)
      throw numeric_error("operator B is not positive definite even after shifting");
  }

  const double eig_hi = detail::spd_extreme_eig(ops.B, nullptr);
  const double eig_lo = detail::spd_extreme_eig(ops.B, factor.get());
  ops.cond_estimate = eig_lo > 0.0 ? eig_hi / eig_lo : std::numeric_limits<double>::infinity();
  if (!ops.regularized && ops.cond_estimate > 1e12) {
    const double shift = 1e-10 * ops.B.trace() / static_cast<double>(n);
    ops.B.diagonal().array() += shift;
    ops.regularized = true;
    factor = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(ops.B);
    if (factor->info() != Eigen::Success)
      throw numeric_error("operator B is not positive definite even after shifting");
  }
  ops.factor = std::move(factor);
  return ops;
}

/// Solves B x = rhs with one step of iterative refinement and verifies the
/// residual to 1e-10 relative.
inline Eigen::VectorXd solve_B(const OperatorSet& ops, const Eigen::VectorXd& rhs) {
  if (rhs.size() != ops.B.rows()) throw validation_error("solve_B: rhs dimension mismatch");
  Eigen::VectorXd x = ops.factor->solve(rhs);
  x += ops.factor->solve(rhs - ops.B * x);
  const double rel = (ops.B * x - rhs).norm();
  if (rel > 1e-10 * std::max(rhs.norm(), 1e-300))
    throw numeric_error("solve_B: residual exceeds tolerance");
  return x;
}

}  // namespace gapfilter
