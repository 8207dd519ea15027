#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/model.hpp"
#include "gapfilter/operators.hpp"
#include "gapfilter/oracle.hpp"

namespace gapfilter {

struct FilterDiagnostics {
  double support_leakage = 0.0;  // max |h-hat| on the constraint nodes / max |v|
  double tail_mass = 0.0;        // share of |c| mass on the last tenth of [0, L]
  double cond_B = 0.0;
  bool regularized = false;
  bool minimality_advisory = false;  // refinement probe moved the boundedness mass
  double freq_form_gap = 0.0;        // relative gap between the two error expressions
};

/// Solution of the filtering problem. The estimate of the functional from a
/// path x of observations is  sum_j dt v_j x(t_j)  over the observed nodes.
struct FilterSolution {
  std::vector<std::int64_t> t_nodes;          // S u [0, L], ascending
  Eigen::VectorXd c;                          // correction coefficients, c(0) = 0
  std::vector<std::complex<double>> A;        // transform of the target weight
  std::vector<std::complex<double>> C;        // transform of c on the constraint set
  std::vector<std::complex<double>> h;        // filter characteristic (A f - C)/(f + g)
  std::vector<std::int64_t> v_nodes;          // observed nodes [-n_neg, 0] \ S
  Eigen::VectorXd v;                          // h-hat sampled on v_nodes
  double delta = 0.0;                         // mean-square error of the estimate
  double var_functional = 0.0;                // variance of the functional itself
  FilterDiagnostics diag;
};

/// Mean-square error in its spectral form
///   (1/2pi) sum W [ |A g + C|^2 f + |A f - C|^2 g ] / (f + g)^2.
inline double mse_frequency_form(const Grids& g, const std::vector<std::complex<double>>& A,
                                 const std::vector<std::complex<double>>& C,
                                 const std::vector<double>& f, const std::vector<double>& gv) {
  double acc = 0.0;
  for (std::size_t p = 0; p < A.size(); ++p) {
    const double den = floored_sum(f[p], gv[p]);
    const double nf = std::norm(A[p] * gv[p] + C[p]);
    const double ng = std::norm(A[p] * f[p] - C[p]);
    acc += (nf * f[p] + ng * gv[p]) / (den * den);
  }
  return acc * g.quad();
}

/// Solves the normal equations B c = R a on the constraint nodes
/// S u (0, L] (node 0 belongs to the observed side and is pinned to c(0)=0),
/// assembles the characteristic h = (A f - C)/(f + g), samples it on the
/// observed nodes, and evaluates the error both ways.
inline FilterSolution solve_filter(const ProcessModel& model) {
  const Grids& g = model.grids;
  const OperatorSet ops = assemble_operators(model);
  const std::size_t n = ops.t_nodes.size();

  Eigen::VectorXd a(n);
  for (std::size_t j = 0; j < n; ++j) a(j) = model.a_vals[j];
  const Eigen::VectorXd rhs = ops.R * a;

  // subsystem without the pinned node
  const std::size_t ns = n - 1;
  Eigen::MatrixXd Bs(ns, ns);
  Eigen::VectorXd rs(ns);
  {
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == ops.zero_pos) continue;
      rs(r) = rhs(i);
      std::size_t cpos = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == ops.zero_pos) continue;
        Bs(r, cpos++) = ops.B(i, j);
      }
      ++r;
    }
  }

  FilterSolution sol;
  sol.t_nodes = ops.t_nodes;
  sol.c = Eigen::VectorXd::Zero(n);
  if (ns > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(Bs);
    if (llt.info() != Eigen::Success)
      throw numeric_error("constraint subsystem is not positive definite");
    Eigen::VectorXd cs = llt.solve(rs);
    cs += llt.solve(rs - Bs * cs);
    if ((Bs * cs - rs).norm() > 1e-10 * std::max(rs.norm(), 1e-300))
      throw numeric_error("constraint subsystem solve lost accuracy");
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == ops.zero_pos) continue;
      sol.c(i) = cs(r++);
    }
  }

  std::vector<double> cvals(n);
  for (std::size_t j = 0; j < n; ++j) cvals[j] = sol.c(j);
  sol.A = forward_transform(g, sol.t_nodes, model.a_vals, -1);
  sol.C = forward_transform(g, sol.t_nodes, cvals, +1);

  const std::size_t m = sol.A.size();
  sol.h.resize(m);
  for (std::size_t p = 0; p < m; ++p) {
    const double den = floored_sum(model.f_vals[p], model.g_vals[p]);
    sol.h[p] = (sol.A[p] * model.f_vals[p] - sol.C[p]) / den;
  }

  // error, time-domain bilinear form: <R a, c> + <Q a, a>
  const Eigen::VectorXd qa = ops.Q * a;
  const double delta_time = ops.weight * (rhs.dot(sol.c) + qa.dot(a));
  const double delta_freq = mse_frequency_form(g, sol.A, sol.C, model.f_vals, model.g_vals);
  sol.delta = delta_time;
  sol.diag.freq_form_gap = std::abs(delta_time - delta_freq) / (1.0 + std::abs(delta_freq));

  double varf = 0.0;
  for (std::size_t p = 0; p < m; ++p) varf += std::norm(sol.A[p]) * model.f_vals[p];
  sol.var_functional = varf * g.quad();

  // sample h-hat on the observed nodes and check it vanishes on the others
  sol.v_nodes = observed_nodes(g);
  sol.v.resize(static_cast<Eigen::Index>(sol.v_nodes.size()));
  double vmax = 0.0;
  for (std::size_t j = 0; j < sol.v_nodes.size(); ++j) {
    const std::complex<double> z = inverse_transform_at(g, sol.h, sol.v_nodes[j], -1);
    sol.v(static_cast<Eigen::Index>(j)) = z.real();
    vmax = std::max(vmax, std::abs(z.real()));
  }
  double leak = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (sol.t_nodes[j] == 0) continue;  // node 0 is observed
    const std::complex<double> z = inverse_transform_at(g, sol.h, sol.t_nodes[j], -1);
    leak = std::max(leak, std::abs(z));
  }
  sol.diag.support_leakage = leak / std::max(vmax, 1e-300);

  // share of |c| mass on the last tenth of the future window
  const std::int64_t n_pos = g.n_pos;
  const std::int64_t tail_from = n_pos - std::max<std::int64_t>(1, n_pos / 10) + 1;
  double mass = 0.0, tail = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::abs(sol.c(j));
    mass += w;
    if (sol.t_nodes[j] >= tail_from) tail += w;
  }
  sol.diag.tail_mass = mass > 0.0 ? tail / mass : 0.0;
  sol.diag.cond_B = ops.cond_estimate;
  sol.diag.regularized = ops.regularized;
  sol.diag.minimality_advisory = !model.minimality.pass;
  return sol;
}

/// Same problem with the target weight cut off beyond time N.
inline FilterSolution solve_filter_truncated(const ProcessModel& model, double horizon) {
  ProcessModel cut = model;
  cut.a_vals = truncate_weight(model.a_vals, model.grids, horizon);
  return solve_filter(cut);
}

/// Applies the filter to one simulated path: sum_j dt v_j x(t_j).
inline double estimate_on_path(const FilterSolution& sol, const PathBatch& batch, int path,
                               double step) {
  double est = 0.0;
  std::size_t r = 0;
  for (std::size_t j = 0; j < sol.v_nodes.size(); ++j) {
    while (r < batch.nodes.size() && batch.nodes[r] < sol.v_nodes[j]) ++r;
    if (r == batch.nodes.size() || batch.nodes[r] != sol.v_nodes[j])
      throw validation_error("estimate_on_path: path batch does not cover the filter support");
    est += sol.v(static_cast<Eigen::Index>(j)) * batch.x(static_cast<Eigen::Index>(r), path);
  }
  return est * step;
}

/// Empirical error of this filter over a batch.
inline EmpiricalMse empirical_mse(const PathBatch& batch, const FilterSolution& sol, double step) {
  return empirical_mse(batch, sol.v_nodes, sol.v, step);
}

}  // namespace gapfilter
