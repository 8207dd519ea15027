#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/model.hpp"
#include "gapfilter/rng.hpp"

namespace gapfilter {

// Everything in this header reaches results through covariances and plain
// Gaussian conditioning only. It never touches the B/R/Q operators, which is
// what makes it an independent check of the solver route.

/// Stationary covariance r(s) = (1/2pi) integral exp(i lambda s) f dlambda on
/// the conjugate lattice. r is periodic in the lag with the grid period and
/// even, so one half-period of values determines it.
class CovarianceModel {
 public:
  CovarianceModel() = default;
  CovarianceModel(std::vector<double> half, std::int64_t period)
      : half_(std::move(half)), period_(period) {}

  double at(std::int64_t lag) const {
    std::int64_t r = lag % period_;
    if (r < 0) r += period_;
    if (r > period_ / 2) r = period_ - r;
    return half_[static_cast<std::size_t>(r)];
  }

  std::int64_t period() const { return period_; }

 private:
  std::vector<double> half_;
  std::int64_t period_ = 1;
};

/// Tabulates r for one half-period from density values on the conjugate grid.
inline CovarianceModel covariance_from_density(const Grids& g, const std::vector<double>& density) {
  if (density.size() != static_cast<std::size_t>(g.freq.size))
    throw validation_error("covariance_from_density: density size mismatch");
  const std::int64_t m = g.freq.size;
  std::vector<double> half(static_cast<std::size_t>(m / 2) + 1);
  for (std::int64_t s = 0; s <= m / 2; ++s) {
    double acc = 0.0;
    for (std::size_t p = 0; p < density.size(); ++p)
      acc += density[p] * g.cos_kt(g.freq.k_of(p), s);
    half[static_cast<std::size_t>(s)] = acc * g.quad();
  }
  return CovarianceModel(std::move(half), m);
}

/// Plain variance of the functional, summed in the lag domain.
inline double functional_variance(const ProcessModel& model, const CovarianceModel& rf) {
  const auto& g = model.grids;
  double acc = 0.0;
  for (std::size_t i = 0; i < model.a_vals.size(); ++i) {
    if (model.a_vals[i] == 0.0) continue;
    for (std::size_t j = 0; j < model.a_vals.size(); ++j) {
      if (model.a_vals[j] == 0.0) continue;
      acc += model.a_vals[i] * model.a_vals[j] * rf.at(g.time.index[i] - g.time.index[j]);
    }
  }
  return acc * g.time.step * g.time.step;
}

struct OracleSolution {
  std::vector<std::int64_t> nodes;  // observed nodes entering the projection
  Eigen::VectorXd weights;          // conditioning weights of the observations
  double mse = 0.0;
  double var_functional = 0.0;
};

/// Best linear estimate of the functional from the observations in
/// [-window, 0] \ S by direct normal equations on the covariance matrix.
/// window = 0 selects every observed node of the period, which is the exact
/// dual of the operator route. A xi = sum_u dt a(u) xi(-u), observed
/// x(t) = xi(t) + eta(t).
inline OracleSolution brute_force_projection(const ProcessModel& model, double window = 0.0) {
  const Grids& g = model.grids;
  const CovarianceModel rf = covariance_from_density(g, model.f_vals);
  const CovarianceModel rg = covariance_from_density(g, model.g_vals);

  OracleSolution sol;
  std::int64_t lo = -g.n_neg;
  if (window != 0.0) {
    const std::int64_t wn = lattice_index(window, g.time.step, "oracle window");
    if (wn < 1) throw validation_error("oracle window must cover at least one step");
    if (wn > g.n_neg) throw validation_error("oracle window exceeds the represented period");
    lo = -wn;
  }
  for (std::int64_t j : observed_nodes(g))
    if (j >= lo) sol.nodes.push_back(j);

  const std::size_t n = sol.nodes.size();
  if (n == 0) throw validation_error("oracle window contains no observed nodes");

  Eigen::MatrixXd K(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = rf.at(sol.nodes[i] - sol.nodes[j]) + rg.at(sol.nodes[i] - sol.nodes[j]);
      K(i, j) = v;
      K(j, i) = v;
    }

  Eigen::VectorXd k(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t u = 0; u < model.a_vals.size(); ++u) {
      if (model.a_vals[u] == 0.0) continue;
      acc += model.a_vals[u] * rf.at(g.time.index[u] + sol.nodes[j]);
    }
    k(j) = acc * g.time.step;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) {
    sol.weights = llt.solve(k);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() != Eigen::Success)
      throw numeric_error("oracle covariance matrix is singular on this grid");
    sol.weights = ldlt.solve(k);
  }

  sol.var_functional = functional_variance(model, rf);
  sol.mse = std::max(0.0, sol.var_functional - k.dot(sol.weights));
  return sol;
}

/// A batch of simulated observation paths plus the exact functional value of
/// each path. The signal and noise spectral draws share nothing, and every
/// gaussian is a pure function of (seed, path, slot), so batches are
/// reproducible bit-for-bit and independent of blocking.
struct PathBatch {
  std::vector<std::int64_t> nodes;  // observed lattice nodes
  Eigen::MatrixXd x;                // nodes.size() x paths
  Eigen::VectorXd functional;       // exact A xi per path
  std::uint64_t seed = 0;
};

/// Spectral sampling on the conjugate grid:
///   xi(t) = sum_k sqrt(f_k W_k / 2pi) (z_k cos lambda_k t + z'_k sin lambda_k t)
/// and likewise for the noise, so E xi(t) xi(u) equals the lattice covariance
/// of covariance_from_density exactly.
inline PathBatch simulate_paths(const ProcessModel& model, int count, std::uint64_t seed) {
  if (count < 1) throw validation_error("path count must be positive");
  const Grids& g = model.grids;
  const std::size_t m = static_cast<std::size_t>(g.freq.size);

  PathBatch batch;
  batch.seed = seed;
  batch.nodes = observed_nodes(g);
  const std::size_t n = batch.nodes.size();

  // trig synthesis matrix [cos | sin] : n x 2m
  Eigen::MatrixXd CS(n, 2 * m);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < m; ++p) {
      const std::int64_t kt = g.freq.k_of(p) * batch.nodes[j];
      CS(j, p) = g.trig->cosp(kt);
      CS(j, m + p) = g.trig->sinp(kt);
    }

  std::vector<double> sf(m), sg(m);
  for (std::size_t p = 0; p < m; ++p) {
    sf[p] = std::sqrt(model.f_vals[p] * g.quad());
    sg[p] = std::sqrt(model.g_vals[p] * g.quad());
  }

  // functional row: A xi = sum_k sqrt(m_f) (z Re A + z' Im A)
  const auto A = forward_transform(g, g.time.index, model.a_vals, -1);

  batch.x.resize(n, count);
  batch.functional.resize(count);
  Eigen::MatrixXd Z(2 * m, 1);
  for (int path = 0; path < count; ++path) {
    double fn = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const double zf = rng::normal(seed, static_cast<std::uint64_t>(path), 4 * p + 0);
      const double zfs = rng::normal(seed, static_cast<std::uint64_t>(path), 4 * p + 1);
      const double zg = rng::normal(seed, static_cast<std::uint64_t>(path), 4 * p + 2);
      const double zgs = rng::normal(seed, static_cast<std::uint64_t>(path), 4 * p + 3);
      Z(p, 0) = sf[p] * zf + sg[p] * zg;
      Z(m + p, 0) = sf[p] * zfs + sg[p] * zgs;
      fn += sf[p] * (zf * A[p].real() + zfs * A[p].imag());
    }
    batch.x.col(path) = CS * Z;
    batch.functional(path) = fn;
  }
  return batch;
}

struct EmpiricalMse {
  double mse = 0.0;
  double stderror = 0.0;
  int paths = 0;
};

/// Empirical mean-square error of the estimate sum_j dt v_j x(t_j) against
/// the exact functional, with the standard error of the mean of the squared
/// residuals.
inline EmpiricalMse empirical_mse(const PathBatch& batch, const std::vector<std::int64_t>& v_nodes,
                                  const Eigen::VectorXd& v, double step) {
  if (static_cast<std::size_t>(v.size()) != v_nodes.size())
    throw validation_error("empirical_mse: node/value size mismatch");
  // map v nodes into batch rows
  std::vector<std::size_t> row(v_nodes.size());
  for (std::size_t j = 0; j < v_nodes.size(); ++j) {
    const auto it = std::lower_bound(batch.nodes.begin(), batch.nodes.end(), v_nodes[j]);
    if (it == batch.nodes.end() || *it != v_nodes[j]) {
      if (v(j) != 0.0)
        throw validation_error("empirical_mse: batch window does not cover the filter support");
      row[j] = static_cast<std::size_t>(-1);
      continue;
    }
    row[j] = static_cast<std::size_t>(it - batch.nodes.begin());
  }

  const int n = static_cast<int>(batch.x.cols());
  std::vector<double> sq(static_cast<std::size_t>(n));
  double mean = 0.0;
  for (int p = 0; p < n; ++p) {
    double est = 0.0;
    for (std::size_t j = 0; j < v_nodes.size(); ++j) {
      if (row[j] == static_cast<std::size_t>(-1)) continue;
      est += v(j) * batch.x(static_cast<Eigen::Index>(row[j]), p);
    }
    est *= step;
    const double r = batch.functional(p) - est;
    sq[static_cast<std::size_t>(p)] = r * r;
    mean += r * r;
  }
  mean /= n;

  double var = 0.0;
  for (double s : sq) var += (s - mean) * (s - mean);
  var = n > 1 ? var / (n - 1) : 0.0;

  EmpiricalMse out;
  out.mse = mean;
  out.stderror = std::sqrt(var / n);
  out.paths = n;
  return out;
}

}  // namespace gapfilter
