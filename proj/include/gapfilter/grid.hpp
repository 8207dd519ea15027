#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/geometry.hpp"

namespace gapfilter {

/// Uniform time lattice covering S (the missing set) and [0, horizon]. Each
/// node t carries quadrature weight step and represents the cell
/// [t, t+step), so the weights sum to the measure of the represented cells.
struct TimeGrid {
  double step;                       // dt
  double horizon;                    // L, a multiple of dt
  std::vector<std::int64_t> index;   // node / dt, ascending
  std::vector<double> nodes;         // index * dt
  std::vector<double> weights;       // dt per node
};

/// Conjugate frequency lattice: an odd number m of nodes k*dl on
/// (-band_limit, band_limit), dl = 2*pi/(m*dt), each with rectangle weight
/// dl. With this spacing exp(i*lambda_k*t_j) over any m consecutive lattice
/// steps is an exact orthogonal family, which is what ties the operator
/// route and the covariance route to one and the same finite problem.
struct FreqGrid {
  double band_limit;            // pi / dt
  double step;                  // dl
  std::int64_t size;            // m, odd
  std::vector<double> nodes;    // k*dl, k = -(m-1)/2 .. (m-1)/2
  std::vector<double> weights;  // dl per node
  std::int64_t half() const { return (size - 1) / 2; }
  /// Signed harmonic index of node position p.
  std::int64_t k_of(std::size_t p) const { return static_cast<std::int64_t>(p) - half(); }
};

/// A conjugate pair of lattices plus the bookkeeping shared by every module:
/// the period splits into the observed nodes [-n_neg, 0] \ S and the
/// constraint nodes S u (0, n_pos]; node 0 sits on the observed side.
struct Grids {
  TimeGrid time;
  FreqGrid freq;
  ObservationGeometry geometry;
  double obs_horizon;    // length of the represented observation window
  std::int64_t n_pos;    // horizon / dt
  std::int64_t n_neg;    // freq.size - 1 - n_pos
  std::shared_ptr<const TrigTable> trig;

  /// Quadrature constant (1/2pi) * dl = 1/(m*dt).
  double quad() const { return 1.0 / (static_cast<double>(freq.size) * time.step); }

  double cos_kt(std::int64_t k, std::int64_t t) const { return trig->cosp(k * t); }
  double sin_kt(std::int64_t k, std::int64_t t) const { return trig->sinp(k * t); }
};

namespace detail {

inline std::vector<std::int64_t> missing_node_indices(const ObservationGeometry& g, double dt) {
  std::vector<std::int64_t> idx;
  for (const auto& iv : g.intervals) {
    const std::int64_t m = lattice_index(iv.offset, dt, "missing interval offset");
    const std::int64_t n = lattice_index(iv.length, dt, "missing interval length");
    if (m <= 0 || n <= 0) throw validation_error("missing interval shorter than the grid step");
    for (std::int64_t j = -(m + n); j <= -m; ++j) idx.push_back(j);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// Builds the conjugate grids for a geometry. obs_horizon = 0 selects the
/// default horizon + depth(S). The frequency node count is the smallest odd
/// m with dl <= pi/(horizon + depth(S)) whose period also covers
/// [-obs_horizon, horizon].
inline Grids make_grids(double step, double horizon, const ObservationGeometry& geometry,
                        double obs_horizon = 0.0) {
  if (!(step > 0.0)) throw validation_error("grid step must be positive");
  if (!(horizon > 0.0)) throw validation_error("grid horizon must be positive");
  ObservationGeometry geo = geometry;
  geo.validate();

  const std::int64_t n_pos = lattice_index(horizon, step, "grid horizon");
  if (n_pos < 1) throw validation_error("grid horizon must be at least one step");
  const double depth = geo.depth();
  const std::int64_t n_depth = geo.intervals.empty() ? 0 : lattice_index(depth, step, "missing set depth");
  if (depth > horizon)
    throw validation_error("grid horizon must cover the mirror of the missing set");

  if (obs_horizon == 0.0) obs_horizon = horizon + depth;
  const std::int64_t n_neg_req = lattice_index(obs_horizon, step, "observation horizon");
  if (n_neg_req < n_depth)
    throw validation_error("observation horizon must cover the missing set");

  std::int64_t m = std::max<std::int64_t>(2 * (n_pos + n_depth), n_pos + n_neg_req + 1);
  if (m % 2 == 0) ++m;
  const std::int64_t n_neg = m - 1 - n_pos;

  Grids g;
  g.geometry = geo;
  g.obs_horizon = static_cast<double>(n_neg) * step;
  g.n_pos = n_pos;
  g.n_neg = n_neg;

  g.time.step = step;
  g.time.horizon = horizon;
  g.time.index = detail::missing_node_indices(geo, step);
  for (std::int64_t j = 0; j <= n_pos; ++j) g.time.index.push_back(j);
  g.time.nodes.reserve(g.time.index.size());
  g.time.weights.assign(g.time.index.size(), step);
  for (std::int64_t j : g.time.index) g.time.nodes.push_back(static_cast<double>(j) * step);

  g.freq.size = m;
  g.freq.band_limit = pi / step;
  g.freq.step = 2.0 * pi / (static_cast<double>(m) * step);
  g.freq.nodes.reserve(static_cast<std::size_t>(m));
  g.freq.weights.assign(static_cast<std::size_t>(m), g.freq.step);
  for (std::int64_t k = -g.freq.half(); k <= g.freq.half(); ++k)
    g.freq.nodes.push_back(static_cast<double>(k) * g.freq.step);

  g.trig = std::make_shared<TrigTable>(m);
  return g;
}

/// Same time lattice, conjugate grid refined by the given odd factor
/// (period multiplied, frequency step divided). Used by convergence probes.
inline Grids refine_freq(const Grids& g, std::int64_t factor = 2) {
  Grids r = g;
  std::int64_t m = g.freq.size * factor;
  if (m % 2 == 0) ++m;
  r.freq.size = m;
  r.freq.step = 2.0 * pi / (static_cast<double>(m) * g.time.step);
  r.freq.nodes.clear();
  r.freq.nodes.reserve(static_cast<std::size_t>(m));
  r.freq.weights.assign(static_cast<std::size_t>(m), r.freq.step);
  for (std::int64_t k = -r.freq.half(); k <= r.freq.half(); ++k)
    r.freq.nodes.push_back(static_cast<double>(k) * r.freq.step);
  r.n_neg = m - 1 - g.n_pos;
  r.obs_horizon = static_cast<double>(r.n_neg) * g.time.step;
  r.trig = std::make_shared<TrigTable>(m);
  return r;
}

/// Observed lattice nodes [-n_neg, 0] \ S, ascending.
inline std::vector<std::int64_t> observed_nodes(const Grids& g) {
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(g.n_neg + 1));
  const auto missing = detail::missing_node_indices(g.geometry, g.time.step);
  for (std::int64_t j = -g.n_neg; j <= 0; ++j) {
    if (!std::binary_search(missing.begin(), missing.end(), j)) out.push_back(j);
  }
  return out;
}

inline void check_in_period(const Grids& g, std::int64_t node) {
  if (node < -g.n_neg || node > g.n_pos)
    throw validation_error("time node outside the represented period");
}

/// X(lambda_k) = sum_j w_j x_j exp(sign * i * t_j * lambda_k) for x supported
/// on the given lattice nodes. sign = -1 is the functional convention
/// A(lambda) = integral a(t) exp(-i t lambda) dt; sign = +1 the solution
/// convention C(lambda) = integral c(t) exp(+i t lambda) dt.
inline std::vector<std::complex<double>> forward_transform(const Grids& g,
                                                           const std::vector<std::int64_t>& nodes,
                                                           const std::vector<double>& values,
                                                           int sign) {
  if (nodes.size() != values.size())
    throw validation_error("forward_transform: node/value size mismatch");
  if (sign != 1 && sign != -1) throw validation_error("forward_transform: sign must be +1 or -1");
  const std::size_t m = static_cast<std::size_t>(g.freq.size);
  std::vector<std::complex<double>> out(m, {0.0, 0.0});
  const double w = g.time.step;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    check_in_period(g, nodes[j]);
    const double wx = w * values[j];
    if (wx == 0.0) continue;
    for (std::size_t p = 0; p < m; ++p) {
      const std::int64_t kt = g.freq.k_of(p) * nodes[j] * sign;
      out[p] += wx * std::complex<double>(g.trig->cosp(kt), g.trig->sinp(kt));
    }
  }
  return out;
}

/// x(t) = (1/2pi) sum_k W_k X_k exp(sign * i * t * lambda_k); the inverse of
/// forward_transform with the opposite sign.
inline std::complex<double> inverse_transform_at(const Grids& g,
                                                 const std::vector<std::complex<double>>& spectrum,
                                                 std::int64_t node, int sign) {
  if (spectrum.size() != static_cast<std::size_t>(g.freq.size))
    throw validation_error("inverse_transform: spectrum size mismatch");
  check_in_period(g, node);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t p = 0; p < spectrum.size(); ++p) {
    const std::int64_t kt = g.freq.k_of(p) * node * sign;
    acc += spectrum[p] * std::complex<double>(g.trig->cosp(kt), g.trig->sinp(kt));
  }
  return acc * g.quad();
}

/// kappa_rho(s) = (1/2pi) integral exp(i lambda s) rho(lambda) dlambda on the
/// conjugate lattice, for an even ratio rho >= 0 given by its node values.
/// The lag is a lattice index (s = lag * dt).
inline double kernel_from_ratio(const Grids& g, const std::vector<double>& ratio, std::int64_t lag) {
  if (ratio.size() != static_cast<std::size_t>(g.freq.size))
    throw validation_error("kernel_from_ratio: ratio size mismatch");
  double acc = 0.0;
  for (std::size_t p = 0; p < ratio.size(); ++p) acc += ratio[p] * g.cos_kt(g.freq.k_of(p), lag);
  return acc * g.quad();
}

/// kappa_rho for lags 0..max_lag (kappa is even in the lag).
inline std::vector<double> kernel_table(const Grids& g, const std::vector<double>& ratio,
                                        std::int64_t max_lag) {
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
  for (std::int64_t s = 0; s <= max_lag; ++s) out[static_cast<std::size_t>(s)] = kernel_from_ratio(g, ratio, s);
  return out;
}

}  // namespace gapfilter
