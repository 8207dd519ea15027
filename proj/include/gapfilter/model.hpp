#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/grid.hpp"

namespace gapfilter {

// ---------------------------------------------------------------------------
// spectral densities
// ---------------------------------------------------------------------------

/// f(lambda) = level on the whole band. level = 0 is admitted: it is the
/// degenerate noise density of the noiseless scenarios.
struct ConstantBand {
  double level;
};

/// f(lambda) = 2*width*power / (width^2 + lambda^2); total power over the
/// real line equals power, correlation time 1/width.
struct Lorentzian {
  double power;
  double width;
};

/// f(lambda) = N(lambda^2) / D(lambda^2) with polynomial coefficients in
/// ascending powers of lambda^2. D must be strictly positive on the band.
struct RationalRatio {
  std::vector<double> numerator;
  std::vector<double> denominator;
};

/// Piecewise-linear table on lambda >= 0, reflected evenly. The table must
/// cover [0, band_limit].
struct Tabulated {
  std::vector<double> lambda;
  std::vector<double> value;
};

using SpectralDensity = std::variant<ConstantBand, Lorentzian, RationalRatio, Tabulated>;

namespace detail {

inline double poly_eval(const std::vector<double>& coeff, double x) {
  double acc = 0.0;
  for (std::size_t i = coeff.size(); i-- > 0;) acc = acc * x + coeff[i];
  return acc;
}

inline double tabulated_at(const Tabulated& d, double lam) {
  const double x = std::abs(lam);
  const auto& xs = d.lambda;
  if (x < xs.front() - 1e-12 || x > xs.back() + 1e-12)
    throw validation_error("tabulated density does not cover the band");
  if (x <= xs.front()) return d.value.front();
  if (x >= xs.back()) return d.value.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - t) * d.value[lo] + t * d.value[hi];
}

inline double clamp_density(double v, const char* what) {
  if (v < -1e-12) throw validation_error(std::string(what) + ": negative density value");
  return std::max(v, 0.0);
}

}  // namespace detail

inline void validate_density(const SpectralDensity& d, double band_limit) {
  if (const auto* c = std::get_if<ConstantBand>(&d)) {
    if (c->level < 0.0) throw validation_error("constant density level must be >= 0");
  } else if (const auto* l = std::get_if<Lorentzian>(&d)) {
    if (!(l->power > 0.0) || !(l->width > 0.0))
      throw validation_error("lorentzian density requires power > 0 and width > 0");
  } else if (const auto* r = std::get_if<RationalRatio>(&d)) {
    if (r->numerator.empty() || r->denominator.empty())
      throw validation_error("rational density requires numerator and denominator coefficients");
    // deny denominator roots inside the band: sample densely in lambda^2
    const int n = 4096;
    for (int i = 0; i <= n; ++i) {
      const double lam = band_limit * static_cast<double>(i) / n;
      if (detail::poly_eval(r->denominator, lam * lam) <= 0.0)
        throw validation_error("rational density denominator is not positive on the band");
    }
  } else if (const auto* t = std::get_if<Tabulated>(&d)) {
    if (t->lambda.size() < 2 || t->lambda.size() != t->value.size())
      throw validation_error("tabulated density needs at least two (lambda, value) pairs");
    if (!std::is_sorted(t->lambda.begin(), t->lambda.end()))
      throw validation_error("tabulated density abscissae must be ascending");
    if (t->lambda.front() > 1e-12 || t->lambda.back() < band_limit - 1e-12)
      throw validation_error("tabulated density must cover [0, band_limit]");
    for (double v : t->value) detail::clamp_density(v, "tabulated density");
  }
}

/// Density values on the given frequency nodes; small negative evaluations
/// (within -1e-12) are clamped to zero, anything lower is rejected.
inline std::vector<double> evaluate_density(const SpectralDensity& d,
                                            const std::vector<double>& lambda_nodes) {
  std::vector<double> out(lambda_nodes.size());
  for (std::size_t p = 0; p < lambda_nodes.size(); ++p) {
    const double lam = lambda_nodes[p];
    double v = 0.0;
    if (const auto* c = std::get_if<ConstantBand>(&d)) {
      v = c->level;
    } else if (const auto* l = std::get_if<Lorentzian>(&d)) {
      v = 2.0 * l->width * l->power / (l->width * l->width + lam * lam);
    } else if (const auto* r = std::get_if<RationalRatio>(&d)) {
      v = detail::poly_eval(r->numerator, lam * lam) / detail::poly_eval(r->denominator, lam * lam);
    } else if (const auto* t = std::get_if<Tabulated>(&d)) {
      v = detail::tabulated_at(*t, lam);
    }
    out[p] = detail::clamp_density(v, "density");
  }
  return out;
}

/// f+g with the pointwise floor applied; this is the only denominator the
/// ratio kernels ever see.
inline double floored_sum(double f, double g) { return std::max(f + g, density_floor); }

inline std::vector<double> floored_sum(const std::vector<double>& f, const std::vector<double>& g) {
  std::vector<double> out(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) out[p] = floored_sum(f[p], g[p]);
  return out;
}

// ---------------------------------------------------------------------------
// weight function of the estimated functional
// ---------------------------------------------------------------------------

/// Compactly supported weight a(t) on [0, horizon]. Box and triangle are
/// half-open on the right so that the lattice mass of box [0,b) is exactly b.
/// Support comparisons happen in lattice-index space, never on raw doubles.
struct WeightFunction {
  enum class Family { box, triangle, tabulated };
  Family family = Family::box;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> table_t;
  std::vector<double> table_a;

  double at_index(std::int64_t idx, double step) const {
    switch (family) {
      case Family::box: {
        const std::int64_t a = lattice_index(lo, step, "weight support endpoint");
        const std::int64_t b = lattice_index(hi, step, "weight support endpoint");
        return (idx >= a && idx < b) ? 1.0 : 0.0;
      }
      case Family::triangle: {
        const std::int64_t a = lattice_index(lo, step, "weight support endpoint");
        const std::int64_t b = lattice_index(hi, step, "weight support endpoint");
        if (idx < a || idx >= b) return 0.0;
        const double u = 2.0 * static_cast<double>(idx - a) / static_cast<double>(b - a) - 1.0;
        return 1.0 - std::abs(u);
      }
      case Family::tabulated:
        for (std::size_t i = 0; i < table_t.size(); ++i)
          if (lattice_index(table_t[i], step, "tabulated weight abscissa") == idx) return table_a[i];
        return 0.0;
    }
    return 0.0;
  }
};

inline void validate_weight(const WeightFunction& w, double step, double horizon) {
  if (w.family == WeightFunction::Family::tabulated) {
    if (w.table_t.size() != w.table_a.size() || w.table_t.empty())
      throw validation_error("tabulated weight needs matching (t, value) pairs");
    for (double t : w.table_t) {
      lattice_index(t, step, "tabulated weight abscissa");
      if (t < 0.0 || t > horizon)
        throw validation_error("tabulated weight support must lie in [0, horizon]");
    }
  } else {
    if (!(w.hi > w.lo)) throw validation_error("weight support must have positive length");
    if (w.lo < 0.0 || w.hi > horizon + 1e-12)
      throw validation_error("weight support must lie in [0, horizon]");
    lattice_index(w.lo, step, "weight support endpoint");
    lattice_index(w.hi, step, "weight support endpoint");
  }
}

/// The weight as the solver sees it: samples on the master time nodes of
/// S u [0, horizon], forced to zero on S and on the mirrored missing set S+.
inline std::vector<double> functional_image(const WeightFunction& w, const Grids& g) {
  std::vector<double> a(g.time.index.size(), 0.0);
  for (std::size_t j = 0; j < g.time.index.size(); ++j) {
    const std::int64_t idx = g.time.index[j];
    if (idx < 0) continue;  // S part of the node list
    if (g.geometry.in_mirror_index(idx, g.time.step)) continue;  // S+ carries no weight
    a[j] = w.at_index(idx, g.time.step);
  }
  return a;
}

/// a restricted to [0, N]: the truncated functional. N must be a lattice
/// point in [0, horizon].
inline std::vector<double> truncate_weight(const std::vector<double>& a, const Grids& g, double N) {
  if (a.size() != g.time.index.size()) throw validation_error("truncate_weight: size mismatch");
  const std::int64_t n = lattice_index(N, g.time.step, "truncation point");
  if (n < 0 || n > g.n_pos) throw validation_error("truncation point outside [0, horizon]");
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t j = 0; j < a.size(); ++j)
    if (g.time.index[j] >= 0 && g.time.index[j] <= n) out[j] = a[j];
  return out;
}

// ---------------------------------------------------------------------------
// minimality probe
// ---------------------------------------------------------------------------

struct MinimalityReport {
  double mass = 0.0;          // (1/2pi) integral |gamma|^2 / (f+g)
  double refined_mass = 0.0;  // same integral on the 2x refined conjugate grid
  bool pass = false;          // refinement moved the mass by < 10%
};

///// Quadrature probe of the minimality condition: the integral must be stable
/// under grid refinement to count as finite. gamma defaults to 1 on the band.
inline MinimalityReport minimality_check(const SpectralDensity& f, const SpectralDensity& g,
                                         const Grids& grids,
                                         const std::vector<double>* gamma = nullptr) {
  const auto mass_on = [&](const Grids& gr, const std::vector<double>* probe) {
    const auto fv = evaluate_density(f, gr.freq.nodes);
    const auto gv = evaluate_density(g, gr.freq.nodes);
    const auto den = floored_sum(fv, gv);
    double acc = 0.0;
    for (std::size_t p = 0; p < den.size(); ++p) {
      const double gm = probe ? (*probe)[p] : 1.0;
      acc += gm * gm / den[p];
    }
    return acc * gr.quad();
  };
  MinimalityReport rep;
  if (gamma && gamma->size() != static_cast<std::size_t>(grids.freq.size))
    throw validation_error("minimality probe size mismatch");
  rep.mass = mass_on(grids, gamma);
  // the refined grid has different nodes; a custom probe is reused only when
  // it is the default
  const Grids fine = refine_freq(grids);
  rep.refined_mass = gamma ? rep.mass : mass_on(fine, nullptr);
  if (gamma) {
    rep.pass = true;  // caller-supplied probe: single-grid evaluation only
  } else if (rep.mass == 0.0) {
    rep.pass = rep.refined_mass == 0.0;
  } else {
    rep.pass = std::abs(rep.refined_mass - rep.mass) < 0.10 * rep.mass;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// assembled process model
// ---------------------------------------------------------------------------

/// Everything the solver, oracle and minimax layers consume: grids, the
/// weight, both densities and their node values, and the minimality verdict.
struct ProcessModel {
  Grids grids;
  WeightFunction weight;
  SpectralDensity f;
  SpectralDensity g;
  std::vector<double> f_vals;  // on freq nodes
  std::vector<double> g_vals;
  std::vector<double> a_vals;  // functional image on master time nodes
  MinimalityReport minimality;
};

inline ProcessModel make_process_model(const Grids& grids, const WeightFunction& weight,
                                       const SpectralDensity& f, const SpectralDensity& g) {
  ProcessModel m;
  m.grids = grids;
  validate_density(f, grids.freq.band_limit);
  validate_density(g, grids.freq.band_limit);
  validate_weight(weight, grids.time.step, grids.time.horizon);
  m.weight = weight;
  m.f = f;
  m.g = g;
  m.f_vals = evaluate_density(f, grids.freq.nodes);
  m.g_vals = evaluate_density(g, grids.freq.nodes);
  m.a_vals = functional_image(weight, grids);
  m.minimality = minimality_check(f, g, grids);
  return m;
}

/// Replaces both densities by explicit node values (used by the minimax layer,
/// whose least favorable pair is tabulated on the grid).
inline ProcessModel with_density_values(const ProcessModel& base, std::vector<double> f_vals,
                                        std::vector<double> g_vals) {
  ProcessModel m = base;
  if (f_vals.size() != base.f_vals.size() || g_vals.size() != base.g_vals.size())
    throw validation_error("with_density_values: node count mismatch");
  m.f_vals = std::move(f_vals);
  m.g_vals = std::move(g_vals);
  return m;
}

}  // namespace gapfilter
