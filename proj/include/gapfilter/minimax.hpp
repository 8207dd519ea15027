#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/model.hpp"
#include "gapfilter/rng.hpp"
#include "gapfilter/solver.hpp"

namespace gapfilter {

// Density uncertainty classes around a nominal density d1. All budgets are in
// the (1/2pi) dlambda measure of the represented band:
//   L1Ball       : (1/2pi) int |d - d1|        <= epsilon
//   L2Ball       : (1/2pi) int (d - d1)^2      <= epsilon^2
//   Contamination: d = (1-eps) d1 + eps w, w >= 0, (1/2pi) int d <= power_cap
struct L1Ball {
  double epsilon = 0.0;
};
struct L2Ball {
  double epsilon = 0.0;
};
struct Contamination {
  double epsilon = 0.0;
  double power_cap = 0.0;
};
using DensityClass = std::variant<L1Ball, L2Ball, Contamination>;

struct MinimaxOptions {
  double theta = 0.5;        // damping of the fixed-point iteration
  double tol = 1e-8;         // sup-norm change that counts as converged
  int max_iterations = 500;
};

/// Per-side stationarity report. kkt_residual is the sup over nodes of the
/// optimality-equation residual divided by the node's (f0+g0)^2; the printed
/// forms of some sides differ from the saddle-consistent ones, and
/// alt_residual reports those as-written with a fitted multiplier.
struct StationaritySide {
  double alpha = 0.0;
  double kkt_residual = 0.0;
  double alt_residual = 0.0;
  double sign_excess = 0.0;     // violation of |Psi| <= 1 / phi <= 0
  double constraint_gap = 0.0;  // |attained budget - budget|
  bool degenerate = false;      // objective does not depend on this side
};

struct LeastFavorableResult {
  std::vector<double> f0, g0;   // least favorable pair on the conjugate grid
  FilterSolution filter;        // ordinary solution at (f0, g0)
  double delta0 = 0.0;
  int iterations = 0;
  bool converged = false;
  StationaritySide side_f, side_g;
  std::vector<double> phi;      // contamination slack on the f side, else empty
};

inline double quad_mass(const Grids& g, const std::vector<double>& vals) {
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc * g.quad();
}

inline void validate_class(const DensityClass& cls, const std::vector<double>& center,
                           const Grids& g, const char* side) {
  if (const auto* c = std::get_if<L1Ball>(&cls)) {
    if (c->epsilon < 0.0) throw validation_error(std::string(side) + ": epsilon must be >= 0");
  } else if (const auto* c2 = std::get_if<L2Ball>(&cls)) {
    if (c2->epsilon < 0.0) throw validation_error(std::string(side) + ": epsilon must be >= 0");
  } else {
    const auto& c3 = std::get<Contamination>(cls);
    if (c3.epsilon < 0.0 || c3.epsilon >= 1.0)
      throw validation_error(std::string(side) + ": contamination rate must lie in [0, 1)");
    const double base = (1.0 - c3.epsilon) * quad_mass(g, center);
    if (c3.power_cap < base - 1e-12 * (1.0 + base))
      throw validation_error(std::string(side) +
                             ": power cap below the power of the retained nominal part");
  }
}

namespace detail {

struct SideUpdate {
  std::vector<double> d;
  double alpha = 0.0;
  double constraint_gap = 0.0;
  bool degenerate = false;
};

/// Generic multiplier search. value(alpha) is monotone; we return the
/// feasible-side endpoint after geometric growth and 200 bisections.
template <class F>
double bisect_multiplier(F&& value, double target, bool increasing, bool* degenerate) {
  double hi = 1.0;
  int guard = 0;
  if (increasing) {
    while (value(hi) < target && guard++ < 1100) hi *= 2.0;
    if (guard >= 1100) {
      *degenerate = true;
      return 0.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (value(mid) < target ? lo : hi) = mid;
    }
    return lo;  // value(lo) <= target: stays inside the class
  }
  while (value(hi) > target && guard++ < 1100) hi *= 2.0;
  if (guard >= 1100) throw numeric_error("multiplier search diverged");
  double lo = hi;
  while (value(lo) <= target && lo > 1e-300) lo *= 0.5;
  if (lo <= 1e-300) {
    *degenerate = true;
    return hi;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (value(mid) > target ? lo : hi) = mid;
  }
  return hi;  // value(hi) <= target
}

/// L1 side: d = max(d1, numer/alpha - other), budget (1/2pi) int (d - d1) = eps.
inline SideUpdate update_l1(const std::vector<double>& d1, const std::vector<double>& numer,
                            const std::vector<double>& other, double eps, const Grids& g) {
  SideUpdate up;
  auto mass = [&](double alpha) {
    double acc = 0.0;
    for (std::size_t p = 0; p < d1.size(); ++p)
      acc += std::max(0.0, numer[p] / alpha - other[p] - d1[p]);
    return acc * g.quad();
  };
  up.alpha = bisect_multiplier(mass, eps, false, &up.degenerate);
  up.d.resize(d1.size());
  for (std::size_t p = 0; p < d1.size(); ++p)
    up.d[p] = up.degenerate ? d1[p] : std::max(d1[p], numer[p] / up.alpha - other[p]);
  up.constraint_gap = std::abs(quad_mass(g, up.d) - quad_mass(g, d1) - eps);
  if (up.degenerate) up.constraint_gap = eps;
  return up;
}

/// L2 side: alpha (d - d1) (d + other)^2 = numer^2 pointwise,
/// budget (1/2pi) int (d - d1)^2 = eps^2. d is the unique root >= d1 of an
/// increasing cubic; safeguarded Newton from the upper bracket.
inline double l2_root(double numer2, double alpha, double d1, double other) {
  if (numer2 <= 0.0) return d1;
  double lo = d1;
  double hi = d1 + std::cbrt(numer2 / alpha);
  double d = hi;
  for (int it = 0; it < 200; ++it) {
    const double s = d + other;
    const double fval = alpha * (d - d1) * s * s - numer2;
    if (std::abs(fval) <= 1e-15 * (numer2 + alpha * (d - d1) * s * s)) break;
    (fval > 0.0 ? hi : lo) = d;
    const double fp = alpha * (s * s + 2.0 * (d - d1) * s);
    double next = fp > 0.0 ? d - fval / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - d) <= 1e-16 * (1.0 + std::abs(d))) {
      d = next;
      break;
    }
    d = next;
  }
  return d;
}

inline SideUpdate update_l2(const std::vector<double>& d1, const std::vector<double>& numer,
                            const std::vector<double>& other, double eps, const Grids& g) {
  SideUpdate up;
  auto norm2 = [&](double alpha) {
    double acc = 0.0;
    for (std::size_t p = 0; p < d1.size(); ++p) {
      const double d = l2_root(numer[p] * numer[p], alpha, d1[p], other[p]);
      acc += (d - d1[p]) * (d - d1[p]);
    }
    return acc * g.quad();
  };
  up.alpha = bisect_multiplier(norm2, eps * eps, false, &up.degenerate);
  up.d.resize(d1.size());
  double acc = 0.0;
  for (std::size_t p = 0; p < d1.size(); ++p) {
    up.d[p] = up.degenerate ? d1[p]
                            : l2_root(numer[p] * numer[p], up.alpha, d1[p], other[p]);
    acc += (up.d[p] - d1[p]) * (up.d[p] - d1[p]);
  }
  up.constraint_gap = std::abs(std::sqrt(acc * g.quad()) - (up.degenerate ? 0.0 : eps));
  if (up.degenerate) up.constraint_gap = eps;
  return up;
}

/// Contamination side: d = max((1-eps) d1, alpha numer - other) with the total
/// power pinned to the cap.
inline SideUpdate update_contamination(const std::vector<double>& d1,
                                       const std::vector<double>& numer,
                                       const std::vector<double>& other, double eps, double cap,
                                       const Grids& g) {
  SideUpdate up;
  auto power = [&](double alpha) {
    double acc = 0.0;
    for (std::size_t p = 0; p < d1.size(); ++p)
      acc += std::max((1.0 - eps) * d1[p], alpha * numer[p] - other[p]);
    return acc * g.quad();
  };
  up.alpha = bisect_multiplier(power, cap, true, &up.degenerate);
  up.d.resize(d1.size());
  for (std::size_t p = 0; p < d1.size(); ++p)
    up.d[p] = up.degenerate ? d1[p]
                            : std::max((1.0 - eps) * d1[p], up.alpha * numer[p] - other[p]);
  up.constraint_gap = up.degenerate ? 0.0 : std::abs(quad_mass(g, up.d) - cap);
  return up;
}

inline SideUpdate update_side(const DensityClass& cls, const std::vector<double>& d1,
                              const std::vector<double>& numer, const std::vector<double>& other,
                              const Grids& g) {
  if (const auto* c = std::get_if<L1Ball>(&cls)) return update_l1(d1, numer, other, c->epsilon, g);
  if (const auto* c = std::get_if<L2Ball>(&cls)) return update_l2(d1, numer, other, c->epsilon, g);
  const auto& c = std::get<Contamination>(cls);
  return update_contamination(d1, numer, other, c.epsilon, c.power_cap, g);
}

/// Residuals of the per-node optimality relations at (d, alpha), normalised by
/// (d + other)^2 at the node. Active nodes must satisfy the relation exactly;
/// off the active set only the sign condition can fail.
inline StationaritySide side_residuals(const DensityClass& cls, const SideUpdate& up,
                                       const std::vector<double>& d1,
                                       const std::vector<double>& numer,
                                       const std::vector<double>& other,
                                       std::vector<double>* phi_out) {
  StationaritySide s;
  s.alpha = up.alpha;
  s.constraint_gap = up.constraint_gap;
  s.degenerate = up.degenerate;
  if (up.degenerate) return s;

  double kkt = 0.0, alt = 0.0, sign = 0.0;

  const bool is_l1 = std::holds_alternative<L1Ball>(cls);
  const bool is_l2 = std::holds_alternative<L2Ball>(cls);
  const double ret = is_l1 || is_l2 ? 1.0 : 1.0 - std::get<Contamination>(cls).epsilon;

  // fitted multiplier for the as-written relation (diagnostic only)
  double alt_alpha = 0.0;
  if (is_l2 || is_l1) {
    std::vector<double> ratios;
    for (std::size_t p = 0; p < numer.size(); ++p) {
      if (up.d[p] <= d1[p] * (1.0 + 1e-12) + 1e-300) continue;
      const double den = is_l2 ? (up.d[p] + other[p]) * (up.d[p] - d1[p])
                               : (up.d[p] + other[p]);
      if (den > 0.0) ratios.push_back(numer[p] * numer[p] / den);
    }
    if (!ratios.empty()) {
      std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
      alt_alpha = ratios[ratios.size() / 2];
    }
  }

  for (std::size_t p = 0; p < numer.size(); ++p) {
    const double tot = up.d[p] + other[p];
    const double scale = std::max(tot * tot, 1e-300);
    const double base = ret * d1[p];
    const bool active = up.d[p] > base + 1e-12 * (1.0 + base);

    double r = 0.0, a = 0.0;
    if (is_l1) {
      // saddle-consistent: numer = alpha (d + other) on the active set
      const double gap = numer[p] - up.alpha * tot;
      r = active ? std::abs(gap) : std::max(0.0, gap);
      // as written: numer^2 = alpha' (d + other) on the active set
      if (alt_alpha > 0.0) {
        const double gap2 = numer[p] * numer[p] - alt_alpha * tot;
        a = active ? std::abs(gap2) : std::max(0.0, gap2);
      }
      if (!active) {
        const double psi = numer[p] / std::max(up.alpha * tot, 1e-300);
        sign = std::max(sign, psi - 1.0);
      }
    } else if (is_l2) {
      // saddle-consistent: numer^2 = alpha (d - d1) (d + other)^2
      r = std::abs(numer[p] * numer[p] - up.alpha * (up.d[p] - d1[p]) * tot * tot) /
          std::max(tot, 1e-300);
      // as written: numer^2 = alpha' (d - d1) (d + other)
      if (alt_alpha > 0.0)
        a = std::abs(numer[p] * numer[p] - alt_alpha * (up.d[p] - d1[p]) * tot) /
            std::max(tot, 1e-300);
    } else {
      // saddle-consistent: numer = (d + other)/alpha on the active set
      const double gap = numer[p] - tot / up.alpha;
      r = active ? std::abs(gap) : std::max(0.0, gap);
      a = r;  // the as-written relation matches here
      const double phi = numer[p] / tot - 1.0 / up.alpha;
      if (phi_out) (*phi_out)[p] = std::min(0.0, phi);
      if (!active) sign = std::max(sign, phi);
    }
    kkt = std::max(kkt, r / scale);
    alt = std::max(alt, a / scale);
  }
  s.kkt_residual = kkt;
  s.alt_residual = alt;
  s.sign_excess = std::max(0.0, sign);
  return s;
}

}  // namespace detail

/// Squared cross-error densities of a solved filter at the pair it was built
/// for: hf = |A g0 + C|^2/(f0+g0)^2 (multiplies f), hg = |A f0 - C|^2/(f0+g0)^2
/// (multiplies g). The error of that filter against any other admissible pair
/// is the plain bilinear sum below.
struct CrossError {
  std::vector<double> hf, hg;
};

inline CrossError cross_error_densities(const FilterSolution& sol, const std::vector<double>& f0,
                                        const std::vector<double>& g0) {
  CrossError ce;
  const std::size_t m = sol.A.size();
  ce.hf.resize(m);
  ce.hg.resize(m);
  for (std::size_t p = 0; p < m; ++p) {
    const double den = floored_sum(f0[p], g0[p]);
    ce.hf[p] = std::norm(sol.A[p] * g0[p] + sol.C[p]) / (den * den);
    ce.hg[p] = std::norm(sol.A[p] * f0[p] - sol.C[p]) / (den * den);
  }
  return ce;
}

inline double delta_bilinear(const Grids& g, const CrossError& ce, const std::vector<double>& f,
                             const std::vector<double>& gv) {
  double acc = 0.0;
  for (std::size_t p = 0; p < ce.hf.size(); ++p) acc += ce.hf[p] * f[p] + ce.hg[p] * gv[p];
  return acc * g.quad();
}

/// Error of an arbitrary characteristic h against the pair (f, g):
///   (1/2pi) sum W [ |A - h|^2 f + |h|^2 g ].
inline double delta_of_characteristic(const Grids& g, const std::vector<std::complex<double>>& A,
                                      const std::vector<std::complex<double>>& h,
                                      const std::vector<double>& f,
                                      const std::vector<double>& gv) {
  double acc = 0.0;
  for (std::size_t p = 0; p < A.size(); ++p)
    acc += std::norm(A[p] - h[p]) * f[p] + std::norm(h[p]) * gv[p];
  return acc * g.quad();
}

/// Least favorable pair by damped fixed-point iteration on the pointwise
/// optimality relations, with the multipliers re-balanced every sweep so the
/// class budgets stay pinned. Sides with no class stay at the nominal density.
inline LeastFavorableResult solve_least_favorable(const ProcessModel& center,
                                                  const std::optional<DensityClass>& cls_f,
                                                  const std::optional<DensityClass>& cls_g,
                                                  const MinimaxOptions& opt = {}) {
  const Grids& g = center.grids;
  if (!cls_f && !cls_g) throw validation_error("least-favorable solve needs at least one class");
  if (cls_f) validate_class(*cls_f, center.f_vals, g, "class.f");
  if (cls_g) validate_class(*cls_g, center.g_vals, g, "class.g");
  if (cls_g && std::holds_alternative<Contamination>(*cls_g))
    throw validation_error("contamination class on the noise side is not supported");
  if (opt.theta <= 0.0 || opt.theta > 1.0) throw validation_error("theta must lie in (0, 1]");
  if (opt.max_iterations < 1) throw validation_error("max_iterations must be positive");

  const std::vector<double>& f1 = center.f_vals;
  const std::vector<double>& g1 = center.g_vals;
  const std::size_t m = f1.size();

  LeastFavorableResult res;
  res.f0 = f1;
  res.g0 = g1;

  std::vector<double> numer_f(m), numer_g(m);
  auto fill_numerators = [&](const FilterSolution& sol, const std::vector<double>& f0,
                             const std::vector<double>& g0) {
    for (std::size_t p = 0; p < m; ++p) {
      numer_f[p] = std::abs(sol.A[p] * g0[p] + sol.C[p]);
      numer_g[p] = std::abs(sol.A[p] * f0[p] - sol.C[p]);
    }
  };

  detail::SideUpdate up_f, up_g;
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    const ProcessModel model0 = with_density_values(center, res.f0, res.g0);
    const FilterSolution sol = solve_filter(model0);
    fill_numerators(sol, res.f0, res.g0);

    up_f = cls_f ? detail::update_side(*cls_f, f1, numer_f, res.g0, g)
                 : detail::SideUpdate{f1, 0.0, 0.0, true};
    up_g = cls_g ? detail::update_side(*cls_g, g1, numer_g, res.f0, g)
                 : detail::SideUpdate{g1, 0.0, 0.0, true};

    double change = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const double fn = res.f0[p] + opt.theta * (up_f.d[p] - res.f0[p]);
      const double gn = res.g0[p] + opt.theta * (up_g.d[p] - res.g0[p]);
      change = std::max(change, std::abs(fn - res.f0[p]));
      change = std::max(change, std::abs(gn - res.g0[p]));
      res.f0[p] = fn;
      res.g0[p] = gn;
    }
    res.iterations = iter;
    if (change < opt.tol) {
      res.converged = true;
      break;
    }
  }

  // land exactly on the last undamped update so the budgets bind, then
  // re-solve and report multipliers and residuals at the final pair
  {
    const ProcessModel model0 = with_density_values(center, res.f0, res.g0);
    const FilterSolution sol = solve_filter(model0);
    fill_numerators(sol, res.f0, res.g0);
    if (cls_f) {
      up_f = detail::update_side(*cls_f, f1, numer_f, res.g0, g);
      res.f0 = up_f.d;
    }
    if (cls_g) {
      up_g = detail::update_side(*cls_g, g1, numer_g, res.f0, g);
      res.g0 = up_g.d;
    }
  }
  const ProcessModel model_final = with_density_values(center, res.f0, res.g0);
  res.filter = solve_filter(model_final);
  res.delta0 = res.filter.delta;
  fill_numerators(res.filter, res.f0, res.g0);

  if (cls_f) {
    detail::SideUpdate chk = detail::update_side(*cls_f, f1, numer_f, res.g0, g);
    chk.d = res.f0;  // residuals are evaluated at the pair actually reported
    chk.constraint_gap = up_f.constraint_gap;
    if (std::holds_alternative<Contamination>(*cls_f))
      res.phi.assign(m, 0.0);
    res.side_f = detail::side_residuals(*cls_f, chk, f1, numer_f, res.g0,
                                        res.phi.empty() ? nullptr : &res.phi);
  }
  if (cls_g) {
    detail::SideUpdate chk = detail::update_side(*cls_g, g1, numer_g, res.f0, g);
    chk.d = res.g0;
    chk.constraint_gap = up_g.constraint_gap;
    res.side_g = detail::side_residuals(*cls_g, chk, g1, numer_g, res.f0, nullptr);
  }
  return res;
}

inline LeastFavorableResult solve_least_favorable_one_sided(const ProcessModel& center, char side,
                                                            const DensityClass& cls,
                                                            const MinimaxOptions& opt = {}) {
  if (side == 'f') return solve_least_favorable(center, cls, std::nullopt, opt);
  if (side == 'g') return solve_least_favorable(center, std::nullopt, cls, opt);
  throw validation_error("one-sided solve: side must be 'f' or 'g'");
}

/// A smooth random member of the class around `center`, even in lambda and
/// nonnegative, with a budget fraction drawn from `index`.
inline std::vector<double> sample_class_member(const DensityClass& cls,
                                               const std::vector<double>& center, const Grids& g,
                                               std::uint64_t seed, std::uint64_t index) {
  const std::size_t m = center.size();
  std::vector<double> p(m);
  double pmin = 0.0;
  for (std::size_t q = 0; q < m; ++q) {
    const double x = std::abs(g.freq.nodes[q]) / g.freq.band_limit;
    double acc = 0.0;
    for (int j = 0; j < 6; ++j)
      acc += rng::normal(seed, 9000 + index, static_cast<std::uint64_t>(j)) *
             std::cos(pi * j * x);
    p[q] = acc;
    pmin = std::min(pmin, acc);
  }
  for (double& v : p) v -= pmin;  // nonnegative bump
  const double frac = 0.1 + 0.9 * rng::uniform(seed, 9000 + index, 100);

  if (const auto* c = std::get_if<L1Ball>(&cls)) {
    const double mass = quad_mass(g, p);
    const double s = mass > 0.0 ? frac * c->epsilon / mass : 0.0;
    std::vector<double> out(m);
    for (std::size_t q = 0; q < m; ++q) out[q] = center[q] + s * p[q];
    return out;
  }
  if (const auto* c = std::get_if<L2Ball>(&cls)) {
    double n2 = 0.0;
    for (double v : p) n2 += v * v;
    n2 = std::sqrt(n2 * g.quad());
    const double s = n2 > 0.0 ? frac * c->epsilon / n2 : 0.0;
    std::vector<double> out(m);
    for (std::size_t q = 0; q < m; ++q) out[q] = center[q] + s * p[q];
    return out;
  }
  const auto& c = std::get<Contamination>(cls);
  std::vector<double> out(m);
  if (c.epsilon == 0.0) return center;
  const double extra = c.power_cap - (1.0 - c.epsilon) * quad_mass(g, center);
  const double mass = quad_mass(g, p);
  const double s = mass > 0.0 ? frac * extra / mass : 0.0;
  for (std::size_t q = 0; q < m; ++q) out[q] = (1.0 - c.epsilon) * center[q] + s * p[q];
  return out;
}

/// The member of the class that maximises the linear functional
/// (1/2pi) sum W direction * d — the exact best response to a fixed filter.
inline std::vector<double> best_response_member(const DensityClass& cls,
                                                const std::vector<double>& center,
                                                const std::vector<double>& direction,
                                                const Grids& g) {
  const std::size_t m = center.size();
  std::size_t kmax = 0;
  for (std::size_t q = 1; q < m; ++q)
    if (direction[q] > direction[kmax]) kmax = q;
  // frequency -lambda of position p sits at position m-1-p on the odd lattice
  const std::size_t kmirror = m - 1 - kmax;

  if (const auto* c = std::get_if<L1Ball>(&cls)) {
    std::vector<double> out = center;
    const double unit = c->epsilon / g.quad();  // point mass worth epsilon
    if (kmirror == kmax) {
      out[kmax] += unit;
    } else {
      out[kmax] += 0.5 * unit;
      out[kmirror] += 0.5 * unit;
    }
    return out;
  }
  if (const auto* c = std::get_if<L2Ball>(&cls)) {
    double n2 = 0.0;
    for (double v : direction) n2 += v * v;
    n2 = std::sqrt(n2 * g.quad());
    std::vector<double> out = center;
    if (n2 > 0.0)
      for (std::size_t q = 0; q < m; ++q) out[q] += c->epsilon * direction[q] / n2;
    return out;
  }
  const auto& c = std::get<Contamination>(cls);
  std::vector<double> out(m);
  for (std::size_t q = 0; q < m; ++q) out[q] = (1.0 - c.epsilon) * center[q];
  const double extra = c.power_cap - quad_mass(g, out);
  if (extra > 0.0) {
    const double unit = extra / g.quad();
    if (kmirror == kmax) {
      out[kmax] += unit;
    } else {
      out[kmax] += 0.5 * unit;
      out[kmirror] += 0.5 * unit;
    }
  }
  return out;
}

struct SaddleReport {
  double member_excess = 0.0;       // max Delta(h0; f, g) - Delta0 over members
  double characteristic_gap = 0.0;  // max Delta0 - Delta(h', f0, g0) over filters
  int members = 0;
  int characteristics = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Audits the saddle property of a least-favorable result: no class member may
/// push the frozen filter's error above Delta0, and no admissible filter may
/// beat Delta0 against the frozen pair. Members include the exact best
/// responses; filters are random perturbations supported on the observed nodes.
inline SaddleReport verify_saddle_point(const LeastFavorableResult& lf, const ProcessModel& center,
                                        const std::optional<DensityClass>& cls_f,
                                        const std::optional<DensityClass>& cls_g, int samples,
                                        std::uint64_t seed) {
  const Grids& g = center.grids;
  const CrossError ce = cross_error_densities(lf.filter, lf.f0, lf.g0);
  const double delta0 = delta_bilinear(g, ce, lf.f0, lf.g0);

  SaddleReport rep;
  rep.tolerance = 1e-6 * (1.0 + std::abs(delta0));

  // class members: random, plus the exact best responses (joint and per side)
  auto consider = [&](const std::vector<double>& f, const std::vector<double>& gv) {
    rep.member_excess = std::max(rep.member_excess, delta_bilinear(g, ce, f, gv) - delta0);
    ++rep.members;
  };
  const std::vector<double> br_f =
      cls_f ? best_response_member(*cls_f, center.f_vals, ce.hf, g) : lf.f0;
  const std::vector<double> br_g =
      cls_g ? best_response_member(*cls_g, center.g_vals, ce.hg, g) : lf.g0;
  consider(br_f, lf.g0);
  consider(lf.f0, br_g);
  consider(br_f, br_g);
  for (int i = 0; i < samples; ++i) {
    const std::vector<double> fs =
        cls_f ? sample_class_member(*cls_f, center.f_vals, g, seed, static_cast<std::uint64_t>(i))
              : lf.f0;
    const std::vector<double> gs =
        cls_g ? sample_class_member(*cls_g, center.g_vals, g, seed,
                                    static_cast<std::uint64_t>(i) + (1u << 20))
              : lf.g0;
    consider(fs, gs);
  }

  // admissible filters: h' = h0 + scale * transform of real coefficients on
  // the observed nodes, so the support constraint is respected by construction
  const std::vector<std::int64_t> obs = observed_nodes(g);
  double vmax = 0.0;
  for (Eigen::Index j = 0; j < lf.filter.v.size(); ++j)
    vmax = std::max(vmax, std::abs(lf.filter.v(j)));
  for (int i = 0; i < samples; ++i) {
    std::vector<double> r(obs.size());
    for (std::size_t j = 0; j < obs.size(); ++j)
      r[j] = rng::normal(seed, 40000 + static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(j));
    const auto q = forward_transform(g, obs, r, +1);
    const double scale =
        (0.3 * std::max(vmax, 1e-6)) * std::pow(10.0, -(i % 5));
    std::vector<std::complex<double>> h(lf.filter.h);
    for (std::size_t p = 0; p < h.size(); ++p) h[p] += scale * q[p];
    const double d = delta_of_characteristic(g, lf.filter.A, h, lf.f0, lf.g0);
    rep.characteristic_gap = std::max(rep.characteristic_gap, delta0 - d);
    ++rep.characteristics;
  }

  rep.passed = rep.member_excess <= rep.tolerance && rep.characteristic_gap <= rep.tolerance;
  return rep;
}

}  // namespace gapfilter
