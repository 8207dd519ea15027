#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gapfilter/minimax.hpp"

using namespace gapfilter;

namespace {

ObservationGeometry one_gap(double offset, double length) {
  ObservationGeometry geo;
  geo.intervals.push_back({offset, length});
  return geo;
}

ProcessModel small_model() {
  const Grids g = make_grids(0.5, 2.0, one_gap(0.5, 1.0), 4.0);
  WeightFunction w;
  w.family = WeightFunction::Family::box;
  w.lo = 0.0;
  w.hi = 1.5;
  return make_process_model(g, w, Lorentzian{1.0, 1.0}, ConstantBand{0.5});
}

double linf_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    num = std::max(num, std::abs(a[p] - b[p]));
    den = std::max(den, std::abs(b[p]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("zero budgets reproduce the ordinary filter") {
  const ProcessModel m = small_model();
  const FilterSolution plain = solve_filter(m);
  const LeastFavorableResult lf =
      solve_least_favorable(m, DensityClass{L1Ball{0.0}}, DensityClass{L2Ball{0.0}});
  CHECK(lf.converged);
  CHECK(linf_rel(lf.f0, m.f_vals) <= 1e-12);
  CHECK(linf_rel(lf.g0, m.g_vals) <= 1e-12);
  CHECK(std::abs(lf.delta0 - plain.delta) <= 1e-12 * (1.0 + plain.delta));
}

TEST_CASE("sampled class members respect their budgets") {
  const ProcessModel m = small_model();
  const Grids& g = m.grids;

  const DensityClass l1{L1Ball{0.2}};
  const DensityClass l2{L2Ball{0.15}};
  const double cap = 1.25 * quad_mass(g, m.f_vals);
  const DensityClass cont{Contamination{0.3, cap}};

  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto a = sample_class_member(l1, m.f_vals, g, 77, i);
    std::vector<double> bump(a.size());
    for (std::size_t p = 0; p < a.size(); ++p) {
      bump[p] = a[p] - m.f_vals[p];
      CHECK(bump[p] >= -1e-14);
    }
    CHECK(quad_mass(g, bump) <= 0.2 + 1e-10);

    const auto b = sample_class_member(l2, m.f_vals, g, 78, i);
    double n2 = 0.0;
    for (std::size_t p = 0; p < b.size(); ++p)
      n2 += (b[p] - m.f_vals[p]) * (b[p] - m.f_vals[p]);
    CHECK(std::sqrt(n2 * g.quad()) <= 0.15 + 1e-10);

    const auto c = sample_class_member(cont, m.f_vals, g, 79, i);
    for (std::size_t p = 0; p < c.size(); ++p)
      CHECK(c[p] >= (1.0 - 0.3) * m.f_vals[p] - 1e-14);
    CHECK(quad_mass(g, c) <= cap + 1e-9 * cap);
  }
}

TEST_CASE("least favorable pairs converge with pinned budgets") {
  const ProcessModel m = small_model();
  struct Case {
    DensityClass cf, cg;
    double budget_f, budget_g;
  };
  const double cap = 1.0;
  const std::vector<Case> cases = {
      {L1Ball{0.15}, L2Ball{0.10}, 0.15, 0.10},
      {L2Ball{0.12}, L2Ball{0.08}, 0.12, 0.08},
      {Contamination{0.2, cap}, L1Ball{0.10}, cap, 0.10},
  };
  const FilterSolution nominal = solve_filter(m);

  for (const Case& cs : cases) {
    const LeastFavorableResult lf = solve_least_favorable(m, cs.cf, cs.cg);
    REQUIRE(lf.converged);
    CHECK(lf.iterations <= 500);
    CHECK(lf.delta0 >= nominal.delta - 1e-12);
    CHECK(lf.side_f.kkt_residual <= 1e-6 * (1.0 + lf.side_f.alpha));
    CHECK(lf.side_g.kkt_residual <= 1e-6 * (1.0 + lf.side_g.alpha));
    CHECK(lf.side_f.constraint_gap <= 1e-8 * (1.0 + cs.budget_f));
    CHECK(lf.side_g.constraint_gap <= 1e-8 * (1.0 + cs.budget_g));
    const auto sign_tol = [](const StationaritySide& s) {
      return 1e-6 * (1.0 + 1.0 / std::max(s.alpha, 1e-12));
    };
    CHECK(lf.side_f.sign_excess <= sign_tol(lf.side_f));
    CHECK(lf.side_g.sign_excess <= sign_tol(lf.side_g));

    // the reported value is the bilinear error of the frozen filter at the pair
    const CrossError ce = cross_error_densities(lf.filter, lf.f0, lf.g0);
    CHECK(std::abs(delta_bilinear(m.grids, ce, lf.f0, lf.g0) - lf.delta0) <=
          1e-12 * (1.0 + lf.delta0));
    CHECK(std::abs(delta_of_characteristic(m.grids, lf.filter.A, lf.filter.h, lf.f0, lf.g0) -
                   lf.delta0) <= 1e-10 * (1.0 + lf.delta0));

    const SaddleReport rep = verify_saddle_point(lf, m, cs.cf, cs.cg, 50, 404);
    CHECK(rep.passed);
    CHECK(rep.member_excess <= rep.tolerance);
    CHECK(rep.characteristic_gap <= rep.tolerance);
  }
}

TEST_CASE("no class member admits a better ordinary filter than delta0") {
  const ProcessModel m = small_model();
  const DensityClass cf{L1Ball{0.15}};
  const DensityClass cg{L2Ball{0.10}};
  const LeastFavorableResult lf = solve_least_favorable(m, cf, cg);
  REQUIRE(lf.converged);
  for (std::uint64_t i = 0; i < 8; ++i) {
    const auto fs = sample_class_member(cf, m.f_vals, m.grids, 2024, i);
    const auto gs = sample_class_member(cg, m.g_vals, m.grids, 2025, i);
    const FilterSolution at_member = solve_filter(with_density_values(m, fs, gs));
    CHECK(at_member.delta <= lf.delta0 + 1e-8 * (1.0 + lf.delta0));
  }
  // the pair itself attains the value
  const FilterSolution at_pair = solve_filter(with_density_values(m, lf.f0, lf.g0));
  CHECK(at_pair.delta == Catch::Approx(lf.delta0).epsilon(1e-10));
}

TEST_CASE("one-sided solves match two-sided with the other budget at zero") {
  const ProcessModel m = small_model();
  const DensityClass cf{L1Ball{0.15}};
  const LeastFavorableResult one = solve_least_favorable_one_sided(m, 'f', cf);
  const LeastFavorableResult two = solve_least_favorable(m, cf, DensityClass{L2Ball{0.0}});
  REQUIRE(one.converged);
  REQUIRE(two.converged);
  CHECK(linf_rel(one.f0, two.f0) <= 1e-9);
  CHECK(linf_rel(one.g0, m.g_vals) <= 1e-12);
  CHECK(std::abs(one.delta0 - two.delta0) <= 1e-9 * (1.0 + two.delta0));

  const LeastFavorableResult gside =
      solve_least_favorable_one_sided(m, 'g', DensityClass{L2Ball{0.08}});
  CHECK(gside.converged);
  CHECK(linf_rel(gside.f0, m.f_vals) <= 1e-12);
  CHECK(gside.delta0 >= solve_filter(m).delta - 1e-12);
}

TEST_CASE("a non-saddle pair fails the audit") {
  const ProcessModel m = small_model();
  const DensityClass cf{L1Ball{0.15}};
  const DensityClass cg{L2Ball{0.10}};
  const LeastFavorableResult lf = solve_least_favorable(m, cf, cg);
  REQUIRE(lf.converged);

  // a legal member that parks the whole budget at the highest frequencies is
  // not least favorable; the audit must expose the frozen filter built on it
  LeastFavorableResult bad = lf;
  bad.f0 = m.f_vals;
  const std::size_t mm = bad.f0.size();
  const double spike = 0.15 / (2.0 * m.grids.quad());
  bad.f0[0] += spike;       // most negative harmonic
  bad.f0[mm - 1] += spike;  // its mirror, the most positive one
  bad.g0 = m.g_vals;
  bad.filter = solve_filter(with_density_values(m, bad.f0, bad.g0));
  bad.delta0 = bad.filter.delta;
  const SaddleReport rep = verify_saddle_point(bad, m, cf, cg, 50, 505);
  CHECK_FALSE(rep.passed);
  CHECK(rep.member_excess > rep.tolerance);
}

TEST_CASE("invalid minimax inputs are rejected") {
  const ProcessModel m = small_model();
  CHECK_THROWS_AS(
      solve_least_favorable(m, std::nullopt, DensityClass{Contamination{0.2, 10.0}}),
      validation_error);
  CHECK_THROWS_AS(solve_least_favorable_one_sided(m, 'x', DensityClass{L1Ball{0.1}}),
                  validation_error);
  MinimaxOptions opt;
  opt.theta = 0.0;
  CHECK_THROWS_AS(solve_least_favorable(m, DensityClass{L1Ball{0.1}}, std::nullopt, opt),
                  validation_error);
  // cap below the retained nominal power is impossible
  CHECK_THROWS_AS(
      solve_least_favorable(m, DensityClass{Contamination{0.1, 1e-6}}, std::nullopt),
      validation_error);
  // contamination rate out of range
  CHECK_THROWS_AS(
      solve_least_favorable(m, DensityClass{Contamination{1.0, 10.0}}, std::nullopt),
      validation_error);
}
