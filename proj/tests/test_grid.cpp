#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <set>

#include "gapfilter/grid.hpp"

using namespace gapfilter;

namespace {

ObservationGeometry one_gap(double offset, double length) {
  ObservationGeometry geo;
  geo.intervals.push_back({offset, length});
  return geo;
}

}  // namespace

TEST_CASE("conjugate grid matches the lattice period") {
  const Grids g = make_grids(0.25, 2.0, one_gap(0.5, 1.0), 4.0);
  REQUIRE(g.freq.size % 2 == 1);
  REQUIRE(g.freq.size >= 2 * (g.n_pos + 6));
  CHECK(g.freq.band_limit == Catch::Approx(pi / 0.25));
  CHECK(g.freq.step == Catch::Approx(2.0 * pi / (g.freq.size * 0.25)));
  CHECK(g.n_neg == g.freq.size - 1 - g.n_pos);
  // node values are k * dl, symmetric about zero
  const std::size_t m = static_cast<std::size_t>(g.freq.size);
  for (std::size_t p = 0; p < m; ++p)
    CHECK(g.freq.nodes[p] == Catch::Approx(-g.freq.nodes[m - 1 - p]).margin(1e-15));
}

TEST_CASE("trig table gives exact orthogonality sums") {
  const Grids g = make_grids(0.5, 2.0, one_gap(0.5, 0.5), 3.0);
  const std::int64_t m = g.freq.size;
  for (std::int64_t j : {0, 1, 3, static_cast<int>(m)}) {
    double re = 0.0, im = 0.0;
    for (std::int64_t k = -g.freq.half(); k <= g.freq.half(); ++k) {
      re += g.cos_kt(k, j);
      im += g.sin_kt(k, j);
    }
    if (j % m == 0) {
      CHECK(re == Catch::Approx(static_cast<double>(m)));
    } else {
      CHECK(std::abs(re) < 1e-12);
    }
    CHECK(std::abs(im) < 1e-12);
  }
}

TEST_CASE("time nodes are S union [0, horizon] with node 0 observed") {
  const Grids g = make_grids(0.25, 2.0, one_gap(0.5, 1.0), 4.0);
  // S = [-1.5, -0.5] -> lattice -6..-2
  std::set<std::int64_t> expect;
  for (std::int64_t j = -6; j <= -2; ++j) expect.insert(j);
  for (std::int64_t j = 0; j <= 8; ++j) expect.insert(j);
  const std::set<std::int64_t> got(g.time.index.begin(), g.time.index.end());
  CHECK(got == expect);

  // observed nodes and time nodes partition the period (node 0 on both lists
  // is the single overlap, pinned by the solver)
  const auto obs = observed_nodes(g);
  std::set<std::int64_t> all(obs.begin(), obs.end());
  for (std::int64_t j : g.time.index) all.insert(j);
  CHECK(static_cast<std::int64_t>(all.size()) == g.freq.size);
  CHECK(std::count(obs.begin(), obs.end(), 0) == 1);
  for (std::int64_t j = -6; j <= -2; ++j)
    CHECK(std::find(obs.begin(), obs.end(), j) == obs.end());
}

TEST_CASE("transform round trip is exact on the lattice") {
  const Grids g = make_grids(0.25, 1.5, one_gap(0.25, 0.5), 3.0);
  std::vector<std::int64_t> nodes = g.time.index;
  std::vector<double> values(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    values[j] = std::sin(0.7 * static_cast<double>(j)) + 0.2 * static_cast<double>(j % 3);

  for (int sign : {-1, +1}) {
    const auto spec = forward_transform(g, nodes, values, sign);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      // inverse with the opposite phase sign recovers the value itself:
      // the dt of the forward sum cancels against the quadrature constant
      const auto z = inverse_transform_at(g, spec, nodes[j], -sign);
      CHECK(z.real() == Catch::Approx(values[j]).margin(1e-12));
      CHECK(std::abs(z.imag()) < 1e-12);
    }
    // off the support the inverse transform vanishes (-4 is an observed node
    // outside the master set S u [0, L] = {-3..-1, 0..6})
    const auto z0 = inverse_transform_at(g, spec, -4, -sign);
    CHECK(std::abs(z0) < 1e-12);
  }
}

TEST_CASE("Parseval holds on the conjugate pair") {
  const Grids g = make_grids(0.5, 2.0, one_gap(1.0, 1.0), 4.0);
  std::vector<std::int64_t> nodes = g.time.index;
  std::vector<double> values(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) values[j] = 1.0 / (1.0 + static_cast<double>(j));
  const auto spec = forward_transform(g, nodes, values, -1);
  double freq_energy = 0.0;
  for (const auto& z : spec) freq_energy += std::norm(z);
  freq_energy *= g.quad();
  double time_energy = 0.0;
  for (double v : values) time_energy += g.time.step * v * v;
  // (1/2pi) sum W |X|^2 = dt sum x^2 exactly on the lattice
  CHECK(freq_energy == Catch::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("kernel of the flat ratio is a scaled point mass") {
  const Grids g = make_grids(0.5, 2.0, one_gap(0.5, 0.5), 3.0);
  std::vector<double> ratio(static_cast<std::size_t>(g.freq.size), 2.5);
  const auto table = kernel_table(g, ratio, 4);
  CHECK(table[0] == Catch::Approx(2.5 / g.time.step).epsilon(1e-12));
  for (std::size_t s = 1; s < table.size(); ++s) CHECK(std::abs(table[s]) < 1e-10);
}

TEST_CASE("kernel of 1 + cos(lambda dt) splits mass onto the unit lags") {
  const Grids g = make_grids(0.5, 2.0, one_gap(0.5, 0.5), 3.0);
  std::vector<double> ratio(static_cast<std::size_t>(g.freq.size));
  for (std::size_t p = 0; p < ratio.size(); ++p)
    ratio[p] = 1.0 + std::cos(g.freq.nodes[p] * g.time.step);
  const auto table = kernel_table(g, ratio, 3);
  CHECK(table[0] == Catch::Approx(1.0 / g.time.step).epsilon(1e-10));
  CHECK(table[1] == Catch::Approx(0.5 / g.time.step).epsilon(1e-10));
  CHECK(std::abs(table[2]) < 1e-10);
  CHECK(std::abs(table[3]) < 1e-10);
}

TEST_CASE("refine_freq keeps the time lattice and doubles the band sampling") {
  const Grids g = make_grids(0.25, 2.0, one_gap(0.5, 1.0), 4.0);
  const Grids r = refine_freq(g);
  CHECK(r.freq.size % 2 == 1);
  CHECK(r.freq.size >= 2 * g.freq.size - 1);
  CHECK(r.time.step == g.time.step);
  CHECK(r.time.index == g.time.index);
  CHECK(r.freq.band_limit == Catch::Approx(g.freq.band_limit));
}

TEST_CASE("grid construction rejects bad geometry") {
  CHECK_THROWS_AS(make_grids(0.25, 2.0, one_gap(0.3, 0.5), 4.0), validation_error);   // off lattice
  CHECK_THROWS_AS(make_grids(0.25, 0.5, one_gap(0.5, 1.0), 4.0), validation_error);   // horizon < depth
  CHECK_THROWS_AS(make_grids(-0.25, 2.0, one_gap(0.5, 0.5), 4.0), validation_error);  // bad step
  ObservationGeometry overlapping;
  overlapping.intervals.push_back({0.5, 1.0});
  overlapping.intervals.push_back({1.0, 1.0});
  CHECK_THROWS_AS(make_grids(0.25, 3.0, overlapping, 4.0), validation_error);
}

TEST_CASE("off-lattice nodes are rejected with context") {
  CHECK_THROWS_AS(lattice_index(0.3, 0.25, "probe"), validation_error);
  CHECK(lattice_index(0.75, 0.25, "probe") == 3);
  CHECK(lattice_index(-1.25, 0.25, "probe") == -5);
  // binary-inexact steps still resolve exactly through the relative tolerance
  CHECK(lattice_index(0.3, 0.1, "probe") == 3);
  CHECK(lattice_index(0.7, 0.1, "probe") == 7);
}
