#include <doctest.h>

#include <cmath>
#include <string>

#include "sconv/noise.hpp"
#include "sconv/rng.hpp"

using namespace sconv;

namespace {

LevySpec one_mode_wiener() {
  return LevySpec::pure_wiener(WienerSpec::constant({1.0}));
}

}  // namespace

TEST_CASE("WienerSpec validation") {
  CHECK_THROWS_AS(WienerSpec::constant({-1.0}), std::invalid_argument);
  WienerSpec w;
  w.breakpoints = {0.0, 1.0};
  w.q_rows = {{1.0}};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w.q_rows = {{1.0}, {2.0}};
  CHECK_NOTHROW(w.validate());
  w.breakpoints = {0.5, 1.0};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("piecewise covariance lookup and integration") {
  WienerSpec w;
  w.breakpoints = {0.0, 1.0, 2.0};
  w.q_rows = {{1.0}, {3.0}, {0.5}};
  w.validate();
  CHECK(w.row_at(0.5)[0] == 1.0);
  CHECK(w.row_at(1.0)[0] == 3.0);
  CHECK(w.row_at(10.0)[0] == 0.5);
  CHECK(w.integrate_mode(0, 0.0, 2.5) == doctest::Approx(1.0 + 3.0 + 0.25).epsilon(1e-15));
  CHECK(w.integrate_mode(0, 0.5, 1.5) == doctest::Approx(0.5 + 1.5).epsilon(1e-15));
}

TEST_CASE("uniform_grid") {
  const auto g = uniform_grid(1.0, 4);
  CHECK(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == 0.5);
  CHECK_THROWS_AS(uniform_grid(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(uniform_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("bad grids are rejected") {
  const SpectralBasis basis = SpectralBasis::standard(1);
  const LevySpec spec = one_mode_wiener();
  CHECK_THROWS_AS(sample_levy(spec, basis, {0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_levy(spec, basis, {0.1, 1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_levy(spec, basis, {0.0, 0.5, 0.5}, 1), std::invalid_argument);
}

TEST_CASE("LevySpec validation messages") {
  const SpectralBasis basis = SpectralBasis::standard(2);
  LevySpec spec = LevySpec::pure_wiener(WienerSpec::constant({1.0, 1.0}));
  spec.atoms.push_back({1.0, {0.0, 0.0}});
  try {
    spec.validate(basis);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()) == "LevySpec: atom must be a nonzero vector");
  }
  spec.atoms[0] = {0.0, {1.0, 0.0}};
  CHECK_THROWS_AS(spec.validate(basis), std::invalid_argument);
  spec.atoms[0] = {1.0, {1.0}};
  CHECK_THROWS_AS(spec.validate(basis), std::invalid_argument);
}

TEST_CASE("small-jump classification uses the configured dual seminorm") {
  const SpectralBasis basis = SpectralBasis::standard(2);
  LevySpec spec = LevySpec::pure_wiener(WienerSpec::constant({1.0, 1.0}));
  spec.atoms.push_back({1.0, {0.0, 1.5}});
  spec.small_jump_radius = 1.0;
  spec.ball_seminorm_index = 0.0;
  CHECK_FALSE(spec.compensated(0, basis));  // |1.5 e2|_0 = 1.5 > 1
  spec.ball_seminorm_index = 1.0;
  CHECK(spec.compensated(0, basis));  // |1.5 e2|_{-1} = 1.5/2.5 = 0.6 <= 1
}

TEST_CASE("qru seminorm family") {
  const SpectralBasis basis = SpectralBasis::standard(2);
  LevySpec spec = LevySpec::pure_wiener(WienerSpec::constant({4.0, 1.0}));
  spec.atoms.push_back({1.0, {1.0, -2.0}});
  const Coeffs phi{1.0, 1.0};
  CHECK(qru_seminorm(spec, basis, 0.0, wiener_coordinate, phi) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(qru_seminorm(spec, basis, 0.0, 0, phi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(qru_seminorm(spec, basis, 0.0, 5, phi), std::invalid_argument);
}

TEST_CASE("sampling is deterministic in the seed") {
  const SpectralBasis basis = SpectralBasis::standard(1);
  const LevySpec spec = one_mode_wiener();
  const auto grid = uniform_grid(1.0, 16);
  const NoiseIncrements a = sample_levy(spec, basis, grid, 99);
  const NoiseIncrements b = sample_levy(spec, basis, grid, 99);
  const NoiseIncrements c = sample_levy(spec, basis, grid, 100);
  REQUIRE(a.wiener.size() == b.wiener.size());
  bool all_eq = true, any_diff = false;
  for (std::size_t i = 0; i < a.wiener.size(); ++i) {
    if (a.wiener[i][0] != b.wiener[i][0]) all_eq = false;
    if (a.wiener[i][0] != c.wiener[i][0]) any_diff = true;
  }
  CHECK(all_eq);
  CHECK(any_diff);
}

TEST_CASE("atom-free levy sampling equals the wiener sampler bitwise") {
  const SpectralBasis basis = SpectralBasis::standard(3);
  const WienerSpec w = WienerSpec::constant({1.0, 0.5, 0.0});
  const auto grid = uniform_grid(2.0, 32);
  const NoiseIncrements a = sample_wiener(w, basis, grid, 7);
  const NoiseIncrements b = sample_levy(LevySpec::pure_wiener(w), basis, grid, 7);
  REQUIRE(a.times == b.times);
  for (std::size_t i = 0; i < a.wiener.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.wiener[i][j] == b.wiener[i][j]);
  CHECK(a.events.empty());
}

TEST_CASE("terminal wiener variance within the Monte Carlo band") {
  const SpectralBasis basis = SpectralBasis::standard(1);
  const LevySpec spec = one_mode_wiener();
  const auto grid = uniform_grid(1.0, 32);
  const std::size_t paths = 10000;
  double mean = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const NoiseIncrements inc = sample_levy(spec, basis, grid, derive_seed(12345, i));
    double w = 0.0;
    for (const auto& dw : inc.wiener) w += dw[0];
    mean += w * w;
  }
  mean /= static_cast<double>(paths);
  // var of W(1)^2 is 2, so the 3-sigma band is 3*sqrt(2/paths)
  CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(paths)));
}

TEST_CASE("jump skeleton structure and Poisson count") {
  const SpectralBasis basis = SpectralBasis::standard(1);
  LevySpec spec = one_mode_wiener();
  spec.atoms.push_back({2.0, {0.5}});
  const auto grid = uniform_grid(1.0, 8);

  double count_mean = 0.0;
  const std::size_t paths = 10000;
  for (std::size_t i = 0; i < paths; ++i) {
    const NoiseIncrements inc = sample_levy(spec, basis, grid, derive_seed(777, i));
    count_mean += static_cast<double>(inc.events.size());
    if (i < 50) {
      // skeleton contains the grid and is strictly increasing
      for (double g : grid) {
        bool found = false;
        for (double t : inc.times) found = found || t == g;
        CHECK(found);
      }
      for (std::size_t k = 1; k < inc.times.size(); ++k) CHECK(inc.times[k] > inc.times[k - 1]);
      // events agree with the per-index jump table
      std::size_t tagged = 0;
      for (const auto& v : inc.jump_atoms) tagged += v.size();
      CHECK(tagged == inc.events.size());
      for (const auto& e : inc.events) {
        CHECK(e.time > 0.0);
        CHECK(e.time <= 1.0);
      }
    }
  }
  count_mean /= static_cast<double>(paths);
  CHECK(std::abs(count_mean - 2.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(paths)));
}

TEST_CASE("levy components: splits, compensator affinity, martingale start") {
  const SpectralBasis basis = SpectralBasis::standard(2);
  LevySpec spec = LevySpec::pure_wiener(WienerSpec::constant({1.0, 0.0}));
  spec.atoms.push_back({2.0, {0.5, 0.0}});   // compensated: |u| = 0.5
  spec.atoms.push_back({0.5, {0.0, 1.5}});   // raw: |u| = 1.5
  const auto grid = uniform_grid(1.0, 16);
  const NoiseIncrements inc = sample_levy(spec, basis, grid, 321);
  const LevyComponents c = levy_components(spec, basis, inc);

  CHECK(c.comp_rate[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.comp_rate[1] == 0.0);
  const Coeffs m0 = c.martingale_at(0);
  CHECK(m0[0] == 0.0);
  CHECK(m0[1] == 0.0);

  for (std::size_t k = 0; k + 1 < c.times.size(); ++k) {
    if (!inc.jump_atoms[k + 1].empty()) continue;
    // between jumps the cumulative jump parts are constant bitwise
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(c.comp_jump_cum[k + 1][j] == c.comp_jump_cum[k][j]);
      CHECK(c.raw_jump_cum[k + 1][j] == c.raw_jump_cum[k][j]);
    }
  }
  // raw atoms never touch the compensated component and vice versa
  CHECK(c.comp_jump_cum.back()[1] == 0.0);
  CHECK(c.raw_jump_cum.back()[0] == 0.0);
}
