#include <doctest.h>

#include <cmath>

#include "sconv/convolution.hpp"

using namespace sconv;

namespace {

LevySpec unit_wiener(std::size_t n) {
  return LevySpec::pure_wiener(WienerSpec::constant(std::vector<double>(n, 1.0)));
}

}  // namespace

TEST_CASE("dyadic rounding") {
  const DyadicGrid dg(1.0, 3);  // step 1/8
  CHECK(dg.round_down(0.0) == 0.0);
  CHECK(dg.round_down(0.3) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(dg.round_down(0.125) == 0.125);  // grid points map to themselves
  CHECK(dg.round_down(1.0) == 1.0);
  // rounding never exceeds the input and levels nest
  const DyadicGrid fine(1.0, 6);
  for (double r : {0.01, 0.2, 1.0 / 3.0, 0.5, 0.77, 0.999}) {
    CHECK(dg.round_down(r) <= r);
    CHECK(fine.round_down(r) >= dg.round_down(r));
  }
  CHECK_THROWS_AS(DyadicGrid(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(DyadicGrid(1.0, -1), std::invalid_argument);
}

TEST_CASE("zero integrand convolves to the zero path") {
  const SpectralSemigroup sg(SpectralBasis::standard(2));
  const LevySpec spec = unit_wiener(2);
  const NoiseIncrements inc = sample_levy(spec, sg.basis(), uniform_grid(1.0, 16), 1);
  const ConvolutionPath p = convolve_exact(sg, zero_integrand(2), spec, inc);
  for (const auto& v : p.values)
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("flat spectrum makes convolution the plain integral, bitwise") {
  const SpectralBasis basis({0.0, 0.0});
  const SpectralSemigroup sg(basis);
  LevySpec spec = unit_wiener(2);
  spec.atoms.push_back({1.5, {0.5, 0.2}});
  const NoiseIncrements inc = sample_levy(spec, basis, uniform_grid(1.0, 32), 11);
  const ConvolutionPath conv = convolve_exact(sg, identity_integrand(), spec, inc);
  const IntegralPath intg = integrate(identity_integrand(), basis, spec, inc);
  REQUIRE(conv.values.size() == intg.values.size());
  for (std::size_t k = 0; k < conv.values.size(); ++k)
    for (std::size_t j = 0; j < 2; ++j) CHECK(conv.values[k][j] == intg.values[k][j]);
}

TEST_CASE("hand-built noise draw reproduces the multiplier sum") {
  const SpectralSemigroup sg(SpectralBasis::standard(1));  // lambda = 1/2
  const LevySpec spec = unit_wiener(1);
  NoiseIncrements inc;
  inc.times = {0.0, 0.5, 1.0};
  inc.wiener = {{1.0}, {1.0}};
  inc.jump_atoms.assign(3, {});
  inc.horizon = 1.0;
  const ConvolutionPath p = convolve_exact(sg, identity_integrand(), spec, inc);
  CHECK(p.values[1][0] == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));
  CHECK(p.values[2][0] ==
        doctest::Approx(std::exp(-0.5) + std::exp(-0.25)).epsilon(1e-14));
}

TEST_CASE("dyadic level matching the grid is bit-exact") {
  const SpectralSemigroup sg(SpectralBasis::standard(3));
  const LevySpec spec = unit_wiener(3);
  const NoiseIncrements inc = sample_levy(spec, sg.basis(), uniform_grid(1.0, 256), 13);
  const ConvolutionPath exact = convolve_exact(sg, identity_integrand(), spec, inc);
  const ConvolutionPath y8 = convolve_dyadic(sg, identity_integrand(), spec, inc, DyadicGrid(1.0, 8));
  for (std::size_t k = 0; k < exact.values.size(); ++k)
    for (std::size_t j = 0; j < 3; ++j) CHECK(y8.values[k][j] == exact.values[k][j]);
}

TEST_CASE("level zero equals the semigroup applied to the plain integral") {
  const SpectralSemigroup sg(SpectralBasis::standard(2));
  const LevySpec spec = unit_wiener(2);
  const NoiseIncrements inc = sample_levy(spec, sg.basis(), uniform_grid(1.0, 64), 19);
  const ConvolutionPath y0 = convolve_dyadic(sg, identity_integrand(), spec, inc, DyadicGrid(1.0, 0));
  const IntegralPath intg = integrate(identity_integrand(), sg.basis(), spec, inc);
  for (std::size_t k = 0; k < y0.values.size(); ++k) {
    const Coeffs want = sg.apply(inc.times[k], intg.values[k]);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(std::abs(y0.values[k][j] - want[j]) <= 1e-12 * (std::abs(want[j]) + 1.0));
  }
}

TEST_CASE("sup distance to the exact scheme is nonincreasing in the level") {
  const SpectralSemigroup sg(SpectralBasis::standard(4));
  const LevySpec spec = unit_wiener(4);
  const NoiseIncrements inc = sample_levy(spec, sg.basis(), uniform_grid(1.0, 256), 4242);
  const ConvolutionPath exact = convolve_exact(sg, identity_integrand(), spec, inc);
  double prev = INFINITY;
  for (int k = 2; k <= 8; ++k) {
    const ConvolutionPath yk =
        convolve_dyadic(sg, identity_integrand(), spec, inc, DyadicGrid(1.0, k));
    const double d = sup_seminorm_distance(yk, exact, sg.basis(), 0.0);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
  CHECK(prev == 0.0);  // level 8 coincides on the 256-cell grid
}

TEST_CASE("OU terminal second moment from the exact scheme") {
  const SpectralSemigroup sg(SpectralBasis::standard(1));  // lambda = 1/2
  const LevySpec spec = unit_wiener(1);
  const auto grid = uniform_grid(1.0, 128);
  const std::size_t paths = 20000;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const NoiseIncrements inc = sample_levy(spec, sg.basis(), grid, derive_seed(31337, i));
    const ConvolutionPath p = convolve_exact(sg, identity_integrand(), spec, inc);
    const double v = p.values.back()[0] * p.values.back()[0];
    mean += v;
    m2 += v * v;
  }
  mean /= static_cast<double>(paths);
  m2 /= static_cast<double>(paths);
  const double target = 1.0 - std::exp(-1.0);
  const double se = std::sqrt((m2 - mean * mean) / static_cast<double>(paths));
  // allow the O(dt) quadrature bias of the left-endpoint scheme
  CHECK(std::abs(mean - target) < 3.0 * se + 2.0 / 128.0);
}

TEST_CASE("kotelenez report edge cases") {
  const SpectralSemigroup sg(SpectralBasis::standard(1));
  const LevySpec spec = unit_wiener(1);
  const auto grid = uniform_grid(1.0, 32);
  CHECK_THROWS_AS(kotelenez_report(sg, identity_integrand(), spec, grid, 0.0, 10, 1),
                  std::invalid_argument);
  const KotelenezReport huge = kotelenez_report(sg, identity_integrand(), spec, grid, 1e6, 200, 1);
  CHECK(huge.tail_prob == 0.0);
  CHECK(huge.bound > 0.0);
  const KotelenezReport zero = kotelenez_report(sg, zero_integrand(1), spec, grid, 1.0, 200, 1);
  CHECK(zero.tail_prob == 0.0);
  CHECK(zero.bound == 0.0);
}

TEST_CASE("kotelenez inequality on a small OU ensemble") {
  const SpectralSemigroup sg(SpectralBasis::standard(1));
  const LevySpec spec = unit_wiener(1);
  const auto grid = uniform_grid(1.0, 64);
  for (double C : {0.5, 1.0, 2.0}) {
    const KotelenezReport rep = kotelenez_report(sg, identity_integrand(), spec, grid, C, 2000, 99);
    CHECK(rep.tail_prob <= rep.bound + 3.0 * rep.binom_se);
  }
}

TEST_CASE("dyadic cauchy diagnostics") {
  const SpectralSemigroup sg(SpectralBasis::standard(4));
  const LevySpec spec = unit_wiener(4);
  const auto grid = uniform_grid(1.0, 256);
  CHECK_THROWS_AS(dyadic_cauchy_report(sg, identity_integrand(), spec, grid, 4, 2, 1.0, 10, 1),
                  std::invalid_argument);

  const DyadicCauchyReport same =
      dyadic_cauchy_report(sg, identity_integrand(), spec, grid, 5, 5, 1.0, 50, 1);
  CHECK(same.mean_sq_sup == 0.0);

  const std::uint64_t seed = 5150;
  const DyadicCauchyReport wide =
      dyadic_cauchy_report(sg, identity_integrand(), spec, grid, 2, 8, 1.0, 400, seed);
  const DyadicCauchyReport narrow =
      dyadic_cauchy_report(sg, identity_integrand(), spec, grid, 6, 8, 1.0, 400, seed);
  CHECK(narrow.mean_sq_sup < wide.mean_sq_sup);
  CHECK(wide.tail_prob <= wide.bound + 3.0 * wide.binom_se);
  CHECK(narrow.tail_prob <= narrow.bound + 3.0 * narrow.binom_se);
}

TEST_CASE("diffusive modulus shrinks by about sqrt(2) under grid halving") {
  const SpectralSemigroup sg(SpectralBasis::standard(1));
  const LevySpec spec = unit_wiener(1);
  const auto coarse = uniform_grid(1.0, 128);
  const auto fine = uniform_grid(1.0, 256);
  double sum_c = 0.0, sum_f = 0.0;
  const std::size_t seeds = 200;
  for (std::size_t i = 0; i < seeds; ++i) {
    for (int which = 0; which < 2; ++which) {
      const auto& grid = which == 0 ? coarse : fine;
      const NoiseIncrements inc = sample_levy(spec, sg.basis(), grid, derive_seed(616, i));
      const ConvolutionPath p = convolve_exact(sg, identity_integrand(), spec, inc);
      double mx = 0.0;
      for (std::size_t k = 1; k < p.values.size(); ++k)
        mx = std::max(mx, std::abs(p.values[k][0] - p.values[k - 1][0]));
      (which == 0 ? sum_c : sum_f) += mx;
    }
  }
  const double ratio = sum_c / sum_f;
  CHECK(ratio > 1.15);
  CHECK(ratio < 1.8);
}
