#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "sconv/integrand.hpp"
#include "sconv/noise.hpp"
#include "sconv/parallel.hpp"
#include "sconv/rng.hpp"
#include "sconv/semigroup.hpp"
#include "sconv/stochastic_integral.hpp"

namespace sconv {

/// Dyadic rounding r -> largest multiple of T/2^k that does not exceed r.
struct DyadicGrid {
  double horizon = 1.0;
  int level = 0;

  DyadicGrid(double horizon_, int level_) : horizon(horizon_), level(level_) {
    if (!(horizon > 0.0) || level < 0 || level > 40)
      throw std::invalid_argument("DyadicGrid: bad horizon or level");
  }

  double round_down(double r) const {
    const double step = horizon / static_cast<double>(std::uint64_t{1} << level);
    double i = std::floor(r / step);
    if ((i + 1.0) * step <= r) i += 1.0;  // guard against floor landing one cell low
    if (i < 0.0) i = 0.0;
    return i * step;
  }
};

using ConvolutionPath = IntegralPath;

namespace detail {

/// Per-path cache of multiplier vectors exp(-e * lambda_j); the exponents a
/// single sweep sees take only a handful of distinct values.
class DecayCache {
 public:
  explicit DecayCache(const SpectralBasis& basis) : basis_(&basis) {}

  const std::vector<double>& get(double exponent) {
    auto it = cache_.find(exponent);
    if (it != cache_.end()) return it->second;
    std::vector<double> m(basis_->n_modes());
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = std::exp(-exponent * basis_->eigenvalue(j));
    return cache_.emplace(exponent, std::move(m)).first->second;
  }

 private:
  const SpectralBasis* basis_;
  std::unordered_map<double, std::vector<double>> cache_;
};

/// Shared sweep for the exact and dyadic convolutions. `round` maps an
/// increment time r to the semigroup time origin used in its multiplier
/// exp(-(t - round(r)) lambda); the identity gives the exact scheme.
template <class RoundFn>
ConvolutionPath convolve_impl(const SpectralSemigroup& sg, const Integrand& ig,
                              const LevySpec& spec, const NoiseIncrements& inc, RoundFn round,
                              StatePath state) {
  const SpectralBasis& basis = sg.basis();
  const std::size_t n = basis.n_modes();
  const Coeffs zero(n, 0.0);
  DecayCache decay(basis);

  ConvolutionPath path;
  path.times = inc.times;
  path.target_index = ig.target_index;
  path.values.reserve(inc.times.size());
  path.values.push_back(zero);

  Coeffs acc(n, 0.0);
  for (std::size_t i = 0; i + 1 < inc.times.size(); ++i) {
    const double s = inc.times[i];
    const double t_next = inc.times[i + 1];
    const double dt = t_next - s;
    const Coeffs& st = detail::state_at(state, i, zero);

    const std::vector<double>& step_decay = decay.get(dt);
    for (std::size_t j = 0; j < n; ++j) acc[j] *= step_decay[j];

    // Cell contributions at left endpoint s enter at t_next with multiplier
    // exp(-(t_next - round(s)) lambda).
    Coeffs cell(n, 0.0);
    bool any = false;
    if (!detail::all_zero(inc.wiener[i])) {
      const Coeffs dw = ig.op(s, wiener_coordinate, st, inc.wiener[i]);
      for (std::size_t j = 0; j < n; ++j) cell[j] += dw[j];
      any = true;
    }
    for (std::size_t a = 0; a < spec.atoms.size(); ++a) {
      if (!spec.compensated(a, basis)) continue;
      const Coeffs ru = ig.op(s, static_cast<int>(a), st, spec.atoms[a].atom);
      const double c = -spec.atoms[a].weight * dt;
      for (std::size_t j = 0; j < n; ++j) cell[j] += c * ru[j];
      any = true;
    }
    if (any) {
      const std::vector<double>& w = decay.get(t_next - round(s));
      for (std::size_t j = 0; j < n; ++j) acc[j] += w[j] * cell[j];
    }

    for (std::size_t a : inc.jump_atoms[i + 1]) {
      const Coeffs& lim = detail::left_limit_at(state, i + 1, zero);
      const Coeffs ju = ig.op(t_next, static_cast<int>(a), lim, spec.atoms[a].atom);
      const std::vector<double>& w = decay.get(t_next - round(t_next));
      for (std::size_t j = 0; j < n; ++j) acc[j] += w[j] * ju[j];
    }
    detail::check_finite(acc, "convolve");
    path.values.push_back(acc);
  }
  return path;
}

}  // namespace detail

/// Stochastic convolution int_0^t S(t-r)' R(r,u) M(dr,du) with the exact
/// per-mode multiplier scheme.
inline ConvolutionPath convolve_exact(const SpectralSemigroup& sg, const Integrand& ig,
                                      const LevySpec& spec, const NoiseIncrements& inc,
                                      StatePath state = {}) {
  return detail::convolve_impl(sg, ig, spec, inc, [](double r) { return r; }, state);
}

/// Dyadic approximation Y^k: multipliers use times rounded down to multiples
/// of T/2^k.
inline ConvolutionPath convolve_dyadic(const SpectralSemigroup& sg, const Integrand& ig,
                                       const LevySpec& spec, const NoiseIncrements& inc,
                                       const DyadicGrid& dg, StatePath state = {}) {
  return detail::convolve_impl(sg, ig, spec, inc, [&dg](double r) { return dg.round_down(r); },
                               state);
}

/// sup over the shared skeleton of |a - b|_{-p}.
inline double sup_seminorm_distance(const ConvolutionPath& a, const ConvolutionPath& b,
                                    const SpectralBasis& basis, double p) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("sup_seminorm_distance: paths have different skeletons");
  const std::vector<double> wp = seminorm_weights(basis, -p);
  double sup = 0.0;
  Coeffs diff(basis.n_modes());
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a.values[k][j] - b.values[k][j];
    sup = std::max(sup, std::sqrt(seminorm_sq(wp, diff)));
  }
  return sup;
}

inline double sup_seminorm(const ConvolutionPath& a, const SpectralBasis& basis, double p) {
  const std::vector<double> wp = seminorm_weights(basis, -p);
  double sup = 0.0;
  for (const auto& v : a.values) sup = std::max(sup, std::sqrt(seminorm_sq(wp, v)));
  return sup;
}

/// Empirical check of the Kotelenez-type maximal inequality: the tail
/// probability of sup_t p'(X_t) > C against e^{2 theta T}/C^2 times the
/// isometry right-hand side.
struct KotelenezReport {
  double tail_prob = 0.0;
  double bound = 0.0;
  double binom_se = 0.0;
  std::size_t paths = 0;
};

inline KotelenezReport kotelenez_report(const SpectralSemigroup& sg, const Integrand& ig,
                                        const LevySpec& spec, const std::vector<double>& grid,
                                        double C, std::size_t paths, std::uint64_t seed,
                                        std::size_t threads = 0) {
  if (!(C > 0.0)) throw std::invalid_argument("kotelenez_report: C must be > 0");
  if (paths == 0) throw std::invalid_argument("kotelenez_report: empty ensemble");
  const SpectralBasis& basis = sg.basis();
  std::vector<char> exceed(paths);
  parallel_for(paths, threads, [&](std::size_t i) {
    const NoiseIncrements inc = sample_levy(spec, basis, grid, derive_seed(seed, i));
    const ConvolutionPath path = convolve_exact(sg, ig, spec, inc);
    exceed[i] = sup_seminorm(path, basis, ig.target_index) > C ? 1 : 0;
  });
  std::size_t hits = 0;
  for (char e : exceed) hits += e;

  KotelenezReport rep;
  rep.paths = paths;
  rep.tail_prob = static_cast<double>(hits) / static_cast<double>(paths);
  rep.bound = std::exp(2.0 * sg.growth_rate() * grid.back()) / (C * C) *
              isometry_rhs(ig, spec, basis, grid);
  rep.binom_se = std::sqrt(rep.tail_prob * (1.0 - rep.tail_prob) / static_cast<double>(paths));
  return rep;
}

/// Cauchy diagnostics between two dyadic levels m > k: per-path sup distance
/// sup_t p'(Y^m - Y^k), its ensemble mean square, and the maximal-inequality
/// bound computed with F^{m,k} = (I - S(r(m)-r(k))) R.
struct DyadicCauchyReport {
  double mean_sq_sup = 0.0;
  double tail_prob = 0.0;
  double bound = 0.0;
  double binom_se = 0.0;
  std::size_t paths = 0;
};

inline DyadicCauchyReport dyadic_cauchy_report(const SpectralSemigroup& sg, const Integrand& ig,
                                               const LevySpec& spec,
                                               const std::vector<double>& grid, int k, int m,
                                               double C, std::size_t paths, std::uint64_t seed,
                                               std::size_t threads = 0) {
  if (m < k) throw std::invalid_argument("dyadic_cauchy_report: levels must nest (m >= k)");
  if (!(C > 0.0)) throw std::invalid_argument("dyadic_cauchy_report: C must be > 0");
  const SpectralBasis& basis = sg.basis();
  const double horizon = grid.back();
  const DyadicGrid coarse(horizon, k), fine(horizon, m);

  std::vector<double> sup_dist(paths);
  parallel_for(paths, threads, [&](std::size_t i) {
    const NoiseIncrements inc = sample_levy(spec, basis, grid, derive_seed(seed, i));
    const ConvolutionPath yk = convolve_dyadic(sg, ig, spec, inc, coarse);
    const ConvolutionPath ym = convolve_dyadic(sg, ig, spec, inc, fine);
    sup_dist[i] = sup_seminorm_distance(ym, yk, basis, ig.target_index);
  });

  DyadicCauchyReport rep;
  rep.paths = paths;
  std::size_t hits = 0;
  for (double d : sup_dist) {
    rep.mean_sq_sup += d * d;
    if (d > C) ++hits;
  }
  rep.mean_sq_sup /= static_cast<double>(paths);
  rep.tail_prob = static_cast<double>(hits) / static_cast<double>(paths);
  rep.binom_se = std::sqrt(rep.tail_prob * (1.0 - rep.tail_prob) / static_cast<double>(paths));

  // Bound quadrature with the level-difference integrand: the output of R is
  // damped coordinate-wise by (1 - exp(-(r(m)-r(k)) lambda_j)).
  const std::vector<double> wp = seminorm_weights(basis, -ig.target_index);
  const std::size_t n = basis.n_modes();
  const Coeffs zero(n, 0.0);
  double quad = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double r = grid[i];
    const double dt = grid[i + 1] - grid[i];
    const double delta = fine.round_down(r) - coarse.round_down(r);
    std::vector<double> damp(n);
    for (std::size_t j = 0; j < n; ++j) damp[j] = 1.0 - std::exp(-delta * basis.eigenvalue(j));
    auto damped_sq = [&](int u, const Coeffs& in) {
      Coeffs out = ig.op(r, u, zero, in);
      for (std::size_t j = 0; j < n; ++j) out[j] *= damp[j];
      return seminorm_sq(wp, out);
    };
    double cell = 0.0;
    const auto& q = spec.wiener.row_at(r);
    for (std::size_t j = 0; j < n; ++j)
      if (q[j] != 0.0) cell += q[j] * damped_sq(wiener_coordinate, basis_vector(n, j));
    for (std::size_t a = 0; a < spec.atoms.size(); ++a)
      if (spec.compensated(a, basis))
        cell += spec.atoms[a].weight * damped_sq(static_cast<int>(a), spec.atoms[a].atom);
    quad += dt * cell;
  }
  rep.bound = std::exp(2.0 * sg.growth_rate() * horizon) / (C * C) * quad;
  return rep;
}

}  // namespace sconv
