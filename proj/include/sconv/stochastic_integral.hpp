#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sconv/integrand.hpp"
#include "sconv/noise.hpp"
#include "sconv/parallel.hpp"
#include "sconv/rng.hpp"

namespace sconv {

/// Dual-valued path on a skeleton of grid points and exact jump times.
struct IntegralPath {
  std::vector<double> times;
  std::vector<Coeffs> values;
  double target_index = 0.0;  // p of the integrand that produced it
};

namespace detail {

inline bool all_zero(const Coeffs& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

inline void check_finite(const Coeffs& v, const char* where) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::runtime_error(std::string(where) + ": non-finite operator output");
}

inline const Coeffs& state_at(const StatePath& sp, std::size_t i, const Coeffs& zero) {
  return (sp.values && i < sp.values->size()) ? (*sp.values)[i] : zero;
}

inline const Coeffs& left_limit_at(const StatePath& sp, std::size_t i, const Coeffs& zero) {
  if (sp.left_limits && i < sp.left_limits->size()) return (*sp.left_limits)[i];
  return state_at(sp, i, zero);
}

}  // namespace detail

/// Strong stochastic integral of R against one noise draw. Wiener and
/// compensator terms are left-endpoint sums over the skeleton cells; jumps
/// enter at their exact times, evaluated at the left-limit state. Compensated
/// atoms carry the drift term -w_i R(r,u_i) u_i dr; raw atoms do not.
inline IntegralPath integrate(const Integrand& ig, const SpectralBasis& basis, const LevySpec& spec,
                              const NoiseIncrements& inc, StatePath state = {}) {
  const std::size_t n = basis.n_modes();
  const Coeffs zero(n, 0.0);

  IntegralPath path;
  path.times = inc.times;
  path.target_index = ig.target_index;
  path.values.reserve(inc.times.size());
  path.values.push_back(zero);

  Coeffs acc(n, 0.0);
  for (std::size_t i = 0; i + 1 < inc.times.size(); ++i) {
    const double s = inc.times[i];
    const double dt = inc.times[i + 1] - inc.times[i];
    const Coeffs& st = detail::state_at(state, i, zero);

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
    if (any)
      for (std::size_t j = 0; j < n; ++j) acc[j] += cell[j];
    for (std::size_t a : inc.jump_atoms[i + 1]) {
      const Coeffs& lim = detail::left_limit_at(state, i + 1, zero);
      const Coeffs ju = ig.op(inc.times[i + 1], static_cast<int>(a), lim, spec.atoms[a].atom);
      for (std::size_t j = 0; j < n; ++j) acc[j] += ju[j];
    }
    detail::check_finite(acc, "integrate");
    path.values.push_back(acc);
  }
  return path;
}

/// Monte-Carlo check of the Ito isometry: lhs is the ensemble mean of
/// p'(terminal integral)^2, rhs the left-endpoint quadrature of the summed
/// Hilbert-Schmidt norms, z their distance in standard errors.
struct IsometryReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double z = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

inline IsometryReport ito_isometry_report(const Integrand& ig, const SpectralBasis& basis,
                                          const LevySpec& spec, const std::vector<double>& grid,
                                          std::size_t paths, std::uint64_t seed,
                                          std::size_t threads = 0) {
  if (paths == 0) throw std::invalid_argument("ito_isometry_report: empty ensemble");
  const std::vector<double> wp = seminorm_weights(basis, -ig.target_index);
  std::vector<double> sq(paths);
  parallel_for(paths, threads, [&](std::size_t i) {
    const NoiseIncrements inc = sample_levy(spec, basis, grid, derive_seed(seed, i));
    const IntegralPath path = integrate(ig, basis, spec, inc);
    sq[i] = seminorm_sq(wp, path.values.back());
  });
  double mean = 0.0;
  for (double v : sq) mean += v;
  mean /= static_cast<double>(paths);
  double var = 0.0;
  for (double v : sq) var += (v - mean) * (v - mean);
  var /= static_cast<double>(paths > 1 ? paths - 1 : 1);

  IsometryReport rep;
  rep.paths = paths;
  rep.lhs = mean;
  rep.rhs = isometry_rhs(ig, spec, basis, grid);
  rep.std_error = std::sqrt(var / static_cast<double>(paths));
  rep.z = rep.std_error > 0.0 ? (rep.lhs - rep.rhs) / rep.std_error : (rep.lhs == rep.rhs ? 0.0 : INFINITY);
  return rep;
}

}  // namespace sconv
