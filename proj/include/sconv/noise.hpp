#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sconv/hermite_space.hpp"
#include "sconv/rng.hpp"

namespace sconv {

/// Coordinate label for the Wiener component of the noise; jump atoms are
/// addressed by their (0-based) index in the LevySpec atom list.
inline constexpr int wiener_coordinate = -1;

/// Diagonal covariance of the Wiener part, piecewise constant in time.
/// Row k applies on [breakpoints[k], breakpoints[k+1]) and the last row
/// extends to infinity.
struct WienerSpec {
  std::vector<double> breakpoints;         // ascending, first entry 0
  std::vector<std::vector<double>> q_rows; // one row per breakpoint

  static WienerSpec constant(std::vector<double> q) {
    WienerSpec w;
    w.breakpoints = {0.0};
    w.q_rows.push_back(std::move(q));
    w.validate();
    return w;
  }

  std::size_t n_modes() const { return q_rows.empty() ? 0 : q_rows.front().size(); }

  void validate() const {
    if (breakpoints.empty() || q_rows.size() != breakpoints.size())
      throw std::invalid_argument("WienerSpec: breakpoints/rows mismatch");
    if (breakpoints.front() != 0.0)
      throw std::invalid_argument("WienerSpec: first breakpoint must be 0");
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      if (!(breakpoints[k] > breakpoints[k - 1]))
        throw std::invalid_argument("WienerSpec: breakpoints must be strictly increasing");
    for (const auto& row : q_rows) {
      if (row.size() != n_modes()) throw std::invalid_argument("WienerSpec: ragged rows");
      for (double q : row)
        if (!std::isfinite(q) || q < 0.0)
          throw std::invalid_argument("WienerSpec: covariance entries must be >= 0 and finite");
    }
  }

  std::size_t segment_at(double r) const {
    std::size_t k = q_rows.size() - 1;
    while (k > 0 && breakpoints[k] > r) --k;
    return k;
  }

  const std::vector<double>& row_at(double r) const { return q_rows[segment_at(r)]; }

  /// Integral of q_j over [a, b].
  double integrate_mode(std::size_t j, double a, double b) const {
    double s = 0.0;
    for (std::size_t k = 0; k < q_rows.size(); ++k) {
      const double lo = std::max(a, breakpoints[k]);
      const double hi = (k + 1 < breakpoints.size()) ? std::min(b, breakpoints[k + 1]) : b;
      if (hi > lo) s += q_rows[k][j] * (hi - lo);
    }
    return s;
  }
};

struct JumpAtom {
  double weight = 0.0;  // Poisson intensity w_i
  Coeffs atom;          // dual coefficient vector u_i, nonzero
};

/// Levy noise through its Levy-Ito decomposition: drift, Wiener part, and a
/// finite atomic jump mixture. Atoms with dual seminorm <= small_jump_radius
/// enter compensated; the rest enter as raw Poisson jumps.
struct LevySpec {
  Coeffs drift;  // may be empty, meaning zero
  WienerSpec wiener;
  std::vector<JumpAtom> atoms;
  double small_jump_radius = 1.0;
  double ball_seminorm_index = 0.0;  // dual norm used is |.|_{-ball_seminorm_index}

  static LevySpec pure_wiener(WienerSpec w) {
    LevySpec s;
    s.wiener = std::move(w);
    return s;
  }

  bool compensated(std::size_t i, const SpectralBasis& basis) const {
    return seminorm(basis, -ball_seminorm_index, atoms[i].atom) <= small_jump_radius;
  }

  void validate(const SpectralBasis& basis) const {
    wiener.validate();
    if (wiener.n_modes() != basis.n_modes())
      throw std::invalid_argument("LevySpec: wiener covariance does not match basis");
    if (!drift.empty() && drift.size() != basis.n_modes())
      throw std::invalid_argument("LevySpec: drift does not match basis");
    if (!(small_jump_radius > 0.0))
      throw std::invalid_argument("LevySpec: small_jump_radius must be > 0");
    for (const auto& a : atoms) {
      if (!(a.weight > 0.0) || !std::isfinite(a.weight))
        throw std::invalid_argument("LevySpec: atom weights must be positive and finite");
      if (a.atom.size() != basis.n_modes())
        throw std::invalid_argument("LevySpec: atom vector does not match basis");
      double nrm = 0.0;
      for (double x : a.atom) {
        if (!std::isfinite(x)) throw std::invalid_argument("LevySpec: atom entries must be finite");
        nrm += x * x;
      }
      if (nrm == 0.0) throw std::invalid_argument("LevySpec: atom must be a nonzero vector");
    }
  }
};

/// q_{r,u} seminorm family of the noise: the Wiener covariance form at u=0
/// (here the Wiener marker), |<u, phi>| at a jump atom u.
inline double qru_seminorm(const LevySpec& spec, const SpectralBasis& basis, double r, int u,
                           const Coeffs& phi) {
  detail::check_dims(basis, phi, "qru_seminorm");
  if (u == wiener_coordinate) {
    const auto& q = spec.wiener.row_at(r);
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) s += q[j] * phi[j] * phi[j];
    return std::sqrt(s);
  }
  if (u < 0 || static_cast<std::size_t>(u) >= spec.atoms.size())
    throw std::invalid_argument("qru_seminorm: coordinate is not an atom of the spec");
  return std::abs(pairing(spec.atoms[static_cast<std::size_t>(u)].atom, phi));
}

struct JumpEvent {
  double time = 0.0;
  std::size_t atom = 0;
};

/// One simulated noise draw on a time skeleton: the scenario grid plus the
/// exact jump times. Wiener increments are per skeleton cell; jump events
/// are recorded at their exact times.
struct NoiseIncrements {
  std::vector<double> times;                       // skeleton, times[0] = 0
  std::vector<Coeffs> wiener;                      // size times.size()-1
  std::vector<std::vector<std::size_t>> jump_atoms; // per time index, atoms jumping at that time
  std::vector<JumpEvent> events;                   // sorted by time
  double horizon = 0.0;
};

namespace detail {
inline void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("noise: grid needs at least two points");
  if (grid.front() != 0.0) throw std::invalid_argument("noise: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("noise: grid must be strictly increasing");
}
}  // namespace detail

inline std::vector<double> uniform_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || steps < 1) throw std::invalid_argument("uniform_grid: bad parameters");
  const double dt = horizon / static_cast<double>(steps);
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) g[i] = static_cast<double>(i) * dt;
  g.back() = horizon;
  return g;
}

/// Samples one draw of the Levy noise on `grid`. Jump times are Poisson per
/// atom with exact (not grid-snapped) times; the returned skeleton is the
/// grid merged with the jump times.
inline NoiseIncrements sample_levy(const LevySpec& spec, const SpectralBasis& basis,
                                   const std::vector<double>& grid, std::uint64_t seed) {
  spec.validate(basis);
  detail::check_grid(grid);
  const double horizon = grid.back();
  const std::size_t n = basis.n_modes();

  NoiseIncrements inc;
  inc.horizon = horizon;

  // Jump times, one independent substream per atom.
  for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
    CounterRng rng(seed, 1000 + i);
    double t = rng.next_exponential(spec.atoms[i].weight);
    while (t <= horizon) {
      inc.events.push_back({t, i});
      t += rng.next_exponential(spec.atoms[i].weight);
    }
  }
  std::sort(inc.events.begin(), inc.events.end(), [](const JumpEvent& a, const JumpEvent& b) {
    return a.time != b.time ? a.time < b.time : a.atom < b.atom;
  });

  // Skeleton = grid union jump times.
  inc.times = grid;
  for (const auto& e : inc.events) inc.times.push_back(e.time);
  std::sort(inc.times.begin(), inc.times.end());
  inc.times.erase(std::unique(inc.times.begin(), inc.times.end()), inc.times.end());

  inc.jump_atoms.assign(inc.times.size(), {});
  for (const auto& e : inc.events) {
    const auto it = std::lower_bound(inc.times.begin(), inc.times.end(), e.time);
    inc.jump_atoms[static_cast<std::size_t>(it - inc.times.begin())].push_back(e.atom);
  }

  // Gaussian increments per skeleton cell, variance = integral of q_j.
  CounterRng rng(seed, 1);
  inc.wiener.resize(inc.times.size() - 1);
  for (std::size_t i = 0; i + 1 < inc.times.size(); ++i) {
    Coeffs dw(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double var = spec.wiener.integrate_mode(j, inc.times[i], inc.times[i + 1]);
      if (var > 0.0) dw[j] = std::sqrt(var) * rng.next_gaussian();
    }
    inc.wiener[i] = std::move(dw);
  }
  return inc;
}

inline NoiseIncrements sample_wiener(const WienerSpec& wspec, const SpectralBasis& basis,
                                     const std::vector<double>& grid, std::uint64_t seed) {
  return sample_levy(LevySpec::pure_wiener(wspec), basis, grid, seed);
}

/// Component decomposition of a Levy noise draw; cumulative values on the
/// skeleton. The compensated-jump component at times[k] is
/// comp_jump_cum[k] - times[k] * comp_rate, exactly affine between jumps.
struct LevyComponents {
  std::vector<double> times;
  std::vector<Coeffs> wiener_cum;
  std::vector<Coeffs> comp_jump_cum;  // sum of compensated atoms jumped so far
  std::vector<Coeffs> raw_jump_cum;   // sum of raw atoms jumped so far
  Coeffs comp_rate;                   // compensator slope: sum over compensated atoms of w_i u_i
  Coeffs drift;

  Coeffs martingale_at(std::size_t k) const {
    Coeffs v = wiener_cum[k];
    for (std::size_t j = 0; j < v.size(); ++j)
      v[j] += comp_jump_cum[k][j] - times[k] * comp_rate[j];
    return v;
  }
};

inline LevyComponents levy_components(const LevySpec& spec, const SpectralBasis& basis,
                                      const NoiseIncrements& inc) {
  const std::size_t n = basis.n_modes();
  LevyComponents c;
  c.times = inc.times;
  c.comp_rate.assign(n, 0.0);
  c.drift = spec.drift.empty() ? Coeffs(n, 0.0) : spec.drift;
  for (std::size_t i = 0; i < spec.atoms.size(); ++i)
    if (spec.compensated(i, basis))
      for (std::size_t j = 0; j < n; ++j)
        c.comp_rate[j] += spec.atoms[i].weight * spec.atoms[i].atom[j];

  Coeffs w(n, 0.0), cj(n, 0.0), rj(n, 0.0);
  c.wiener_cum.push_back(w);
  c.comp_jump_cum.push_back(cj);
  c.raw_jump_cum.push_back(rj);
  for (std::size_t k = 1; k < inc.times.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j) w[j] += inc.wiener[k - 1][j];
    for (std::size_t a : inc.jump_atoms[k]) {
      Coeffs& dst = spec.compensated(a, basis) ? cj : rj;
      for (std::size_t j = 0; j < n; ++j) dst[j] += spec.atoms[a].atom[j];
    }
    c.wiener_cum.push_back(w);
    c.comp_jump_cum.push_back(cj);
    c.raw_jump_cum.push_back(rj);
  }
  return c;
}

}  // namespace sconv
