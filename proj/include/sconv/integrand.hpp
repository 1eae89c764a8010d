#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sconv/hermite_space.hpp"
#include "sconv/noise.hpp"

namespace sconv {

/// Left-limit state supplied to state-dependent integrands. `values` are the
/// cadlag path values on the skeleton; `left_limits` the pre-jump values.
/// Both null means the zero state.
struct StatePath {
  const std::vector<Coeffs>* values = nullptr;
  const std::vector<Coeffs>* left_limits = nullptr;
};

/// Predictable operator-valued integrand (r, u) -> R(r,u) acting on dual
/// coefficient vectors, carrying its target seminorm index p. State-dependent
/// integrands receive the left-limit path state; the integrator never hands
/// out state at or after the evaluation time.
struct Integrand {
  std::function<Coeffs(double r, int u, const Coeffs& state, const Coeffs& in)> op;
  double target_index = 0.0;  // p
};

inline Integrand zero_integrand(std::size_t n, double p = 0.0) {
  return {[n](double, int, const Coeffs&, const Coeffs&) { return Coeffs(n, 0.0); }, p};
}

inline Integrand identity_integrand(double p = 0.0) {
  return {[](double, int, const Coeffs&, const Coeffs& in) { return in; }, p};
}

/// R(r) = f(r) * I, deterministic scalar multiplier.
inline Integrand scalar_integrand(std::function<double(double)> f, double p = 0.0) {
  return {[f = std::move(f)](double r, int, const Coeffs&, const Coeffs& in) {
            Coeffs out = in;
            const double c = f(r);
            for (double& x : out) x *= c;
            return out;
          },
          p};
}

inline Integrand diagonal_integrand(Coeffs diag, double p = 0.0) {
  return {[d = std::move(diag)](double, int, const Coeffs&, const Coeffs& in) {
            Coeffs out(in.size());
            for (std::size_t j = 0; j < in.size(); ++j) out[j] = d[j] * in[j];
            return out;
          },
          p};
}

inline Integrand scaled_integrand(Integrand base, double a) {
  return {[op = std::move(base.op), a](double r, int u, const Coeffs& s, const Coeffs& in) {
            Coeffs out = op(r, u, s, in);
            for (double& x : out) x *= a;
            return out;
          },
          base.target_index};
}

inline Integrand sum_integrand(Integrand lhs, Integrand rhs) {
  if (lhs.target_index != rhs.target_index)
    throw std::invalid_argument("sum_integrand: mismatched target seminorms");
  return {[l = std::move(lhs.op), r = std::move(rhs.op)](double t, int u, const Coeffs& s,
                                                         const Coeffs& in) {
            Coeffs a = l(t, u, s, in);
            const Coeffs b = r(t, u, s, in);
            for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
            return a;
          },
          lhs.target_index};
}

/// Squared Hilbert-Schmidt norm of R(r,u) from the q_{r,u}-dual Hilbert space
/// into the p-dual: sum_j q_j(r) |R e_j|_{-p}^2 at the Wiener coordinate
/// (whose dual space has orthonormal basis sqrt(q_j) e_j), and |R u|_{-p}^2 at
/// a jump atom (whose dual space is spanned by u with unit norm).
inline double hs_norm_sq(const Integrand& ig, const LevySpec& spec, const SpectralBasis& basis,
                         double r, int u, const Coeffs* state = nullptr) {
  const std::size_t n = basis.n_modes();
  const Coeffs zero(n, 0.0);
  const Coeffs& st = state ? *state : zero;
  const std::vector<double> wp = seminorm_weights(basis, -ig.target_index);
  if (u == wiener_coordinate) {
    const auto& q = spec.wiener.row_at(r);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (q[j] == 0.0) continue;
      s += q[j] * seminorm_sq(wp, ig.op(r, wiener_coordinate, st, basis_vector(n, j)));
    }
    return s;
  }
  if (u < 0 || static_cast<std::size_t>(u) >= spec.atoms.size())
    throw std::invalid_argument("hs_norm_sq: coordinate is not an atom of the spec");
  return seminorm_sq(wp, ig.op(r, u, st, spec.atoms[static_cast<std::size_t>(u)].atom));
}

/// int_U q_{r,u}(F(r,u,g)' psi)^2 mu(du) over the martingale coordinates,
/// evaluated through the forward action: (F' psi)_j = <F e_j, psi>.
inline double martingale_qform(const Integrand& ig, const LevySpec& spec,
                               const SpectralBasis& basis, double r, const Coeffs& g,
                               const Coeffs& psi) {
  const std::size_t n = basis.n_modes();
  double s = 0.0;
  const auto& q = spec.wiener.row_at(r);
  for (std::size_t j = 0; j < n; ++j) {
    if (q[j] == 0.0) continue;
    const double t = pairing(ig.op(r, wiener_coordinate, g, basis_vector(n, j)), psi);
    s += q[j] * t * t;
  }
  for (std::size_t a = 0; a < spec.atoms.size(); ++a) {
    if (!spec.compensated(a, basis)) continue;
    const double t = pairing(ig.op(r, static_cast<int>(a), g, spec.atoms[a].atom), psi);
    s += spec.atoms[a].weight * t * t;
  }
  return s;
}

/// Left-endpoint quadrature of the Ito-isometry right-hand side over the
/// martingale coordinates: Wiener plus the compensated atoms weighted by
/// their intensities. Raw (uncompensated) atoms are not part of the
/// martingale and do not enter.
inline double isometry_rhs(const Integrand& ig, const LevySpec& spec, const SpectralBasis& basis,
                           const std::vector<double>& grid, const Coeffs* state = nullptr) {
  detail::check_grid(grid);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double r = grid[i];
    const double dt = grid[i + 1] - grid[i];
    double cell = hs_norm_sq(ig, spec, basis, r, wiener_coordinate, state);
    for (std::size_t a = 0; a < spec.atoms.size(); ++a)
      if (spec.compensated(a, basis))
        cell += spec.atoms[a].weight * hs_norm_sq(ig, spec, basis, r, static_cast<int>(a), state);
    s += dt * cell;
  }
  return s;
}

}  // namespace sconv
