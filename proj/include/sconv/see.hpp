#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sconv/convolution.hpp"
#include "sconv/integrand.hpp"
#include "sconv/noise.hpp"
#include "sconv/rng.hpp"
#include "sconv/semigroup.hpp"

namespace sconv {

/// Drift B(r,g), diffusion F(r,u,g) and the growth functions a, b of the
/// admissibility conditions. The diffusion is an Integrand whose state
/// argument carries g.
struct CoefficientSpec {
  std::function<Coeffs(double r, const Coeffs& g)> drift;
  Integrand diffusion;
  std::function<double(const Coeffs& psi, double r)> growth_a;
  std::function<double(const Coeffs& psi, double r)> growth_b;
};

enum class MildScheme { exponential_euler, picard };

struct PicardOptions {
  std::size_t max_iters = 30;
  double tol = 1e-10;
  double rho = 0.0;  // seminorm index used for convergence distances
};

struct SolutionPath {
  std::vector<double> times;
  std::vector<Coeffs> values;       // cadlag values on the skeleton
  std::vector<Coeffs> left_limits;  // pre-jump values; equal to values off jumps
  double rho = 0.0;
  bool blown_up = false;
  bool non_contractive = false;
  std::size_t picard_iterations = 0;
};

namespace detail {

struct MildWork {
  std::vector<Coeffs> value;
  std::vector<Coeffs> left;
};

inline bool finite(const Coeffs& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

/// One sweep of the mild map X(t+dt) = S(dt)'(X(t) + B dt + F dM), jumps
/// applied at exact times from the left-limit state. With frozen == nullptr
/// the coefficients see the path being built (exponential Euler); otherwise
/// they see the frozen previous iterate (Picard body).
inline MildWork mild_sweep(const SpectralSemigroup& sg, const CoefficientSpec& coeff,
                           const Coeffs& z0, const LevySpec& spec, const NoiseIncrements& inc,
                           const MildWork* frozen, bool& blown_up) {
  const SpectralBasis& basis = sg.basis();
  const std::size_t n = basis.n_modes();
  DecayCache decay(basis);
  blown_up = false;

  MildWork out;
  out.value.reserve(inc.times.size());
  out.left.reserve(inc.times.size());
  out.value.push_back(z0);
  out.left.push_back(z0);

  Coeffs x = z0;
  for (std::size_t i = 0; i + 1 < inc.times.size(); ++i) {
    const double s = inc.times[i];
    const double dt = inc.times[i + 1] - inc.times[i];
    const Coeffs& st = frozen ? frozen->value[i] : x;

    Coeffs incr(n, 0.0);
    if (coeff.drift) {
      const Coeffs b = coeff.drift(s, st);
      for (std::size_t j = 0; j < n; ++j) incr[j] += dt * b[j];
    }
    if (coeff.diffusion.op) {
      if (!all_zero(inc.wiener[i])) {
        const Coeffs dw = coeff.diffusion.op(s, wiener_coordinate, st, inc.wiener[i]);
        for (std::size_t j = 0; j < n; ++j) incr[j] += dw[j];
      }
      for (std::size_t a = 0; a < spec.atoms.size(); ++a) {
        if (!spec.compensated(a, basis)) continue;
        const Coeffs ru = coeff.diffusion.op(s, static_cast<int>(a), st, spec.atoms[a].atom);
        const double c = -spec.atoms[a].weight * dt;
        for (std::size_t j = 0; j < n; ++j) incr[j] += c * ru[j];
      }
    }

    const std::vector<double>& m = decay.get(dt);
    Coeffs next(n);
    for (std::size_t j = 0; j < n; ++j) next[j] = m[j] * (x[j] + incr[j]);

    out.left.push_back(next);  // left limit at t_{i+1}, before any jump
    if (coeff.diffusion.op) {
      for (std::size_t a : inc.jump_atoms[i + 1]) {
        const Coeffs& lim = frozen ? frozen->left[i + 1] : out.left.back();
        const Coeffs ju = coeff.diffusion.op(inc.times[i + 1], static_cast<int>(a), lim,
                                             spec.atoms[a].atom);
        for (std::size_t j = 0; j < n; ++j) next[j] += ju[j];
      }
    }
    if (!finite(next)) {
      blown_up = true;
      out.value.push_back(next);
      break;
    }
    out.value.push_back(next);
    x = next;
  }
  return out;
}

inline double sup_value_distance(const std::vector<Coeffs>& a, const std::vector<Coeffs>& b,
                                 const SpectralBasis& basis, double rho) {
  const std::vector<double> wp = seminorm_weights(basis, -rho);
  const std::size_t k = std::min(a.size(), b.size());
  double sup = 0.0;
  Coeffs diff(basis.n_modes());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a[i][j] - b[i][j];
    sup = std::max(sup, std::sqrt(seminorm_sq(wp, diff)));
  }
  return sup;
}

inline SolutionPath picard_solve(const SpectralSemigroup& sg, const CoefficientSpec& coeff,
                                 const Coeffs& z0, const LevySpec& spec,
                                 const NoiseIncrements& inc, const PicardOptions& opt,
                                 const Coeffs& init_guess) {
  MildWork cur;
  cur.value.assign(inc.times.size(), init_guess);
  cur.left.assign(inc.times.size(), init_guess);

  SolutionPath sol;
  sol.times = inc.times;
  sol.rho = opt.rho;

  double prev_dist = std::numeric_limits<double>::infinity();
  bool increased_once = false;
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    bool blown = false;
    MildWork next = mild_sweep(sg, coeff, z0, spec, inc, &cur, blown);
    sol.picard_iterations = it + 1;
    if (blown) {
      sol.blown_up = true;
      cur = std::move(next);
      break;
    }
    const double d = sup_value_distance(next.value, cur.value, sg.basis(), opt.rho);
    cur = std::move(next);
    if (d < opt.tol) break;
    if (d > prev_dist) {
      if (increased_once) {
        sol.non_contractive = true;
        break;
      }
      increased_once = true;
    } else {
      increased_once = false;
    }
    prev_dist = d;
  }
  sol.values = std::move(cur.value);
  sol.left_limits = std::move(cur.left);
  return sol;
}

}  // namespace detail

/// Solves the mild equation X_t = S(t)'Z0 + drift convolution + stochastic
/// convolution along one noise draw. A non-finite state flags the path as
/// blown up and truncates it.
inline SolutionPath solve_mild(const SpectralSemigroup& sg, const CoefficientSpec& coeff,
                               const Coeffs& z0, const LevySpec& spec, const NoiseIncrements& inc,
                               MildScheme scheme, const PicardOptions& opt = {}) {
  detail::check_dims(sg.basis(), z0, "solve_mild");
  if (!detail::finite(z0)) throw std::invalid_argument("solve_mild: z0 must be finite");
  if (!coeff.drift && !coeff.diffusion.op) {
    // No coefficients: the mild solution is the deterministic semigroup flow.
    SolutionPath sol;
    sol.times = inc.times;
    sol.rho = opt.rho;
    for (double t : inc.times) sol.values.push_back(sg.apply(t, z0));
    sol.left_limits = sol.values;
    return sol;
  }
  if (scheme == MildScheme::picard) return detail::picard_solve(sg, coeff, z0, spec, inc, opt, z0);

  bool blown = false;
  detail::MildWork work = detail::mild_sweep(sg, coeff, z0, spec, inc, nullptr, blown);
  SolutionPath sol;
  sol.times = inc.times;
  sol.rho = opt.rho;
  sol.blown_up = blown;
  sol.values = std::move(work.value);
  sol.left_limits = std::move(work.left);
  return sol;
}

/// RMS over the skeleton of the defect in the weak-solution identity
/// <X_t,psi> = <X_0,psi> + int (<X_r,A psi> + <B(r,X_r),psi>) dr
///           + int int <F(r,u,X_r) dM, psi>,
/// time integrals by left-endpoint quadrature on the same noise draw.
inline double weak_residual(const SolutionPath& path, const SpectralSemigroup& sg,
                            const CoefficientSpec& coeff, const LevySpec& spec,
                            const NoiseIncrements& inc, const Coeffs& psi) {
  if (path.times.size() != inc.times.size())
    throw std::invalid_argument("weak_residual: path and noise draw have different skeletons");
  detail::check_dims(sg.basis(), psi, "weak_residual");
  const SpectralBasis& basis = sg.basis();
  const Coeffs a_psi = sg.generator_apply(psi);
  const double x0_psi = pairing(path.values.front(), psi);

  double lebesgue = 0.0;
  double stochastic = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double s = path.times[i];
    const double dt = path.times[i + 1] - path.times[i];
    const Coeffs& x = path.values[i];

    lebesgue += dt * pairing(x, a_psi);
    if (coeff.drift) lebesgue += dt * pairing(coeff.drift(s, x), psi);
    if (coeff.diffusion.op) {
      if (!detail::all_zero(inc.wiener[i]))
        stochastic += pairing(coeff.diffusion.op(s, wiener_coordinate, x, inc.wiener[i]), psi);
      for (std::size_t a = 0; a < spec.atoms.size(); ++a) {
        if (!spec.compensated(a, basis)) continue;
        stochastic -= spec.atoms[a].weight * dt *
                      pairing(coeff.diffusion.op(s, static_cast<int>(a), x, spec.atoms[a].atom), psi);
      }
      for (std::size_t a : inc.jump_atoms[i + 1]) {
        const Coeffs& lim = path.left_limits[i + 1];
        stochastic += pairing(
            coeff.diffusion.op(path.times[i + 1], static_cast<int>(a), lim, spec.atoms[a].atom), psi);
      }
    }
    const double defect = pairing(path.values[i + 1], psi) - x0_psi - lebesgue - stochastic;
    sum_sq += defect * defect;
    ++count;
  }
  return count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
}

/// Runs the Picard solver from two different initial path guesses (constant
/// Z0 and the zero path) on the same noise draw and returns the sup-rho'
/// distance of the converged paths.
inline double uniqueness_probe(const SpectralSemigroup& sg, const CoefficientSpec& coeff,
                               const Coeffs& z0, const LevySpec& spec, const NoiseIncrements& inc,
                               const PicardOptions& opt = {}) {
  const SolutionPath a = detail::picard_solve(sg, coeff, z0, spec, inc, opt, z0);
  const SolutionPath b =
      detail::picard_solve(sg, coeff, z0, spec, inc, opt, Coeffs(sg.basis().n_modes(), 0.0));
  if (a.non_contractive || b.non_contractive)
    throw std::runtime_error("uniqueness_probe: picard iteration flagged non-contractive");
  if (a.blown_up || b.blown_up)
    throw std::runtime_error("uniqueness_probe: picard iteration blew up");
  return detail::sup_value_distance(a.values, b.values, sg.basis(), opt.rho);
}

/// Randomized validation of the growth and Lipschitz conditions. Test
/// vectors psi default to the basis vectors; states are Gaussian in
/// coefficient space.
struct A7Options {
  std::size_t samples = 200;
  double horizon = 1.0;
  double state_scale = 2.0;
  bool basis_test_vectors = true;
  double slack = 1e-9;
};

struct A7Report {
  bool growth_ok = true;
  bool lipschitz_ok = true;
  double worst_growth_excess = 0.0;
  double worst_lipschitz_excess = 0.0;
  std::size_t samples = 0;
  bool ok() const { return growth_ok && lipschitz_ok; }
};

inline A7Report validate_a7(const CoefficientSpec& coeff, const SpectralBasis& basis,
                            const LevySpec& spec, const A7Options& opt, std::uint64_t seed) {
  if (!coeff.growth_a || !coeff.growth_b)
    throw std::invalid_argument("validate_a7: growth functions a, b are required");
  const std::size_t n = basis.n_modes();
  CounterRng rng(seed, 7);
  A7Report rep;
  rep.samples = opt.samples;

  auto random_state = [&] {
    Coeffs g(n);
    for (double& x : g) x = opt.state_scale * rng.next_gaussian();
    return g;
  };
  auto diffusion_form = [&](double r, const Coeffs& g, const Coeffs& psi) {
    return martingale_qform(coeff.diffusion, spec, basis, r, g, psi);
  };

  for (std::size_t it = 0; it < opt.samples; ++it) {
    const double r = opt.horizon * rng.next_uniform();
    const Coeffs psi = opt.basis_test_vectors
                           ? basis_vector(n, static_cast<std::size_t>(rng.next_u64() % n))
                           : random_state();
    const Coeffs g = random_state(), g1 = random_state(), g2 = random_state();
    const double a = coeff.growth_a(psi, r);
    const double b = coeff.growth_b(psi, r);

    const double gp = std::abs(pairing(g, psi));
    if (coeff.drift) {
      const double lhs = std::abs(pairing(coeff.drift(r, g), psi));
      const double excess = lhs - a * (1.0 + gp);
      rep.worst_growth_excess = std::max(rep.worst_growth_excess, excess);
      if (excess > opt.slack * (1.0 + lhs)) rep.growth_ok = false;
    }
    if (coeff.diffusion.op) {
      const double lhs = diffusion_form(r, g, psi);
      const double excess = lhs - b * b * (1.0 + gp) * (1.0 + gp);
      rep.worst_growth_excess = std::max(rep.worst_growth_excess, excess);
      if (excess > opt.slack * (1.0 + lhs)) rep.growth_ok = false;
    }

    const double dp = std::abs(pairing(g1, psi) - pairing(g2, psi));
    if (coeff.drift) {
      const double lhs =
          std::abs(pairing(coeff.drift(r, g1), psi) - pairing(coeff.drift(r, g2), psi));
      const double excess = lhs - a * dp;
      rep.worst_lipschitz_excess = std::max(rep.worst_lipschitz_excess, excess);
      if (excess > opt.slack * (1.0 + lhs)) rep.lipschitz_ok = false;
    }
    if (coeff.diffusion.op) {
      double s = 0.0;
      const auto& q = spec.wiener.row_at(r);
      for (std::size_t j = 0; j < n; ++j) {
        if (q[j] == 0.0) continue;
        const Coeffs ej = basis_vector(n, j);
        const double t = pairing(coeff.diffusion.op(r, wiener_coordinate, g1, ej), psi) -
                         pairing(coeff.diffusion.op(r, wiener_coordinate, g2, ej), psi);
        s += q[j] * t * t;
      }
      for (std::size_t a2 = 0; a2 < spec.atoms.size(); ++a2) {
        if (!spec.compensated(a2, basis)) continue;
        const double t =
            pairing(coeff.diffusion.op(r, static_cast<int>(a2), g1, spec.atoms[a2].atom), psi) -
            pairing(coeff.diffusion.op(r, static_cast<int>(a2), g2, spec.atoms[a2].atom), psi);
        s += spec.atoms[a2].weight * t * t;
      }
      const double excess = s - b * dp * dp;
      rep.worst_lipschitz_excess = std::max(rep.worst_lipschitz_excess, excess);
      if (excess > opt.slack * (1.0 + s)) rep.lipschitz_ok = false;
    }
  }
  return rep;
}

}  // namespace sconv
