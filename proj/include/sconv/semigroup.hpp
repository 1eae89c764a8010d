#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "sconv/hermite_space.hpp"

namespace sconv {

/// Diagonal C0-semigroup S(t) with multipliers exp(-t lambda_j) and growth
/// rate theta in the exponential seminorm bound |S(t)v|_r <= e^{theta t}|v|_r.
/// The spectral operator is self-adjoint, so the same multiplier action
/// realizes the dual semigroup on dual coefficient vectors.
class SpectralSemigroup {
 public:
  explicit SpectralSemigroup(SpectralBasis basis, double growth_rate = 0.0)
      : basis_(std::move(basis)), theta_(growth_rate) {
    if (!(theta_ >= 0.0)) throw std::invalid_argument("SpectralSemigroup: growth rate must be >= 0");
  }

  const SpectralBasis& basis() const { return basis_; }
  double growth_rate() const { return theta_; }

  void apply_in_place(double t, Coeffs& v) const {
    if (!(t >= 0.0)) throw std::invalid_argument("SpectralSemigroup::apply: t must be >= 0");
    detail::check_dims(basis_, v, "SpectralSemigroup::apply");
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= std::exp(-t * basis_.eigenvalue(j));
  }

  Coeffs apply(double t, const Coeffs& v) const {
    Coeffs out = v;
    apply_in_place(t, out);
    return out;
  }

  /// Generator action A v = -lambda_j v_j.
  Coeffs generator_apply(const Coeffs& v) const {
    detail::check_dims(basis_, v, "SpectralSemigroup::generator_apply");
    Coeffs out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = -basis_.eigenvalue(j) * v[j];
    return out;
  }

  /// e^{theta t} |v|_r - |S(t)v|_r. Nonnegative up to roundoff for every
  /// admissible input; the checkable form of the (C0,1) bound.
  double exp_bound_margin(double t, double r, const Coeffs& v) const {
    return std::exp(theta_ * t) * seminorm(basis_, r, v) - seminorm(basis_, r, apply(t, v));
  }

 private:
  SpectralBasis basis_;
  double theta_;
};

}  // namespace sconv
