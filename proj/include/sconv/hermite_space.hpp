#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sconv {

/// Coefficient vector in the truncated Hermite eigen-basis. Depending on
/// context it carries either coordinates of an element of the test space
/// (pairings with the basis functions) or dual coordinates of a functional.
using Coeffs = std::vector<double>;

/// Truncated eigen-system (lambda_j, phi_j) of a nonnegative self-adjoint
/// operator. The default instantiation is the harmonic-oscillator system
/// lambda_j = j - 1/2 diagonalized by the Hermite functions.
class SpectralBasis {
 public:
  explicit SpectralBasis(std::vector<double> eigenvalues) : eig_(std::move(eigenvalues)) {
    if (eig_.empty()) throw std::invalid_argument("SpectralBasis: at least one mode required");
    double prev = 0.0;
    for (double l : eig_) {
      if (!std::isfinite(l) || l < 0.0)
        throw std::invalid_argument("SpectralBasis: eigenvalues must be nonnegative and finite");
      if (l < prev)
        throw std::invalid_argument("SpectralBasis: eigenvalues must be nondecreasing");
      prev = l;
    }
  }

  /// lambda_j = j - 1/2, j = 1..n_modes.
  static SpectralBasis standard(std::size_t n_modes) {
    std::vector<double> eig(n_modes);
    for (std::size_t j = 0; j < n_modes; ++j) eig[j] = static_cast<double>(j) + 0.5;
    return SpectralBasis(std::move(eig));
  }

  std::size_t n_modes() const { return eig_.size(); }
  double eigenvalue(std::size_t j) const { return eig_[j]; }
  const std::vector<double>& eigenvalues() const { return eig_; }

 private:
  std::vector<double> eig_;
};

/// j-th coordinate vector (0-based) in an n-dimensional truncation.
inline Coeffs basis_vector(std::size_t n, std::size_t j) {
  if (j >= n) throw std::invalid_argument("basis_vector: index out of range");
  Coeffs e(n, 0.0);
  e[j] = 1.0;
  return e;
}

/// n-th Hermite function (1-based), evaluated by the stable three-term
/// recurrence on phi_k = sqrt(g) h_{k-1} with g the standard Gaussian
/// density and h_k the orthonormal Hermite polynomials for weight g.
inline double hermite_function(int n, double x) {
  if (n < 1) throw std::invalid_argument("hermite_function: n must be >= 1");
  if (!std::isfinite(x)) throw std::invalid_argument("hermite_function: x must be finite");
  const double sqrt_g = std::pow(8.0 * std::atan(1.0), -0.25) * std::exp(-x * x / 4.0);
  double prev = 0.0;       // phi_0 := 0
  double cur = sqrt_g;     // phi_1
  for (int k = 1; k < n; ++k) {
    const double next =
        (x * cur - std::sqrt(static_cast<double>(k - 1)) * prev) / std::sqrt(static_cast<double>(k));
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {
inline void check_dims(const SpectralBasis& b, const Coeffs& v, const char* where) {
  if (v.size() != b.n_modes())
    throw std::invalid_argument(std::string(where) + ": coefficient vector does not match basis");
}
}  // namespace detail

/// Weight vector (1 + lambda_j)^{2r}.
inline std::vector<double> seminorm_weights(const SpectralBasis& b, double r) {
  std::vector<double> w(b.n_modes());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::pow(1.0 + b.eigenvalue(j), 2.0 * r);
  return w;
}

/// |v|_r = ( sum_j (1+lambda_j)^{2r} v_j^2 )^{1/2}. Negative r gives the
/// dual norm on coefficient functionals.
inline double seminorm(const SpectralBasis& b, double r, const Coeffs& v) {
  detail::check_dims(b, v, "seminorm");
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j)
    s += std::pow(1.0 + b.eigenvalue(j), 2.0 * r) * v[j] * v[j];
  return std::sqrt(s);
}

inline double seminorm_sq(const std::vector<double>& weights, const Coeffs& v) {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) s += weights[j] * v[j] * v[j];
  return s;
}

/// Canonical dual pairing <f, psi> in the orthonormal basis coordinates.
inline double pairing(const Coeffs& f, const Coeffs& psi) {
  if (f.size() != psi.size()) throw std::invalid_argument("pairing: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * psi[j];
  return s;
}

/// Hilbert-Schmidt norm of the truncated inclusion Psi_{r2} -> Psi_{r1}:
/// ( sum_j (1+lambda_j)^{-2(r2-r1)} )^{1/2}. Requires r2 > r1.
inline double hs_embedding_norm(const SpectralBasis& b, double r1, double r2) {
  if (!(r2 > r1))
    throw std::invalid_argument("hs_embedding_norm: requires r2 > r1");
  double s = 0.0;
  for (std::size_t j = 0; j < b.n_modes(); ++j)
    s += std::pow(1.0 + b.eigenvalue(j), -2.0 * (r2 - r1));
  return std::sqrt(s);
}

}  // namespace sconv
