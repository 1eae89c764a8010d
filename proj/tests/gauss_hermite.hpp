#pragma once

// Gauss-Hermite nodes and weights for the weight exp(-y^2). Roots of the
// orthonormal polynomial are bracketed by a sign-change scan and polished by
// bisection, which is slow but basin-safe at high degree. Test-side oracle
// only; it shares no code with the library's Hermite evaluation.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace testutil {

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Orthonormal Hermite polynomial p_n(z) for weight exp(-z^2) and its
// derivative p_n'(z) = sqrt(2n) p_{n-1}(z).
inline void hermite_eval(std::size_t n, double z, double& p, double& dp) {
  double p1 = 0.7511255444649425;  // pi^{-1/4}
  double p2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * std::sqrt(2.0 / (k + 1.0)) * p2 - std::sqrt(static_cast<double>(k) / (k + 1.0)) * p3;
  }
  p = p1;
  dp = std::sqrt(2.0 * n) * p2;
}

}  // namespace detail

inline GaussHermite gauss_hermite(std::size_t n) {
  if (n < 2) throw std::invalid_argument("gauss_hermite: need at least two nodes");
  const double upper = std::sqrt(2.0 * n + 1.0) + 0.5;
  const double step = 0.25 * 3.14159265358979323846 / std::sqrt(2.0 * n + 1.0);

  std::vector<double> pos;  // positive roots, ascending
  double p_prev, dp;
  double z_prev = (n % 2 == 0) ? 1e-12 : step * 0.5;  // skip the origin root of odd n
  detail::hermite_eval(n, z_prev, p_prev, dp);
  for (double z = z_prev + step; z <= upper; z += step) {
    double p;
    detail::hermite_eval(n, z, p, dp);
    if ((p > 0.0) != (p_prev > 0.0)) {
      double lo = z_prev, hi = z;
      double plo = p_prev;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double pm;
        detail::hermite_eval(n, mid, pm, dp);
        if ((pm > 0.0) == (plo > 0.0)) {
          lo = mid;
          plo = pm;
        } else {
          hi = mid;
        }
      }
      pos.push_back(0.5 * (lo + hi));
    }
    z_prev = z;
    p_prev = p;
  }
  if (pos.size() != n / 2) throw std::runtime_error("gauss_hermite: root scan missed a root");

  GaussHermite gh;
  gh.nodes.assign(n, 0.0);
  gh.weights.assign(n, 0.0);
  auto put = [&](std::size_t i, double root) {
    double p;
    detail::hermite_eval(n, root, p, dp);
    gh.nodes[i] = root;
    gh.nodes[n - 1 - i] = -root;
    gh.weights[i] = 2.0 / (dp * dp);
    gh.weights[n - 1 - i] = gh.weights[i];
  };
  for (std::size_t i = 0; i < pos.size(); ++i) put(i, pos[pos.size() - 1 - i]);
  if (n % 2 == 1) put(n / 2, 0.0);
  return gh;
}

}  // namespace testutil
