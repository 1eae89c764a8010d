#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sconv/hermite_space.hpp"
#include "sconv/integrand.hpp"
#include "sconv/noise.hpp"
#include "sconv/see.hpp"
#include "sconv/semigroup.hpp"

namespace sconv {

using ordered_json = nlohmann::ordered_json;

struct GridSpec {
  double horizon = 1.0;
  std::size_t steps = 200;
};

struct DyadicSpec {
  int k_min = 2;
  int k_max = 8;
  std::size_t paths = 2000;
};

struct EnsembleSpec {
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
};

struct Tolerances {
  double z_limit = 3.0;
  double uniqueness_limit = 1e-8;
  double picard_tol = 1e-10;
  std::size_t picard_iters = 30;
  double bit_exact_eps = 0.0;
};

struct WeakResidualSpec {
  std::size_t seeds = 100;
  std::size_t n_psi = 5;
};

/// One fully specified verification run: space, semigroup, noise, integrand
/// or equation coefficients, grids, ensemble sizing, and the checks to run.
struct Scenario {
  int schema_version = 1;
  std::string name = "unnamed";

  std::size_t n_modes = 8;
  std::vector<double> eigenvalues;  // empty = lambda_j = j - 1/2

  double theta = 0.0;

  Coeffs wiener_diag;  // empty = all ones
  Coeffs drift;        // empty = zero
  std::vector<JumpAtom> atoms;
  double ball_radius = 1.0;
  double ball_seminorm_index = 0.0;

  std::string integrand_preset = "identity";  // identity | scalar_time | zero
  double integrand_p = 0.0;
  double integrand_scale = 1.0;

  std::string coefficient_preset = "ou";  // ou | linear_drift | damped_sine
  double coefficient_param = 1.0;
  Coeffs z0;  // empty = zero

  GridSpec grid;
  DyadicSpec dyadic;
  EnsembleSpec ensemble;

  std::vector<std::string> checks;
  std::vector<double> kotelenez_c{0.5, 1.0, 2.0};
  Tolerances tol;
  WeakResidualSpec weak;

  std::size_t dump_paths = 0;
  std::size_t threads = 0;  // worker count; never affects numeric output
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline Coeffs get_vec(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<Coeffs>();
}

}  // namespace detail

inline void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("scenario: " + msg); };
  if (s.n_modes < 1) fail("basis.n_modes must be >= 1");
  if (!s.eigenvalues.empty() && s.eigenvalues.size() != s.n_modes)
    fail("basis.eigenvalues must have n_modes entries");
  if (s.grid.steps < 1) fail("grid.steps must be >= 1");
  if (!(s.grid.horizon > 0.0)) fail("grid.horizon must be > 0");
  if (s.ensemble.paths < 1) fail("ensemble.paths must be >= 1");
  if (s.dyadic.k_min < 0 || s.dyadic.k_max < s.dyadic.k_min) fail("dyadic levels must nest");
  if (s.integrand_preset != "identity" && s.integrand_preset != "scalar_time" &&
      s.integrand_preset != "zero")
    fail("integrand.preset must be identity, scalar_time or zero");
  if (s.coefficient_preset != "ou" && s.coefficient_preset != "linear_drift" &&
      s.coefficient_preset != "damped_sine")
    fail("coefficients.preset must be ou, linear_drift or damped_sine");
  for (const std::string& c : s.checks)
    if (c != "isometry" && c != "covariance" && c != "kotelenez" && c != "dyadic" &&
        c != "ou_moment" && c != "weak_residual" && c != "uniqueness" && c != "levy_structure")
      fail("unknown check '" + c + "'");
  if (!s.wiener_diag.empty() && s.wiener_diag.size() != s.n_modes)
    fail("noise.wiener_diag must have n_modes entries");
}

inline SpectralBasis make_basis(const Scenario& s) {
  if (s.eigenvalues.empty()) return SpectralBasis::standard(s.n_modes);
  return SpectralBasis(s.eigenvalues);
}

inline SpectralSemigroup make_semigroup(const Scenario& s) {
  return SpectralSemigroup(make_basis(s), s.theta);
}

inline LevySpec make_noise(const Scenario& s) {
  LevySpec spec;
  spec.wiener = WienerSpec::constant(s.wiener_diag.empty() ? Coeffs(s.n_modes, 1.0) : s.wiener_diag);
  spec.drift = s.drift;
  spec.atoms = s.atoms;
  spec.small_jump_radius = s.ball_radius;
  spec.ball_seminorm_index = s.ball_seminorm_index;
  return spec;
}

inline Integrand make_integrand(const Scenario& s) {
  if (s.integrand_preset == "zero") return zero_integrand(s.n_modes, s.integrand_p);
  if (s.integrand_preset == "scalar_time")
    return scalar_integrand([c = s.integrand_scale](double r) { return c * r; }, s.integrand_p);
  Integrand ig = identity_integrand(s.integrand_p);
  if (s.integrand_scale != 1.0) ig = scaled_integrand(std::move(ig), s.integrand_scale);
  return ig;
}

/// Builds the named coefficient preset together with admissibility growth
/// functions that make the randomized validator pass for it.
inline CoefficientSpec make_coefficients(const Scenario& s, const SpectralBasis& basis,
                                         const LevySpec& spec) {
  CoefficientSpec coeff;
  coeff.diffusion = make_integrand(s);

  // State-independent diffusion: b(psi, r)^2 = int q_{r,u}(F' psi)^2 mu(du).
  auto diffusion_b = [ig = coeff.diffusion, spec, basis](const Coeffs& psi, double r) {
    const Coeffs zero(basis.n_modes(), 0.0);
    return std::sqrt(martingale_qform(ig, spec, basis, r, zero, psi));
  };

  if (s.coefficient_preset == "ou") {
    coeff.drift = nullptr;
    coeff.growth_a = [](const Coeffs&, double) { return 0.0; };
    coeff.growth_b = diffusion_b;
  } else if (s.coefficient_preset == "linear_drift") {
    const double c = s.coefficient_param;
    coeff.drift = [c](double, const Coeffs& g) {
      Coeffs out = g;
      for (double& x : out) x *= -c;
      return out;
    };
    coeff.growth_a = [c](const Coeffs&, double) { return std::abs(c); };
    coeff.growth_b = diffusion_b;
  } else if (s.coefficient_preset == "damped_sine") {
    const double c = s.coefficient_param;
    coeff.drift = [c](double, const Coeffs& g) {
      Coeffs out(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) out[j] = c * std::sin(g[j]);
      return out;
    };
    coeff.growth_a = [c](const Coeffs& psi, double) {
      double s1 = 0.0;
      for (double x : psi) s1 += std::abs(x);
      return std::abs(c) * s1;
    };
    coeff.growth_b = diffusion_b;
  } else {
    throw std::invalid_argument("scenario: unknown coefficient preset");
  }
  return coeff;
}

inline ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  j["basis"]["n_modes"] = s.n_modes;
  if (!s.eigenvalues.empty()) j["basis"]["eigenvalues"] = s.eigenvalues;
  j["semigroup"]["theta"] = s.theta;
  ordered_json noise;
  if (!s.wiener_diag.empty()) noise["wiener_diag"] = s.wiener_diag;
  if (!s.drift.empty()) noise["drift"] = s.drift;
  if (!s.atoms.empty()) {
    ordered_json atoms = ordered_json::array();
    for (const auto& a : s.atoms) atoms.push_back({{"weight", a.weight}, {"vector", a.atom}});
    noise["atoms"] = std::move(atoms);
  }
  noise["ball_radius"] = s.ball_radius;
  noise["ball_seminorm_index"] = s.ball_seminorm_index;
  j["noise"] = std::move(noise);
  j["integrand"] = {{"preset", s.integrand_preset}, {"p", s.integrand_p}, {"scale", s.integrand_scale}};
  j["coefficients"] = {{"preset", s.coefficient_preset}, {"param", s.coefficient_param}};
  if (!s.z0.empty()) j["z0"] = s.z0;
  j["grid"] = {{"horizon", s.grid.horizon}, {"steps", s.grid.steps}};
  j["dyadic"] = {{"k_min", s.dyadic.k_min}, {"k_max", s.dyadic.k_max}, {"paths", s.dyadic.paths}};
  j["ensemble"] = {{"paths", s.ensemble.paths}, {"seed", s.ensemble.seed}};
  j["checks"] = s.checks;
  j["kotelenez_c"] = s.kotelenez_c;
  j["tolerances"] = {{"z_limit", s.tol.z_limit},
                     {"uniqueness_limit", s.tol.uniqueness_limit},
                     {"picard_tol", s.tol.picard_tol},
                     {"picard_iters", s.tol.picard_iters},
                     {"bit_exact_eps", s.tol.bit_exact_eps}};
  j["weak_residual"] = {{"seeds", s.weak.seeds}, {"n_psi", s.weak.n_psi}};
  j["dump_paths"] = s.dump_paths;
  j["threads"] = s.threads;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.schema_version = detail::get_or(j, "schema_version", 1);
    s.name = detail::get_or<std::string>(j, "name", "unnamed");
    if (j.contains("basis")) {
      const auto& b = j.at("basis");
      s.n_modes = detail::get_or<std::size_t>(b, "n_modes", 8);
      s.eigenvalues = detail::get_vec(b, "eigenvalues");
    }
    if (j.contains("semigroup")) s.theta = detail::get_or(j.at("semigroup"), "theta", 0.0);
    if (j.contains("noise")) {
      const auto& nz = j.at("noise");
      s.wiener_diag = detail::get_vec(nz, "wiener_diag");
      s.drift = detail::get_vec(nz, "drift");
      if (nz.contains("atoms"))
        for (const auto& a : nz.at("atoms")) {
          JumpAtom atom;
          atom.weight = a.at("weight").get<double>();
          atom.atom = a.at("vector").get<Coeffs>();
          s.atoms.push_back(std::move(atom));
        }
      s.ball_radius = detail::get_or(nz, "ball_radius", 1.0);
      s.ball_seminorm_index = detail::get_or(nz, "ball_seminorm_index", 0.0);
    }
    if (j.contains("integrand")) {
      const auto& ig = j.at("integrand");
      s.integrand_preset = detail::get_or<std::string>(ig, "preset", "identity");
      s.integrand_p = detail::get_or(ig, "p", 0.0);
      s.integrand_scale = detail::get_or(ig, "scale", 1.0);
    }
    if (j.contains("coefficients")) {
      const auto& c = j.at("coefficients");
      s.coefficient_preset = detail::get_or<std::string>(c, "preset", "ou");
      s.coefficient_param = detail::get_or(c, "param", 1.0);
    }
    s.z0 = detail::get_vec(j, "z0");
    if (j.contains("grid")) {
      s.grid.horizon = detail::get_or(j.at("grid"), "horizon", 1.0);
      s.grid.steps = detail::get_or<std::size_t>(j.at("grid"), "steps", 200);
    }
    if (j.contains("dyadic")) {
      s.dyadic.k_min = detail::get_or(j.at("dyadic"), "k_min", 2);
      s.dyadic.k_max = detail::get_or(j.at("dyadic"), "k_max", 8);
      s.dyadic.paths = detail::get_or<std::size_t>(j.at("dyadic"), "paths", 2000);
    }
    if (j.contains("ensemble")) {
      const auto& e = j.at("ensemble");
      if (e.contains("paths") && e.at("paths").is_number_integer() &&
          e.at("paths").get<long long>() < 1)
        throw std::invalid_argument("scenario: ensemble.paths must be >= 1");
      s.ensemble.paths = detail::get_or<std::size_t>(e, "paths", 10000);
      s.ensemble.seed = detail::get_or<std::uint64_t>(e, "seed", 1);
    }
    if (j.contains("checks")) s.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("kotelenez_c")) s.kotelenez_c = j.at("kotelenez_c").get<std::vector<double>>();
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      s.tol.z_limit = detail::get_or(t, "z_limit", 3.0);
      s.tol.uniqueness_limit = detail::get_or(t, "uniqueness_limit", 1e-8);
      s.tol.picard_tol = detail::get_or(t, "picard_tol", 1e-10);
      s.tol.picard_iters = detail::get_or<std::size_t>(t, "picard_iters", 30);
      s.tol.bit_exact_eps = detail::get_or(t, "bit_exact_eps", 0.0);
    }
    if (j.contains("weak_residual")) {
      s.weak.seeds = detail::get_or<std::size_t>(j.at("weak_residual"), "seeds", 100);
      s.weak.n_psi = detail::get_or<std::size_t>(j.at("weak_residual"), "n_psi", 5);
    }
    s.dump_paths = detail::get_or<std::size_t>(j, "dump_paths", 0);
    s.threads = detail::get_or<std::size_t>(j, "threads", 0);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: malformed field: ") + e.what());
  }

  validate_scenario(s);
  // Cross-validate the derived objects so config errors surface at load time.
  const SpectralBasis basis = make_basis(s);
  make_noise(s).validate(basis);
  if (!s.z0.empty() && s.z0.size() != s.n_modes)
    throw std::invalid_argument("scenario: z0 must have n_modes entries");
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scenario: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("load_scenario: parse error in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

/// FNV-1a digest of the canonical serialized scenario. The worker count is
/// excluded: it never affects numeric output.
inline std::string scenario_digest(const Scenario& s) {
  Scenario canon = s;
  canon.threads = 0;
  const std::string text = scenario_to_json(canon).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace sconv
