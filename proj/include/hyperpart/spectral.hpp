#pragma once

// Spectral norm  ||A|| = sup_{|u|=1} |<A, u^{(x)m}>|  estimated from below
// (every estimate carries its witness), and nuclear-norm bound pairs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string_view>
#include <vector>

#include "hyperpart/errors.hpp"
#include "hyperpart/partition.hpp"
#include "hyperpart/rng.hpp"
#include "hyperpart/tensor.hpp"

namespace hyperpart {

enum class SpectralMethod { oracle, power_iteration };

inline std::string_view to_string(SpectralMethod m) {
  return m == SpectralMethod::oracle ? "oracle" : "power-iteration";
}

struct SpectralEstimate {
  double value = 0.0;
  std::vector<double> witness;  ///< unit vector attaining `value`
  int restarts = 0;
  SpectralMethod method = SpectralMethod::power_iteration;
  bool converged = false;
};

struct PowerIterationOptions {
  int restarts = 64;
  int max_iters = 500;
  double tol = 1e-10;  ///< relative change of the objective between steps
  std::uint64_t seed = 0;
};

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void normalize(std::vector<double>& v) {
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
}

inline std::vector<double> random_unit(CounterRng& rng, int n) {
  std::vector<double> u(n);
  double nu = 0.0;
  while (nu == 0.0) {
    for (double& x : u) x = rng.normal();
    nu = norm2(u);
  }
  for (double& x : u) x /= nu;
  return u;
}

struct AscentResult {
  std::vector<double> u;
  double objective;
  bool converged;
};

// Maximizes sign * <a, u^{(x)m}> on the sphere. The plain step
// u <- normalize(g) is shifted by alpha * u whenever it would decrease the
// objective, so accepted steps are monotone.
inline AscentResult shifted_power_ascent(const Tensor& a, double sign, std::vector<double> u,
                                         int max_iters, double tol) {
  auto objective = [&](std::span<const double> v) { return sign * contract_full(a, v); };
  double f = objective(u);
  const int n = a.dim();
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> g = contract_to_vector(a, u);
    for (double& x : g) x *= sign;
    double alpha = 0.0;
    std::vector<double> cand(n);
    double fc = f;
    bool accepted = false;
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (int i = 0; i < n; ++i) cand[i] = g[i] + alpha * u[i];
      const double nc = norm2(cand);
      if (!std::isfinite(nc)) throw NumericalError("power iteration produced a non-finite iterate");
      if (nc == 0.0) break;
      for (double& x : cand) x /= nc;
      fc = objective(cand);
      if (fc >= f) {
        accepted = true;
        break;
      }
      alpha = alpha == 0.0 ? std::max(std::abs(f), norm2(g)) : 2.0 * alpha;
    }
    if (!accepted) return {std::move(u), f, true};
    const double change = fc - f;
    u = cand;
    f = fc;
    if (change <= tol * std::abs(f)) return {std::move(u), f, true};
  }
  return {std::move(u), f, false};
}

}  // namespace detail

/// Best of random restarts of a symmetric higher-order power method. Both
/// the maximizing and minimizing branch are followed from every start, so
/// the value is invariant under a -> c a up to rounding.
inline SpectralEstimate power_iteration(const Tensor& a, const PowerIterationOptions& opts = {}) {
  if (opts.restarts < 1) throw ParameterError("power iteration needs restarts >= 1");
  if (opts.max_iters < 1) throw ParameterError("power iteration needs max_iters >= 1");
  const int n = a.dim();
  SpectralEstimate best;
  best.method = SpectralMethod::power_iteration;
  best.restarts = opts.restarts;
  best.witness.assign(n, 0.0);
  best.witness[0] = 1.0;
  best.converged = true;
  if (linf_norm(a) == 0.0) return best;

  bool first = true;
  for (int r = 0; r < opts.restarts; ++r) {
    CounterRng rng(derive_seed(opts.seed, {static_cast<std::uint64_t>(Stream::restart),
                                           static_cast<std::uint64_t>(r)}));
    const std::vector<double> start = detail::random_unit(rng, n);
    for (double sign : {1.0, -1.0}) {
      auto res = detail::shifted_power_ascent(a, sign, start, opts.max_iters, opts.tol);
      if (!std::isfinite(res.objective))
        throw NumericalError("power iteration produced a non-finite value");
      const double value = std::abs(res.objective);
      if (first || value > best.value) {
        best.value = value;
        best.witness = std::move(res.u);
        best.converged = res.converged;
        first = false;
      }
    }
  }
  // Odd order: flip the witness so that <a, w^{(x)m}> = +value.
  if (a.order() % 2 == 1 && contract_full(a, best.witness) < 0.0)
    for (double& x : best.witness) x = -x;
  return best;
}

/// Brute-force reference for small n: evaluates every point of a
/// `grid`^n lattice on [-1,1]^n projected to the sphere, then refines the
/// best `restarts` candidates by Riemannian gradient ascent with
/// backtracking. The value is a certified lower bound; the maximum itself is
/// heuristic.
inline SpectralEstimate spectral_oracle(const Tensor& a, int restarts = 16, int grid = 9) {
  if (restarts < 1) throw ParameterError("oracle needs restarts >= 1");
  if (grid < 2) throw ParameterError("oracle needs grid >= 2");
  const int n = a.dim();
  const int m = a.order();
  if (n > 6)
    std::clog << "warning: spectral_oracle on n=" << n << " costs grid^n = " << grid << "^" << n
              << " evaluations\n";

  struct Candidate {
    double value;
    std::vector<double> u;
  };
  std::vector<Candidate> top;
  std::vector<int> digits(n, 0);
  std::vector<double> u(n);
  while (true) {
    for (int i = 0; i < n; ++i) u[i] = -1.0 + 2.0 * digits[i] / (grid - 1);
    const double nu = detail::norm2(u);
    if (nu > 0.0) {
      for (double& x : u) x /= nu;
      const double v = std::abs(contract_full(a, u));
      if (static_cast<int>(top.size()) < restarts || v > top.back().value) {
        top.push_back({v, u});
        std::sort(top.begin(), top.end(),
                  [](const Candidate& x, const Candidate& y) { return x.value > y.value; });
        if (static_cast<int>(top.size()) > restarts) top.pop_back();
      }
    }
    int pos = 0;
    while (pos < n && ++digits[pos] == grid) digits[pos++] = 0;
    if (pos == n) break;
  }

  SpectralEstimate best;
  best.method = SpectralMethod::oracle;
  best.restarts = restarts;
  best.converged = true;
  best.witness.assign(n, 0.0);
  best.witness[0] = 1.0;
  for (auto& cand : top) {
    std::vector<double> x = cand.u;
    const double sign = contract_full(a, x) >= 0.0 ? 1.0 : -1.0;
    double f = sign * contract_full(a, x);
    double step = 1.0;
    bool converged = false;
    for (int it = 0; it < 2000 && step > 1e-16; ++it) {
      std::vector<double> g = contract_to_vector(a, x);
      double gx = 0.0;
      for (int i = 0; i < n; ++i) gx += g[i] * x[i];
      // Riemannian gradient of sign*f: m (g - <g,x> x).
      std::vector<double> rg(n);
      for (int i = 0; i < n; ++i) rg[i] = sign * m * (g[i] - gx * x[i]);
      const double gnorm = detail::norm2(rg);
      if (gnorm < 1e-13 * std::max(1.0, std::abs(f))) {
        converged = true;
        break;
      }
      std::vector<double> y(n);
      double fy = f;
      while (step > 1e-16) {
        for (int i = 0; i < n; ++i) y[i] = x[i] + step * rg[i];
        detail::normalize(y);
        fy = sign * contract_full(a, y);
        if (fy >= f + 1e-4 * step * gnorm * gnorm) break;
        step *= 0.5;
      }
      if (step <= 1e-16) {
        converged = true;
        break;
      }
      x = y;
      f = fy;
      step = std::min(1.0, step * 2.0);
    }
    if (std::abs(f) > best.value) {
      best.value = std::abs(f);
      best.witness = x;
      best.converged = converged;
    }
  }
  if (m % 2 == 1 && contract_full(a, best.witness) < 0.0)
    for (double& x : best.witness) x = -x;
  return best;
}

/// safety x (best power-iteration value over the given budget). Heuristic:
/// the power method only bounds the norm from below.
inline double spectral_upper_heuristic(const Tensor& a, double safety = 1.25,
                                       const PowerIterationOptions& opts = {.restarts = 128}) {
  if (!(safety >= 1.0)) throw ParameterError("safety factor must be >= 1");
  return safety * power_iteration(a, opts).value;
}

struct Atom {
  double weight;
  std::vector<double> u;  ///< unit vector
};

struct NuclearUpper {
  double bound;
  Tensor reconstruction;
};

/// sum |weight| together with sum weight u^{(x)m}.
inline NuclearUpper nuclear_upper_from_decomposition(std::span<const Atom> atoms, int order) {
  if (atoms.empty()) throw ParameterError("decomposition needs at least one atom");
  const int n = static_cast<int>(atoms.front().u.size());
  Tensor rec(order, n);
  double bound = 0.0;
  for (const Atom& atom : atoms) {
    if (static_cast<int>(atom.u.size()) != n) throw DimensionError("atom length mismatch");
    if (std::abs(detail::norm2(atom.u) - 1.0) > 1e-9)
      throw ParameterError("decomposition atoms must be unit vectors");
    bound += std::abs(atom.weight);
    rec = rec + atom.weight * outer_power(atom.u, order);
  }
  return {bound, std::move(rec)};
}

/// Atoms (k^{m/2}, y_i / sqrt(k)) reconstructing the agreement tensor.
inline std::vector<Atom> agreement_atoms(const Partition& partition, int order) {
  std::vector<Atom> atoms;
  const double k = partition.k();
  for (int c = 0; c < partition.r(); ++c) {
    std::vector<double> y = partition.membership(c);
    for (double& x : y) x /= std::sqrt(k);
    atoms.push_back({std::pow(k, order / 2.0), std::move(y)});
  }
  return atoms;
}

inline constexpr double kWitnessTolerance = 1e-6;

/// <w, a>, a nuclear-norm lower bound whenever ||w|| <= 1. Rejects witnesses
/// whose estimated spectral norm exceeds 1 + kWitnessTolerance.
inline double nuclear_lower_from_witness(const Tensor& a, const Tensor& w,
                                         const PowerIterationOptions& opts = {.restarts = 128}) {
  require_same_shape(a, w);
  const double sw = power_iteration(w, opts).value;
  if (sw > 1.0 + kWitnessTolerance)
    throw ParameterError("witness spectral norm " + std::to_string(sw) + " exceeds 1");
  return inner_product(w, a);
}

struct NuclearBounds {
  double lower = 0.0;
  double upper = 0.0;
  Tensor lower_witness;
  std::vector<Atom> upper_decomposition;

  bool meet(double tol) const { return upper - lower <= tol; }
};

inline NuclearBounds nuclear_bounds(const Tensor& a, Tensor witness, std::vector<Atom> atoms,
                                    const PowerIterationOptions& opts = {.restarts = 128}) {
  NuclearBounds nb;
  nb.lower = nuclear_lower_from_witness(a, witness, opts);
  nb.upper = nuclear_upper_from_decomposition(atoms, a.order()).bound;
  nb.lower_witness = std::move(witness);
  nb.upper_decomposition = std::move(atoms);
  return nb;
}

}  // namespace hyperpart
