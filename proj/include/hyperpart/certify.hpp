#pragma once

// Numerical optimality certificate for the planted agreement tensor Y*.
//
// With N = A - E[A], lambda chosen so that Z = N / lambda has spectral norm
// at most 2/(m(m-1)), and the dual witness W0 = k^{-m/2} Y*, the planted
// solution is the unique maximizer of <A, Y> over the relaxed feasible set
// whenever
//
//   margin = (p - q)/2 - lambda k^{-m/2} - ||Q_{Y*}(lambda Z)||_inf >= 0.
//
// Every quantity in that chain is computed explicitly and reported.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "hyperpart/planted_model.hpp"
#include "hyperpart/projections.hpp"
#include "hyperpart/spectral.hpp"
#include "hyperpart/tensor.hpp"

namespace hyperpart {

enum class LambdaMode {
  measured,  ///< lambda = m(m-1)/2 * (spectral upper estimate of N)
  constant,  ///< lambda = m(m-1)/2 * C sqrt(p(1-q) m n log m)
};

inline std::string_view to_string(LambdaMode m) {
  return m == LambdaMode::measured ? "measured" : "constant";
}

inline LambdaMode parse_lambda_mode(std::string_view s) {
  if (s == "measured") return LambdaMode::measured;
  if (s == "constant") return LambdaMode::constant;
  throw ParameterError("unknown lambda mode '" + std::string(s) + "'");
}

struct CertificateOptions {
  LambdaMode lambda_mode = LambdaMode::measured;
  double constant_c = 1.0;
  double safety = 1.25;
  PowerIterationOptions spectral{.restarts = 128};
  /// Instances with n at or below this use the brute-force oracle.
  int oracle_max_n = 5;
  int oracle_grid = 9;
  int oracle_restarts = 16;
  /// Replace (p, q) by within/across edge frequencies of the given partition.
  bool estimate_params = false;
};

struct SubCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
};

struct CertificateReport {
  double p = 0.0;  ///< probabilities actually used (estimated in audit mode)
  double q = 0.0;
  double lambda = 0.0;
  bool lambda_zero = false;
  double noise_spectral = 0.0;  ///< spectral estimate of A - E[A] (lower bound)
  double noise_upper = 0.0;     ///< safety x noise_spectral
  double z_spectral_bound = 0.0;
  double lemma1_rhs = 0.0;
  double linf_projected = 0.0;  ///< ||Q_{Y*}(lambda Z)||_inf, exact
  double linf_bound = 0.0;      ///< (2m-1) ||A_bar||_inf
  double margin = 0.0;
  bool passes = false;
  SpectralMethod spectral_method = SpectralMethod::power_iteration;
  std::vector<SubCheck> sub_checks;

  const SubCheck* find(std::string_view name) const {
    for (const auto& c : sub_checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// A - E[A] under the instance's diagonal policy.
inline Tensor noise_tensor(const ModelInstance& inst) {
  return inst.adjacency - expectation_tensor(inst.params, inst.truth);
}

/// sqrt(p(1-q) m n log m); multiply by C for the concentration bound.
inline double concentration_scale(const ModelParams& mp) {
  return std::sqrt(mp.p * (1.0 - mp.q) * mp.m * mp.n * std::log(static_cast<double>(mp.m)));
}

struct SpectralBound {
  double estimate = 0.0;  ///< best witnessed value
  double upper = 0.0;     ///< safety x estimate
  SpectralMethod method = SpectralMethod::power_iteration;
};

inline SpectralBound noise_spectral_bound(const Tensor& noise, const CertificateOptions& opts) {
  SpectralBound sb;
  if (noise.dim() <= opts.oracle_max_n) {
    sb.method = SpectralMethod::oracle;
    sb.estimate = spectral_oracle(noise, opts.oracle_restarts, opts.oracle_grid).value;
    // The oracle refines from a lattice; the power method may still win.
    sb.estimate = std::max(sb.estimate, power_iteration(noise, opts.spectral).value);
  } else {
    sb.method = SpectralMethod::power_iteration;
    sb.estimate = power_iteration(noise, opts.spectral).value;
  }
  sb.upper = opts.safety * sb.estimate;
  return sb;
}

struct LambdaResult {
  double lambda = 0.0;
  SpectralBound noise;
  bool zero = false;
};

inline LambdaResult compute_lambda(const ModelInstance& inst, const CertificateOptions& opts = {}) {
  if (!(opts.safety >= 1.0)) throw ParameterError("safety factor must be >= 1");
  const int m = inst.params.m;
  const double pairs = m * (m - 1) / 2.0;
  LambdaResult res;
  res.noise = noise_spectral_bound(noise_tensor(inst), opts);
  if (opts.lambda_mode == LambdaMode::measured) {
    res.lambda = pairs * res.noise.upper;
  } else {
    if (!(opts.constant_c > 0.0)) throw ParameterError("constant C must be positive");
    res.lambda = pairs * opts.constant_c * concentration_scale(inst.params);
  }
  res.zero = res.lambda == 0.0;
  return res;
}

/// Checks that W0 is a valid subgradient witness for Y*: it is fixed by
/// Q^0_{Y*}, has unit spectral norm and attains <W0, Y*> = r k^{m/2}.
inline std::vector<SubCheck> check_dual_witness(const Tensor& y_star, const Partition& truth,
                                                const Tensor& w0,
                                                const PowerIterationOptions& spectral = {}) {
  require_same_shape(y_star, w0);
  const int m = y_star.order();
  std::vector<SubCheck> out;
  const double fixed = linf_norm(q_component(y_star, w0, 0) - w0);
  out.push_back({"witness_fixed_point", fixed <= 1e-9, fixed});
  const double sw = power_iteration(w0, spectral).value;
  out.push_back({"witness_spectral_norm", std::abs(sw - 1.0) <= 1e-6, sw});
  const double target = truth.r() * std::pow(static_cast<double>(truth.k()), m / 2.0);
  const double align = inner_product(w0, y_star);
  out.push_back({"witness_alignment", std::abs(align - target) <= 1e-8, align});
  return out;
}

inline Tensor dual_witness(const ModelInstance& inst) {
  return std::pow(static_cast<double>(inst.params.k), -inst.params.m / 2.0) * inst.agreement;
}

inline std::vector<SubCheck> dual_witness_check(const ModelInstance& inst,
                                                const PowerIterationOptions& spectral = {}) {
  return check_dual_witness(inst.agreement, inst.truth, dual_witness(inst), spectral);
}

struct ProjectedNoise {
  double exact = 0.0;      ///< ||Q_{Y*}(lambda Z)||_inf
  double abar_linf = 0.0;  ///< ||(I (x) P (x) .. (x) P)(lambda Z)||_inf
  double bound = 0.0;      ///< (2m-1) abar_linf
};

/// Both routes to the projected-noise sup norm. lambda Z equals A - E[A]
/// regardless of lambda, which only has to be non-negative.
inline ProjectedNoise projected_noise_linf(const ModelInstance& inst, double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  const Tensor noise = noise_tensor(inst);
  ProjectedNoise pn;
  pn.exact = linf_norm(q_symmetric_expansion(inst.truth, noise));
  pn.abar_linf = linf_norm(project_all_but(noise, agreement_projector(inst.truth), 0));
  pn.bound = (2.0 * inst.params.m - 1.0) * pn.abar_linf;
  return pn;
}

/// Within-cluster and across-cluster hyperedge frequencies, one count per
/// index multiset (diagonal multisets skipped under the zeroed policy).
inline std::pair<double, double> estimate_pq(const Tensor& a, const Partition& partition,
                                             DiagonalPolicy diagonal) {
  double in_sum = 0, in_cnt = 0, out_sum = 0, out_cnt = 0;
  for_each_multiset(a.order(), a.dim(), [&](std::span<const int> idx) {
    if (diagonal == DiagonalPolicy::zeroed && is_diagonal(idx)) return;
    if (within_cluster(partition, idx)) {
      in_sum += a(idx);
      in_cnt += 1;
    } else {
      out_sum += a(idx);
      out_cnt += 1;
    }
  });
  return {in_cnt > 0 ? in_sum / in_cnt : 0.0, out_cnt > 0 ? out_sum / out_cnt : 0.0};
}

inline CertificateReport certificate(const ModelInstance& given, const CertificateOptions& opts = {}) {
  CertificateReport rep;
  ModelInstance inst = given;
  if (opts.estimate_params) {
    auto [ph, qh] = estimate_pq(inst.adjacency, inst.truth, inst.params.diagonal);
    if (!(qh < ph)) {
      rep.p = ph;
      rep.q = qh;
      rep.sub_checks.push_back({"estimated_gap", false, ph - qh});
      return rep;
    }
    inst.params.p = ph;
    inst.params.q = qh;
    rep.sub_checks.push_back({"estimated_gap", true, ph - qh});
  }
  const ModelParams& mp = inst.params;
  rep.p = mp.p;
  rep.q = mp.q;

  const LambdaResult lam = compute_lambda(inst, opts);
  rep.lambda = lam.lambda;
  rep.lambda_zero = lam.zero;
  rep.noise_spectral = lam.noise.estimate;
  rep.noise_upper = lam.noise.upper;
  rep.spectral_method = lam.noise.method;
  rep.lemma1_rhs = opts.constant_c * concentration_scale(mp);

  const double z_limit = 2.0 / (mp.m * (mp.m - 1.0));
  rep.z_spectral_bound = lam.lambda > 0.0 ? lam.noise.upper / lam.lambda
                                          : (lam.noise.upper > 0.0 ? INFINITY : 0.0);
  const bool z_ok = rep.z_spectral_bound <= z_limit + 1e-9;
  rep.sub_checks.push_back({"z_spectral_bound", z_ok, rep.z_spectral_bound});

  const auto witness = dual_witness_check(inst, opts.spectral);
  bool witness_ok = true;
  for (const auto& c : witness) witness_ok = witness_ok && c.passed;
  rep.sub_checks.insert(rep.sub_checks.end(), witness.begin(), witness.end());

  const ProjectedNoise pn = projected_noise_linf(inst, lam.lambda);
  rep.linf_projected = pn.exact;
  rep.linf_bound = pn.bound;
  rep.sub_checks.push_back({"projected_noise_bound", pn.exact <= pn.bound + 1e-9, pn.exact});

  rep.margin = 0.5 * (mp.p - mp.q) -
               lam.lambda * std::pow(static_cast<double>(mp.k), -mp.m / 2.0) - pn.exact;
  rep.sub_checks.push_back({"margin", rep.margin >= 0.0, rep.margin});

  rep.passes = rep.margin >= 0.0 && z_ok && witness_ok;
  return rep;
}

struct ThresholdResult {
  double lhs = 0.0;  ///< (p-q) / (C sqrt(p(1-q) m^5 log m))
  double rhs = 0.0;  ///< sqrt(n / k^{m-1})
  double ratio = 0.0;
  double side_value = 0.0;  ///< m^3 log m p(1-q) k^{m-1}
  bool side_condition = false;
  bool predicate = false;
};

/// Explicit sufficient recovery condition lhs >= rhs together with the side
/// condition m^3 log m p(1-q) k^{m-1} >= 1.
inline ThresholdResult theorem_threshold(const ModelParams& mp, double c) {
  if (!(c > 0.0)) throw ParameterError("constant C must be positive");
  if (mp.m < 2 || mp.n < 1 || mp.k < 1) throw ParameterError("invalid model sizes");
  const double m = mp.m;
  const double var = mp.p * (1.0 - mp.q);
  const double logm = std::log(m);
  const double km1 = std::pow(static_cast<double>(mp.k), m - 1.0);
  ThresholdResult t;
  t.lhs = var > 0.0 ? (mp.p - mp.q) / (c * std::sqrt(var * std::pow(m, 5.0) * logm)) : 0.0;
  t.rhs = std::sqrt(mp.n / km1);
  t.ratio = t.lhs / t.rhs;
  t.side_value = m * m * m * logm * var * km1;
  t.side_condition = t.side_value >= 1.0;
  t.predicate = mp.p > mp.q && t.lhs >= t.rhs && t.side_condition;
  return t;
}

/// The largest C for which the threshold inequality still holds, 0 when p <= q.
inline double threshold_critical_c(const ModelParams& mp) {
  const double m = mp.m;
  const double var = mp.p * (1.0 - mp.q);
  if (!(mp.p > mp.q) || var <= 0.0) return 0.0;
  const double rhs = std::sqrt(mp.n / std::pow(static_cast<double>(mp.k), m - 1.0));
  return (mp.p - mp.q) / (std::sqrt(var * std::pow(m, 5.0) * std::log(m)) * rhs);
}

/// Delta(Y) = <A, Y* - Y>.
inline double delta(const Tensor& a, const Tensor& y_star, const Tensor& y) {
  require_same_shape(a, y_star);
  require_same_shape(a, y);
  return inner_product(a, y_star - y);
}

struct Lemma1Report {
  int trials = 0;
  double c = 0.0;
  double scale = 0.0;  ///< sqrt(p(1-q) m n log m)
  std::vector<double> norms;
  double pass_fraction = 0.0;
  double empirical_c = 0.0;  ///< max norm / scale
};

/// Samples `trials` instances and compares the noise spectral norm with
/// C sqrt(p(1-q) m n log m).
inline Lemma1Report lemma1_check(const ModelParams& mp, int trials, double c, std::uint64_t seed,
                                 const PowerIterationOptions& spectral = {}) {
  if (trials < 1) throw ParameterError("lemma1_check needs trials >= 1");
  mp.validate();
  Lemma1Report rep;
  rep.trials = trials;
  rep.c = c;
  rep.scale = concentration_scale(mp);
  int pass = 0;
  for (int t = 0; t < trials; ++t) {
    const auto inst = make_instance(mp, derive_seed(seed, {static_cast<std::uint64_t>(Stream::trial),
                                                           static_cast<std::uint64_t>(t)}));
    PowerIterationOptions o = spectral;
    o.seed = derive_seed(inst.seed, {static_cast<std::uint64_t>(Stream::restart)});
    const double norm = power_iteration(noise_tensor(inst), o).value;
    rep.norms.push_back(norm);
    if (norm <= c * rep.scale) ++pass;
    rep.empirical_c = std::max(rep.empirical_c, rep.scale > 0.0 ? norm / rep.scale : 0.0);
  }
  rep.pass_fraction = static_cast<double>(pass) / trials;
  return rep;
}

/// sqrt(2(m+1) k^{m-1} p(1-q) log n) + (2/3)(m+1) log n.
inline double bernstein_threshold(const ModelParams& mp) {
  const double m = mp.m;
  const double logn = std::log(static_cast<double>(mp.n));
  const double km1 = std::pow(static_cast<double>(mp.k), m - 1.0);
  return std::sqrt(2.0 * (m + 1.0) * km1 * mp.p * (1.0 - mp.q) * logn) +
         2.0 / 3.0 * (m + 1.0) * logn;
}

/// For each clustered vertex i: sum of (A - E[A])(i, j_2..j_m) over j's in N(i).
inline std::vector<double> neighborhood_noise_sums(const ModelInstance& inst) {
  const Tensor noise = noise_tensor(inst);
  const int m = inst.params.m;
  std::vector<double> sums;
  std::vector<int> idx(m);
  for (int i = 0; i < inst.params.n; ++i) {
    const auto nbr = inst.truth.neighborhood(i);
    if (nbr.empty()) continue;
    const int k = static_cast<int>(nbr.size());
    double s = 0.0;
    std::vector<int> digit(m - 1, 0);
    while (true) {
      idx[0] = i;
      for (int d = 0; d < m - 1; ++d) idx[d + 1] = nbr[digit[d]];
      s += noise(idx);
      int pos = 0;
      while (pos < m - 1 && ++digit[pos] == k) digit[pos++] = 0;
      if (pos == m - 1) break;
    }
    sums.push_back(s);
  }
  return sums;
}

struct BernsteinReport {
  double threshold = 0.0;
  double bound = 0.0;  ///< n^{-(m+1)}
  long long samples = 0;
  long long events = 0;
  double frequency = 0.0;
  double sigma = 0.0;  ///< Monte Carlo standard error at the bound
  double max_sum = 0.0;
};

/// Monte Carlo frequency of the neighborhood-sum tail event, one sample
/// per (trial, clustered vertex).
inline BernsteinReport bernstein_tail_check(const ModelParams& mp, int trials, std::uint64_t seed) {
  if (trials < 1000) throw ParameterError("bernstein_tail_check needs trials >= 1000");
  mp.validate();
  BernsteinReport rep;
  rep.threshold = bernstein_threshold(mp);
  rep.bound = std::pow(static_cast<double>(mp.n), -(mp.m + 1.0));
  rep.max_sum = -INFINITY;
  for (int t = 0; t < trials; ++t) {
    const auto inst = make_instance(mp, derive_seed(seed, {static_cast<std::uint64_t>(Stream::trial),
                                                           static_cast<std::uint64_t>(t)}));
    for (double s : neighborhood_noise_sums(inst)) {
      ++rep.samples;
      if (s >= rep.threshold) ++rep.events;
      rep.max_sum = std::max(rep.max_sum, s);
    }
  }
  rep.frequency = rep.samples ? static_cast<double>(rep.events) / rep.samples : 0.0;
  rep.sigma = rep.samples ? std::sqrt(rep.bound * (1.0 - rep.bound) / rep.samples) : 0.0;
  return rep;
}

}  // namespace hyperpart
