#pragma once

// Practical maximization of <A, Y> over
//   { Y : ||Y||_* <= r k^{m/2}, <1, Y> = r k^m, 0 <= Y <= 1 }.
//
// exhaustive_search and local_search restrict Y to agreement tensors of
// equal-size partitions (all of which are feasible). conditional_gradient
// works on the relaxation itself with an explicit atom list, so the nuclear
// constraint holds by construction and the affine and box constraints are
// handled by growing quadratic penalties.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyperpart/errors.hpp"
#include "hyperpart/partition.hpp"
#include "hyperpart/planted_model.hpp"
#include "hyperpart/rng.hpp"
#include "hyperpart/spectral.hpp"
#include "hyperpart/tensor.hpp"

namespace hyperpart {

enum class SolverMethod { exhaustive, local_search, conditional_gradient };

inline std::string_view to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::exhaustive: return "exhaustive";
    case SolverMethod::local_search: return "local-search";
    case SolverMethod::conditional_gradient: return "conditional-gradient";
  }
  return "?";
}

inline SolverMethod parse_solver_method(std::string_view s) {
  if (s == "exhaustive") return SolverMethod::exhaustive;
  if (s == "local-search") return SolverMethod::local_search;
  if (s == "conditional-gradient") return SolverMethod::conditional_gradient;
  throw ParameterError("unknown solver method '" + std::string(s) + "'");
}

struct SolverConfig {
  SolverMethod method = SolverMethod::local_search;
  int max_iters = 400;
  int restarts = 16;
  double tolerance = 1e-3;
  /// Weight of (<1,Y> - r k^m)^2 / (r k^m) in the penalized objective.
  double affine_penalty = 1.0;
  /// Weight of the squared box violation sum.
  double box_penalty = 1.0;
  double penalty_growth = 2.0;
  int penalty_period = 50;
  double penalty_cap = 1e4;
  std::uint64_t seed = 0;
  double exhaustive_budget = 1e6;
  PowerIterationOptions lmo{.restarts = 8, .max_iters = 200, .tol = 1e-10};

  void validate() const {
    if (max_iters < 1 || restarts < 1) throw ParameterError("iteration and restart counts must be positive");
    if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");
    if (!std::isfinite(affine_penalty) || !std::isfinite(box_penalty) || affine_penalty < 0 ||
        box_penalty < 0)
      throw NumericalError("penalty weights must be finite and non-negative");
  }
};

struct FeasibilityReport {
  double nuclear_upper = 0.0;   ///< sum |weights| of the held decomposition
  double nuclear_radius = 0.0;  ///< r k^{m/2}
  double affine_sum = 0.0;      ///< <1, Y>
  double affine_target = 0.0;   ///< r k^m
  double box_violation = 0.0;   ///< max(0, -min Y, max Y - 1)
};

struct SolveResult {
  SolverMethod method = SolverMethod::local_search;
  Tensor y;
  Partition partition;
  double objective = 0.0;
  FeasibilityReport feasibility;
  std::optional<bool> exact;
  bool converged = true;
  int iterations = 0;
  std::vector<double> history;          ///< objective after each accepted step
  std::vector<double> nuclear_history;  ///< decomposition bound per iteration
  std::vector<Atom> atoms;
};

inline FeasibilityReport feasibility_report(const Tensor& y, std::span<const Atom> atoms, int r,
                                            int k) {
  FeasibilityReport f;
  const int m = y.order();
  f.nuclear_radius = r * std::pow(static_cast<double>(k), m / 2.0);
  f.affine_target = r * std::pow(static_cast<double>(k), m);
  for (const auto& a : atoms) f.nuclear_upper += std::abs(a.weight);
  double lo = 0.0, hi = 0.0;
  for (double v : y.values()) {
    f.affine_sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v - 1.0);
  }
  f.box_violation = std::max(-lo, hi);
  return f;
}

/// Sum of a over all index tuples drawn from `members`.
inline double cluster_mass(const Tensor& a, std::span<const int> members) {
  const int m = a.order();
  const int k = static_cast<int>(members.size());
  if (k == 0) return 0.0;
  std::vector<int> digit(m, 0);
  std::vector<int> idx(m);
  double s = 0.0;
  while (true) {
    for (int d = 0; d < m; ++d) idx[d] = members[digit[d]];
    s += a(idx);
    int pos = m - 1;
    while (pos >= 0 && ++digit[pos] == k) digit[pos--] = 0;
    if (pos < 0) break;
  }
  return s;
}

/// <a, Y(partition)> without forming Y.
inline double partition_objective(const Tensor& a, const Partition& partition) {
  if (a.dim() != partition.n()) throw DimensionError("tensor dimension does not match partition");
  double s = 0.0;
  for (int c = 0; c < partition.r(); ++c) s += cluster_mass(a, partition.members(c));
  return s;
}

/// Number of unlabelled ways to pick r disjoint clusters of size k from n.
inline double count_partitions(int n, int r, int k) {
  double lg = std::lgamma(n + 1.0) - r * std::lgamma(k + 1.0) - std::lgamma(r + 1.0) -
              std::lgamma(n - static_cast<double>(r) * k + 1.0);
  return std::round(std::exp(lg));
}

/// True iff the two partitions define the same set of clusters.
inline bool exactness(const Partition& found, const Partition& truth) {
  if (found.n() != truth.n() || found.r() != truth.r() || found.k() != truth.k())
    throw DimensionError("partitions differ in n, r or k");
  return found.canonical() == truth.canonical();
}

inline SolveResult integral_result(const Tensor& a, Partition p, SolverMethod method) {
  SolveResult res;
  res.method = method;
  res.y = agreement_tensor(p, a.order());
  res.objective = inner_product(a, res.y);
  res.atoms = agreement_atoms(p, a.order());
  res.feasibility = feasibility_report(res.y, res.atoms, p.r(), p.k());
  res.partition = std::move(p);
  return res;
}

namespace detail {
inline void check_sizes(const Tensor& a, int r, int k) {
  if (a.order() < 2) throw ParameterError("tensor order must be >= 2");
  if (r < 1 || k < 1 || static_cast<long long>(r) * k > a.dim())
    throw ParameterError("need r >= 1, k >= 1 and r*k <= n");
}
}  // namespace detail

/// Enumerates every partition in canonical form (clusters opened in order of
/// their smallest member) and returns the maximizer. Ties go to the
/// lexicographically smallest assignment vector, with unassigned (-1)
/// ordered first.
inline SolveResult exhaustive_search(const Tensor& a, int r, int k, double budget = 1e6) {
  detail::check_sizes(a, r, k);
  const int n = a.dim();
  const double count = count_partitions(n, r, k);
  if (count > budget)
    throw ParameterError("exhaustive search would enumerate " + std::to_string(count) +
                         " partitions (budget " + std::to_string(budget) +
                         "); use local-search");
  std::vector<int> assign(n, Partition::kUnassigned);
  std::vector<int> sizes(r, 0);
  std::vector<std::vector<int>> members(r);
  int opened = 0;
  int unassigned = 0;
  const int max_unassigned = n - r * k;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_assign;
  long long visited = 0;

  auto recurse = [&](auto&& self, int v) -> void {
    if (v == n) {
      ++visited;
      double obj = 0.0;
      for (int c = 0; c < r; ++c) obj += cluster_mass(a, members[c]);
      if (obj > best) {
        best = obj;
        best_assign = assign;
      }
      return;
    }
    // Branches that cannot complete die out: every leaf has all clusters full.
    if (unassigned < max_unassigned) {
      ++unassigned;
      self(self, v + 1);
      --unassigned;
    }
    for (int c = 0; c < opened; ++c) {
      if (sizes[c] == k) continue;
      assign[v] = c;
      ++sizes[c];
      members[c].push_back(v);
      self(self, v + 1);
      members[c].pop_back();
      --sizes[c];
      assign[v] = Partition::kUnassigned;
    }
    if (opened < r) {
      const int c = opened++;
      assign[v] = c;
      ++sizes[c];
      members[c].push_back(v);
      self(self, v + 1);
      members[c].pop_back();
      --sizes[c];
      assign[v] = Partition::kUnassigned;
      --opened;
    }
  };
  recurse(recurse, 0);
  SolveResult res = integral_result(a, Partition(best_assign, r, k), SolverMethod::exhaustive);
  res.iterations = static_cast<int>(visited);
  res.history = {res.objective};
  return res;
}

namespace detail {

inline Partition random_partition(int n, int r, int k, CounterRng& rng) {
  std::vector<int> order(n);
  for (int v = 0; v < n; ++v) order[v] = v;
  rng.shuffle(order);
  std::vector<int> assign(n, Partition::kUnassigned);
  for (int c = 0; c < r; ++c)
    for (int j = 0; j < k; ++j) assign[order[c * k + j]] = c;
  return Partition(std::move(assign), r, k);
}

// Best-improvement swap ascent from `start`; records the objective after
// every accepted swap.
inline std::pair<std::vector<int>, std::vector<double>> swap_ascent(const Tensor& a, int r,
                                                                    std::vector<int> assign,
                                                                    int max_steps) {
  const int n = a.dim();
  auto members_of = [&](int c) {
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
      if (assign[v] == c) out.push_back(v);
    return out;
  };
  std::vector<double> mass(r);
  for (int c = 0; c < r; ++c) mass[c] = cluster_mass(a, members_of(c));
  double total = 0.0;
  for (double x : mass) total += x;
  std::vector<double> history{total};

  for (int step = 0; step < max_steps; ++step) {
    double best_gain = 0.0;
    int bu = -1, bv = -1;
    double bmu = 0, bmv = 0;
    const double eps = 1e-12 * std::max(1.0, std::abs(total));
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        const int cu = assign[u], cv = assign[v];
        if (cu == cv) continue;
        std::swap(assign[u], assign[v]);
        double gain = 0.0, mu = 0.0, mv = 0.0;
        if (cu != Partition::kUnassigned) {
          mu = cluster_mass(a, members_of(cu));
          gain += mu - mass[cu];
        }
        if (cv != Partition::kUnassigned) {
          mv = cluster_mass(a, members_of(cv));
          gain += mv - mass[cv];
        }
        std::swap(assign[u], assign[v]);
        if (gain > best_gain + eps) {
          best_gain = gain;
          bu = u;
          bv = v;
          bmu = mu;
          bmv = mv;
        }
      }
    if (bu < 0) break;
    const int cu = assign[bu], cv = assign[bv];
    std::swap(assign[bu], assign[bv]);
    if (cu != Partition::kUnassigned) mass[cu] = bmu;
    if (cv != Partition::kUnassigned) mass[cv] = bmv;
    total = 0.0;
    for (double x : mass) total += x;
    history.push_back(total);
  }
  return {std::move(assign), std::move(history)};
}

}  // namespace detail

/// Swap-based ascent from `config.restarts` random partitions. A swap
/// exchanges two vertices in different clusters, or a clustered vertex with
/// an unassigned one. Ties between restarts go to the lower restart index.
inline SolveResult local_search(const Tensor& a, int r, int k, const SolverConfig& config = {}) {
  detail::check_sizes(a, r, k);
  config.validate();
  const int n = a.dim();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_assign;
  std::vector<double> best_history;
  int steps = 0;
  for (int rs = 0; rs < config.restarts; ++rs) {
    CounterRng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(Stream::solver),
                                             static_cast<std::uint64_t>(rs)}));
    Partition start = detail::random_partition(n, r, k, rng);
    auto [assign, history] = detail::swap_ascent(a, r, start.assignment(), config.max_iters);
    steps += static_cast<int>(history.size()) - 1;
    if (history.back() > best) {
      best = history.back();
      best_assign = std::move(assign);
      best_history = std::move(history);
    }
  }
  SolveResult res = integral_result(a, Partition(best_assign, r, k), SolverMethod::local_search);
  res.history = std::move(best_history);
  res.iterations = steps;
  return res;
}

/// Greedy rounding of a (possibly fractional) iterate. Pair (i, j) scores
/// the mean entry over index tuples containing both; each cluster is seeded
/// with the best-scoring free pair and grown by mean score to its members.
/// Ties resolve to the smallest vertex indices.
inline Partition round_to_partition(const Tensor& y, int r, int k) {
  detail::check_sizes(y, r, k);
  const int n = y.dim();
  const int m = y.order();
  std::vector<double> sum(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> cnt(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<int> idx(m), distinct;
  for (std::size_t lin = 0; lin < y.size(); ++lin) {
    y.unravel(lin, idx);
    distinct.assign(idx.begin(), idx.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t a = 0; a < distinct.size(); ++a)
      for (std::size_t b = a; b < distinct.size(); ++b) {
        const std::size_t off = static_cast<std::size_t>(distinct[a]) * n + distinct[b];
        sum[off] += y[lin];
        cnt[off] += 1.0;
      }
  }
  auto score = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    const std::size_t off = static_cast<std::size_t>(i) * n + j;
    return cnt[off] > 0 ? sum[off] / cnt[off] : 0.0;
  };

  std::vector<int> assign(n, Partition::kUnassigned);
  for (int c = 0; c < r; ++c) {
    std::vector<int> cluster;
    if (k == 1) {
      int bi = -1;
      double bs = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i)
        if (assign[i] == Partition::kUnassigned && score(i, i) > bs) {
          bs = score(i, i);
          bi = i;
        }
      cluster.push_back(bi);
    } else {
      int bi = -1, bj = -1;
      double bs = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (assign[i] != Partition::kUnassigned) continue;
        for (int j = i + 1; j < n; ++j)
          if (assign[j] == Partition::kUnassigned && score(i, j) > bs) {
            bs = score(i, j);
            bi = i;
            bj = j;
          }
      }
      cluster = {bi, bj};
    }
    for (int v : cluster) assign[v] = c;
    while (static_cast<int>(cluster.size()) < k) {
      int bv = -1;
      double bs = -std::numeric_limits<double>::infinity();
      for (int v = 0; v < n; ++v) {
        if (assign[v] != Partition::kUnassigned) continue;
        double s = 0.0;
        for (int u : cluster) s += score(u, v);
        s /= cluster.size();
        if (s > bs) {
          bs = s;
          bv = v;
        }
      }
      assign[bv] = c;
      cluster.push_back(bv);
    }
  }
  return Partition(std::move(assign), r, k);
}

/// Frank-Wolfe over the nuclear ball of radius r k^{m/2}. The linear oracle
/// is the best symmetric rank-one atom +-R u^{(x)m} of the gradient, found
/// by power iteration; step sizes come from a golden-section line search on
/// the concave penalized objective. Heuristic: no global optimality claim.
inline SolveResult conditional_gradient(const Tensor& a, int r, int k, const SolverConfig& config = {}) {
  detail::check_sizes(a, r, k);
  config.validate();
  const int n = a.dim();
  const int m = a.order();
  const double radius = r * std::pow(static_cast<double>(k), m / 2.0);
  const double target = r * std::pow(static_cast<double>(k), m);
  double mu = config.affine_penalty;
  double nu = config.box_penalty;

  auto penalized = [&](const Tensor& y) {
    double lin = 0.0, total = 0.0, box = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double v = y[i];
      lin += a[i] * v;
      total += v;
      if (v < 0.0) box += v * v;
      if (v > 1.0) box += (v - 1.0) * (v - 1.0);
    }
    const double dev = total - target;
    return lin - 0.5 * mu * dev * dev / target - 0.5 * nu * box;
  };

  Tensor y(m, n);
  std::vector<Atom> atoms;
  SolveResult res;
  res.method = SolverMethod::conditional_gradient;
  res.converged = false;
  PowerIterationOptions lmo = config.lmo;

  int it = 0;
  for (; it < config.max_iters; ++it) {
    if (it > 0 && it % config.penalty_period == 0) {
      mu = std::min(mu * config.penalty_growth, config.penalty_cap);
      nu = std::min(nu * config.penalty_growth, config.penalty_cap);
    }
    double total = 0.0;
    for (double v : y.values()) total += v;
    const double dev = total - target;
    Tensor grad = a;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double v = y[i];
      double g = a[i] - mu * dev / target;
      if (v < 0.0) g -= nu * v;
      if (v > 1.0) g -= nu * (v - 1.0);
      grad[i] = g;
    }
    for (double g : grad.values())
      if (!std::isfinite(g)) throw NumericalError("conditional gradient produced a non-finite gradient");

    lmo.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(Stream::solver),
                                         static_cast<std::uint64_t>(it)});
    const SpectralEstimate est = power_iteration(grad, lmo);
    const double sign = contract_full(grad, est.witness) >= 0.0 ? 1.0 : -1.0;
    const Tensor vertex = (sign * radius) * outer_power(est.witness, m);
    const Tensor dir = vertex - y;
    const double gap = inner_product(grad, dir);
    const double f0 = penalized(y);
    const bool affine_ok = std::abs(dev) / target <= config.tolerance;
    if (gap <= config.tolerance * std::max(1.0, std::abs(f0)) && affine_ok) {
      res.converged = true;
      break;
    }

    // Golden-section search for the step on [0, 1].
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = penalized(y + x1 * dir), f2 = penalized(y + x2 * dir);
    for (int s = 0; s < 48; ++s) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = penalized(y + x2 * dir);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = penalized(y + x1 * dir);
      }
    }
    double gamma = 0.5 * (lo + hi);
    if (penalized(y + gamma * dir) < f0) gamma = 0.0;
    if (it == 0 && gamma == 0.0) gamma = 1.0;  // leave the origin

    if (gamma > 0.0) {
      y = y + gamma * dir;
      for (Atom& at : atoms) at.weight *= (1.0 - gamma);
      atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                                 [](const Atom& at) { return at.weight == 0.0; }),
                  atoms.end());
      atoms.push_back({sign * radius * gamma, est.witness});
    }
    double bound = 0.0;
    for (const Atom& at : atoms) bound += std::abs(at.weight);
    res.nuclear_history.push_back(bound);
    res.history.push_back(inner_product(a, y));
  }
  res.iterations = it;
  res.y = std::move(y);
  res.objective = inner_product(a, res.y);
  res.atoms = std::move(atoms);
  res.feasibility = feasibility_report(res.y, res.atoms, r, k);
  res.partition = round_to_partition(res.y, r, k);
  return res;
}

inline SolveResult solve(const Tensor& a, int r, int k, const SolverConfig& config) {
  switch (config.method) {
    case SolverMethod::exhaustive: return exhaustive_search(a, r, k, config.exhaustive_budget);
    case SolverMethod::local_search: return local_search(a, r, k, config);
    case SolverMethod::conditional_gradient: return conditional_gradient(a, r, k, config);
  }
  throw ParameterError("unknown solver method");
}

}  // namespace hyperpart
