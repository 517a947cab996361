#pragma once

// High-order planted model M(n, m, r, k, p, q): ground-truth sampling,
// symmetric adjacency sampling, the agreement tensor Y* and E[A].

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyperpart/errors.hpp"
#include "hyperpart/partition.hpp"
#include "hyperpart/rng.hpp"
#include "hyperpart/tensor.hpp"

namespace hyperpart {

/// Treatment of entries whose index tuple repeats an index.
enum class DiagonalPolicy {
  zeroed,     ///< m-uniform hypergraph: diagonal entries are 0
  bernoulli,  ///< diagonal entries are drawn like every other entry
};

inline std::string_view to_string(DiagonalPolicy d) {
  return d == DiagonalPolicy::zeroed ? "zeroed" : "bernoulli";
}

inline DiagonalPolicy parse_diagonal_policy(std::string_view s) {
  if (s == "zeroed") return DiagonalPolicy::zeroed;
  if (s == "bernoulli") return DiagonalPolicy::bernoulli;
  throw ParameterError("unknown diagonal policy '" + std::string(s) + "'");
}

struct ModelParams {
  int n = 0;
  int m = 3;
  int r = 1;
  int k = 1;
  double p = 1.0;
  double q = 0.0;
  DiagonalPolicy diagonal = DiagonalPolicy::bernoulli;

  /// Empty when valid, otherwise the first violated constraint. Sampling
  /// paths pass allow_equal to admit the degenerate null model p = q.
  std::optional<std::string> violation(bool allow_equal = false) const {
    if (m < 2) return "m must be >= 2";
    if (r < 1) return "r must be >= 1";
    if (k < 1) return "k must be >= 1";
    if (n < 1) return "n must be >= 1";
    if (static_cast<long long>(r) * k > n) return "r*k must be <= n";
    if (allow_equal) {
      if (!(q >= 0.0) || !(p <= 1.0) || !(q <= p)) return "need 0 <= q <= p <= 1";
    } else if (!(q >= 0.0) || !(p <= 1.0) || !(q < p)) {
      return "need 0 <= q < p <= 1";
    }
    return std::nullopt;
  }

  void validate(bool allow_equal = false) const {
    if (auto v = violation(allow_equal)) throw ParameterError(*v);
  }
};

/// Uniformly random choice of r*k vertices split into r labelled clusters.
inline Partition sample_partition(const ModelParams& params, std::uint64_t seed) {
  params.validate(true);
  CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::partition)}));
  std::vector<int> order(params.n);
  for (int v = 0; v < params.n; ++v) order[v] = v;
  rng.shuffle(order);
  std::vector<int> assignment(params.n, Partition::kUnassigned);
  for (int c = 0; c < params.r; ++c)
    for (int j = 0; j < params.k; ++j) assignment[order[c * params.k + j]] = c;
  return Partition(std::move(assignment), params.r, params.k);
}

/// Y* = sum_i y_i^{(x)m}: entry 1 iff every index lies in one common cluster.
inline Tensor agreement_tensor(const Partition& truth, int m) {
  if (m < 2) throw ParameterError("agreement tensor needs m >= 2");
  Tensor y(m, truth.n());
  std::vector<int> idx(m);
  for (std::size_t lin = 0; lin < y.size(); ++lin) {
    y.unravel(lin, idx);
    const int c = truth.cluster_of(idx[0]);
    if (c == Partition::kUnassigned) continue;
    bool same = true;
    for (int pos = 1; pos < m && same; ++pos) same = truth.cluster_of(idx[pos]) == c;
    if (same) y[lin] = 1.0;
  }
  return y;
}

/// True iff the tuple lies entirely inside one cluster.
inline bool within_cluster(const Partition& truth, std::span<const int> idx) {
  const int c = truth.cluster_of(idx[0]);
  if (c == Partition::kUnassigned) return false;
  for (int v : idx)
    if (truth.cluster_of(v) != c) return false;
  return true;
}

/// One Bernoulli draw per index multiset, replicated over its permutations.
/// Draw for a multiset depends only on (seed, multiset).
inline Tensor sample_adjacency(const ModelParams& params, const Partition& truth,
                               std::uint64_t seed) {
  params.validate(true);
  if (truth.n() != params.n) throw DimensionError("partition size does not match n");
  Tensor a(params.m, params.n);
  const std::uint64_t key =
      derive_seed(seed, {static_cast<std::uint64_t>(Stream::adjacency)});
  for_each_multiset(params.m, params.n, [&](std::span<const int> sorted) {
    if (params.diagonal == DiagonalPolicy::zeroed && is_diagonal(sorted)) return;
    const double prob = within_cluster(truth, sorted) ? params.p : params.q;
    const double u = to_unit(splitmix64(key ^ splitmix64(a.linear_index(sorted))));
    if (u >= prob) return;
    for_each_permutation(sorted, [&](std::span<const int> perm) { a(perm) = 1.0; });
  });
  return a;
}

/// q 1^{(x)m} + (p-q) Y*, with diagonal entries 0 under the zeroed policy.
inline Tensor expectation_tensor(const ModelParams& params, const Partition& truth) {
  params.validate(true);
  Tensor e = Tensor::constant(params.m, params.n, params.q) +
             (params.p - params.q) * agreement_tensor(truth, params.m);
  if (params.diagonal == DiagonalPolicy::zeroed) {
    std::vector<int> idx(params.m);
    for (std::size_t lin = 0; lin < e.size(); ++lin) {
      e.unravel(lin, idx);
      if (is_diagonal(idx)) e[lin] = 0.0;
    }
  }
  return e;
}

struct ModelInstance {
  ModelParams params;
  Partition truth;
  Tensor agreement;  ///< Y*
  Tensor adjacency;  ///< A
  std::uint64_t seed = 0;
};

inline ModelInstance make_instance(const ModelParams& params, std::uint64_t seed) {
  ModelInstance inst;
  inst.params = params;
  inst.seed = seed;
  inst.truth = sample_partition(params, seed);
  inst.agreement = agreement_tensor(inst.truth, params.m);
  inst.adjacency = sample_adjacency(params, inst.truth, seed);
  return inst;
}

/// Instance around an externally supplied adjacency tensor and truth.
inline ModelInstance make_instance(const ModelParams& params, Partition truth, Tensor adjacency,
                                   std::uint64_t seed = 0) {
  params.validate();
  if (adjacency.order() != params.m || adjacency.dim() != params.n || truth.n() != params.n)
    throw DimensionError("instance shapes do not match parameters");
  if (truth.r() != params.r || truth.k() != params.k)
    throw ParameterError("partition does not match r and k");
  ModelInstance inst;
  inst.params = params;
  inst.seed = seed;
  inst.agreement = agreement_tensor(truth, params.m);
  inst.truth = std::move(truth);
  inst.adjacency = std::move(adjacency);
  return inst;
}

/// Size arguments for the classical-model presets; unset fields take defaults.
struct PresetArgs {
  std::optional<int> n, m, r, k;
  std::optional<double> p, q;
  DiagonalPolicy diagonal = DiagonalPolicy::bernoulli;
};

/// hyperclique: p = 1, 0 < q < 1.
/// densest:     r = 1, 0 < q < p < 1.
/// hsbm:        n = r k, r >= 2, 0 < q < p < 1.
inline ModelParams preset(std::string_view name, const PresetArgs& args) {
  ModelParams mp;
  mp.m = args.m.value_or(3);
  mp.diagonal = args.diagonal;
  if (name == "hyperclique") {
    if (args.p && *args.p != 1.0) throw ParameterError("hyperclique requires p = 1");
    mp.r = args.r.value_or(2);
    mp.k = args.k.value_or(4);
    mp.n = args.n.value_or(mp.r * mp.k);
    mp.p = 1.0;
    mp.q = args.q.value_or(0.1);
    if (!(mp.q > 0.0 && mp.q < 1.0)) throw ParameterError("hyperclique requires 0 < q < 1");
  } else if (name == "densest") {
    if (args.r && *args.r != 1) throw ParameterError("densest requires r = 1");
    mp.r = 1;
    mp.k = args.k.value_or(4);
    mp.n = args.n.value_or(2 * mp.k);
    mp.p = args.p.value_or(0.9);
    mp.q = args.q.value_or(0.1);
    if (!(mp.q > 0.0 && mp.q < mp.p && mp.p < 1.0))
      throw ParameterError("densest requires 0 < q < p < 1");
  } else if (name == "hsbm") {
    mp.r = args.r.value_or(2);
    mp.k = args.k.value_or(4);
    if (mp.r < 2) throw ParameterError("hsbm requires r >= 2");
    if (args.n && *args.n != mp.r * mp.k) throw ParameterError("hsbm requires n = r k");
    mp.n = mp.r * mp.k;
    mp.p = args.p.value_or(0.9);
    mp.q = args.q.value_or(0.1);
    if (!(mp.q > 0.0 && mp.q < mp.p && mp.p < 1.0))
      throw ParameterError("hsbm requires 0 < q < p < 1");
  } else {
    throw ParameterError("unknown preset '" + std::string(name) + "'");
  }
  mp.validate();
  return mp;
}

}  // namespace hyperpart
