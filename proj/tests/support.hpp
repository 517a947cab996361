#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "hyperpart/hyperpart.hpp"

namespace testing_support {

using namespace hyperpart;

inline Tensor random_tensor(int order, int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Tensor t(order, n);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 2.0 * rng.uniform() - 1.0;
  return t;
}

// Symmetric tensor with one uniform draw per index multiset.
inline Tensor random_symmetric(int order, int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Tensor t(order, n);
  for_each_multiset(order, n, [&](std::span<const int> sorted) {
    const double v = 2.0 * rng.uniform() - 1.0;
    for_each_permutation(sorted, [&](std::span<const int> idx) { t[t.linear_index(idx)] = v; });
  });
  return t;
}

inline std::vector<double> random_unit_vector(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> u(n);
  double s = 0.0;
  for (double& x : u) {
    x = rng.normal();
    s += x * x;
  }
  for (double& x : u) x /= std::sqrt(s);
  return u;
}

// Random partition of n vertices into r clusters of size k.
inline Partition random_partition(int n, int r, int k, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<int> assign(n, Partition::kUnassigned);
  for (int c = 0; c < r; ++c)
    for (int j = 0; j < k; ++j) assign[perm[c * k + j]] = c;
  return Partition(assign, r, k);
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) { return linf_norm(a - b); }

}  // namespace testing_support
