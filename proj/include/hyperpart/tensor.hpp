#pragma once

// Dense cubical tensors of order m and dimension n.
//
// Storage is the full n^m array in lexicographic index order with the last
// index varying fastest. Indices and modes are 0-based in this API.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperpart/errors.hpp"

namespace hyperpart {

enum class SymmetryCheck {
  none,    ///< accept any values (mode products, intermediates)
  strict,  ///< reject values that are not permutation invariant
};

class Tensor {
 public:
  Tensor() = default;

  /// Zero tensor.
  Tensor(int order, int dim) : order_(order), dim_(dim) {
    validate_shape(order, dim);
    values_.assign(power(dim, order), 0.0);
  }

  Tensor(int order, int dim, std::vector<double> values,
         SymmetryCheck check = SymmetryCheck::none, double tol = 0.0)
      : order_(order), dim_(dim), values_(std::move(values)) {
    validate_shape(order, dim);
    if (values_.size() != power(dim, order))
      throw DimensionError("tensor needs " + std::to_string(power(dim, order)) +
                           " values, got " + std::to_string(values_.size()));
    for (double v : values_)
      if (!std::isfinite(v)) throw NumericalError("tensor entries must be finite");
    if (check == SymmetryCheck::strict && !is_symmetric(tol))
      throw ParameterError("tensor is not symmetric");
  }

  static Tensor constant(int order, int dim, double c) {
    Tensor t(order, dim);
    std::fill(t.values_.begin(), t.values_.end(), c);
    return t;
  }
  static Tensor ones(int order, int dim) { return constant(order, dim, 1.0); }

  int order() const noexcept { return order_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator[](std::size_t linear) const noexcept { return values_[linear]; }
  double& operator[](std::size_t linear) noexcept { return values_[linear]; }

  double operator()(std::span<const int> idx) const { return values_[linear_index(idx)]; }
  double& operator()(std::span<const int> idx) { return values_[linear_index(idx)]; }
  double operator()(std::initializer_list<int> idx) const {
    return (*this)(std::span<const int>(idx.begin(), idx.size()));
  }
  double& operator()(std::initializer_list<int> idx) {
    return (*this)(std::span<const int>(idx.begin(), idx.size()));
  }

  /// Range-checked linear offset of an index tuple.
  std::size_t linear_index(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != order_)
      throw DimensionError("index tuple length " + std::to_string(idx.size()) +
                           " does not match order " + std::to_string(order_));
    std::size_t lin = 0;
    for (int i : idx) {
      if (i < 0 || i >= dim_) throw ParameterError("index out of range");
      lin = lin * dim_ + static_cast<std::size_t>(i);
    }
    return lin;
  }

  void unravel(std::size_t linear, std::span<int> idx) const noexcept {
    for (int pos = order_ - 1; pos >= 0; --pos) {
      idx[pos] = static_cast<int>(linear % dim_);
      linear /= dim_;
    }
  }

  /// Every entry equals the entry at its sorted index tuple, within `tol`.
  bool is_symmetric(double tol = 0.0) const {
    std::vector<int> idx(order_);
    for (std::size_t lin = 0; lin < values_.size(); ++lin) {
      unravel(lin, idx);
      if (std::is_sorted(idx.begin(), idx.end())) continue;
      std::sort(idx.begin(), idx.end());
      if (std::abs(values_[lin] - values_[linear_index(idx)]) > tol) return false;
    }
    return true;
  }

  bool same_shape(const Tensor& o) const noexcept {
    return order_ == o.order_ && dim_ == o.dim_;
  }

  static std::size_t power(int base, int exp) noexcept {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
  }

 private:
  static void validate_shape(int order, int dim) {
    if (order < 1) throw ParameterError("tensor order must be >= 1");
    if (dim < 1) throw ParameterError("tensor dimension must be >= 1");
  }

  int order_ = 0;
  int dim_ = 0;
  std::vector<double> values_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw DimensionError("shape mismatch: (" + std::to_string(a.order()) + "," +
                         std::to_string(a.dim()) + ") vs (" + std::to_string(b.order()) +
                         "," + std::to_string(b.dim()) + ")");
}

/// True when the index tuple repeats at least one index.
inline bool is_diagonal(std::span<const int> idx) {
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (idx[a] == idx[b]) return true;
  return false;
}

/// Visits every non-decreasing index tuple (one per index multiset).
template <class F>
void for_each_multiset(int order, int dim, F&& f) {
  std::vector<int> idx(order, 0);
  while (true) {
    f(std::span<const int>(idx));
    int pos = order - 1;
    while (pos >= 0 && idx[pos] == dim - 1) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int q = pos + 1; q < order; ++q) idx[q] = idx[pos];
  }
}

/// Visits each distinct permutation of a sorted index tuple.
template <class F>
void for_each_permutation(std::span<const int> sorted, F&& f) {
  std::vector<int> perm(sorted.begin(), sorted.end());
  do {
    f(std::span<const int>(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

inline double inner_product(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Tensor outer_power(std::span<const double> u, int order) {
  if (order < 2) throw ParameterError("outer_power needs order >= 2");
  if (u.empty()) throw ParameterError("outer_power needs a non-empty vector");
  for (double x : u)
    if (!std::isfinite(x)) throw NumericalError("outer_power vector must be finite");
  const int n = static_cast<int>(u.size());
  // Built by repeated Kronecker expansion: level d holds u^{(x)d}.
  std::vector<double> cur(u.begin(), u.end());
  for (int d = 1; d < order; ++d) {
    std::vector<double> next(cur.size() * n);
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (int j = 0; j < n; ++j) next[i * n + j] = cur[i] * u[j];
    cur = std::move(next);
  }
  return Tensor(order, n, std::move(cur));
}

inline double l1_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += std::abs(v);
  return s;
}

inline double linf_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s = std::max(s, std::abs(v));
  return s;
}

inline double frobenius_norm(const Tensor& a) { return std::sqrt(inner_product(a, a)); }

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  Tensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  Tensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

inline Tensor operator*(double c, const Tensor& a) {
  Tensor r = a;
  for (double& v : r.values()) v *= c;
  return r;
}
inline Tensor operator*(const Tensor& a, double c) { return c * a; }

inline Tensor add(const Tensor& a, const Tensor& b) { return a + b; }
inline Tensor subtract(const Tensor& a, const Tensor& b) { return a - b; }
inline Tensor scale(const Tensor& a, double c) { return c * a; }

/// Mode-`mode` fiber; `fixed` lists the other m-1 indices in mode order.
inline std::vector<double> fiber(const Tensor& a, int mode, std::span<const int> fixed) {
  const int m = a.order();
  if (mode < 0 || mode >= m) throw ParameterError("fiber mode out of range");
  if (static_cast<int>(fixed.size()) != m - 1)
    throw DimensionError("fiber needs order-1 fixed indices");
  std::vector<int> idx(m);
  for (int pos = 0, f = 0; pos < m; ++pos)
    if (pos != mode) idx[pos] = fixed[f++];
  std::vector<double> out(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    idx[mode] = i;
    out[i] = a(idx);
  }
  return out;
}

/// Contracts the trailing order-1 modes with u: g_i = sum a(i, j..) u_j ...
inline std::vector<double> contract_to_vector(const Tensor& a, std::span<const double> u) {
  if (static_cast<int>(u.size()) != a.dim()) throw DimensionError("vector length mismatch");
  const std::size_t n = static_cast<std::size_t>(a.dim());
  std::vector<double> cur(a.values().begin(), a.values().end());
  for (int d = a.order(); d > 1; --d) {
    std::vector<double> next(cur.size() / n, 0.0);
    for (std::size_t i = 0; i < next.size(); ++i) {
      double s = 0.0;
      const double* row = cur.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * u[j];
      next[i] = s;
    }
    cur = std::move(next);
  }
  return cur;
}

/// <a, u^{(x)m}>.
inline double contract_full(const Tensor& a, std::span<const double> u) {
  const auto g = contract_to_vector(a, u);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * u[i];
  return s;
}

}  // namespace hyperpart
