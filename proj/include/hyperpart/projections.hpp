#pragma once

// Fiber-span projectors, mode products and the composite projections
// Q^0, Q^i, Q = sum_j Q^j and Q_perp = I - Q built from them.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <ostream>
#include <vector>

#include "hyperpart/errors.hpp"
#include "hyperpart/partition.hpp"
#include "hyperpart/tensor.hpp"

namespace hyperpart {

/// Orthogonal projector on R^n (symmetric and idempotent).
class ModeProjector {
 public:
  ModeProjector() = default;
  explicit ModeProjector(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw DimensionError("projector must be square");
  }

  static ModeProjector identity(int n) { return ModeProjector(Eigen::MatrixXd::Identity(n, n)); }
  static ModeProjector zero(int n) { return ModeProjector(Eigen::MatrixXd::Zero(n, n)); }

  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  double operator()(int i, int j) const { return matrix_(i, j); }

  ModeProjector complement() const {
    return ModeProjector(Eigen::MatrixXd::Identity(dim(), dim()) - matrix_);
  }

  /// Rank of an orthogonal projector equals its trace.
  int rank() const { return static_cast<int>(std::lround(matrix_.trace())); }

  bool is_orthogonal_projector(double tol = 1e-10) const {
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    return (matrix_ * matrix_ - matrix_).cwiseAbs().maxCoeff() <= tol;
  }

  friend std::ostream& operator<<(std::ostream& os, const ModeProjector& p) {
    return os << p.matrix_;
  }

 private:
  Eigen::MatrixXd matrix_;
};

/// Relative singular-value cutoff deciding the numerical rank of a fiber set.
inline constexpr double kFiberRankCutoff = 1e-10;

/// n x n^{m-1} matrix whose columns are the mode-`mode` fibers of `a`.
inline Eigen::MatrixXd unfold(const Tensor& a, int mode) {
  if (mode < 0 || mode >= a.order()) throw ParameterError("mode out of range");
  const std::size_t n = a.dim();
  const std::size_t stride = Tensor::power(a.dim(), a.order() - 1 - mode);
  const std::size_t outer = Tensor::power(a.dim(), mode);
  Eigen::MatrixXd f(n, outer * stride);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < stride; ++in) {
      const std::size_t base = o * n * stride + in;
      const Eigen::Index col = static_cast<Eigen::Index>(o * stride + in);
      for (std::size_t i = 0; i < n; ++i) f(i, col) = a[base + i * stride];
    }
  return f;
}

/// Orthogonal projector onto the span of all mode-`mode` fibers.
inline ModeProjector fiber_span_projector(const Tensor& a, int mode) {
  const Eigen::MatrixXd f = unfold(a, mode);
  const int n = a.dim();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return ModeProjector::zero(n);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kFiberRankCutoff * sv(0)) ++rank;
  const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
  return ModeProjector(u * u.transpose());
}

/// Closed form (1/k) sum_i y_i y_i^T for a partition with equal cluster sizes.
inline ModeProjector agreement_projector(const Partition& membership) {
  const int n = membership.n();
  if (membership.k() < 1) throw ParameterError("partition has unequal or empty clusters");
  std::vector<int> sizes(membership.r(), 0);
  for (int v = 0; v < n; ++v)
    if (membership.is_clustered(v)) ++sizes[membership.cluster_of(v)];
  for (int s : sizes)
    if (s != membership.k()) throw ParameterError("agreement projector needs equal cluster sizes");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const double w = 1.0 / membership.k();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (membership.is_clustered(i) && membership.cluster_of(i) == membership.cluster_of(j))
        p(i, j) = w;
  return ModeProjector(std::move(p));
}

/// Applies `p` to every mode-`mode` fiber. The result is generally not
/// symmetric.
inline Tensor mode_multiply(const Tensor& a, const ModeProjector& p, int mode) {
  if (p.dim() != a.dim()) throw DimensionError("projector dimension does not match tensor");
  if (mode < 0 || mode >= a.order()) throw ParameterError("mode out of range");
  const std::size_t n = a.dim();
  const std::size_t stride = Tensor::power(a.dim(), a.order() - 1 - mode);
  const std::size_t outer = Tensor::power(a.dim(), mode);
  const Eigen::MatrixXd& mat = p.matrix();
  Tensor out(a.order(), a.dim());
  std::vector<double> fib(n);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < stride; ++in) {
      const std::size_t base = o * n * stride + in;
      for (std::size_t j = 0; j < n; ++j) fib[j] = a[base + j * stride];
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += mat(i, j) * fib[j];
        out[base + i * stride] = s;
      }
    }
  return out;
}

/// (p_0 (x) p_1 (x) ... (x) p_{m-1})(x).
inline Tensor apply_per_mode(const Tensor& x, const std::vector<ModeProjector>& per_mode) {
  if (static_cast<int>(per_mode.size()) != x.order())
    throw DimensionError("need one projector per mode");
  Tensor out = x;
  for (int j = 0; j < x.order(); ++j) out = mode_multiply(out, per_mode[j], j);
  return out;
}

/// The projections Q^0..Q^m, Q and Q_perp associated with a reference tensor.
class CompositeProjection {
 public:
  explicit CompositeProjection(const Tensor& reference) : order_(reference.order()) {
    for (int j = 0; j < order_; ++j) span_.push_back(fiber_span_projector(reference, j));
  }

  /// Uses the same projector on every mode (symmetric references).
  CompositeProjection(ModeProjector p, int order) : order_(order), span_(order, std::move(p)) {}

  int order() const noexcept { return order_; }
  const ModeProjector& span_projector(int mode) const { return span_.at(mode); }

  /// i = 0: all modes onto the fiber span. i >= 1: mode i-1 onto the
  /// orthogonal complement, all others onto the span.
  Tensor component(const Tensor& x, int i) const {
    check(x);
    if (i < 0 || i > order_) throw ParameterError("component index must lie in 0..m");
    std::vector<ModeProjector> ops = span_;
    if (i >= 1) ops[i - 1] = ops[i - 1].complement();
    return apply_per_mode(x, ops);
  }

  Tensor project(const Tensor& x) const {
    Tensor sum = component(x, 0);
    for (int i = 1; i <= order_; ++i) sum = sum + component(x, i);
    return sum;
  }

  Tensor project_perp(const Tensor& x) const { return x - project(x); }

 private:
  void check(const Tensor& x) const {
    if (x.order() != order_ || x.dim() != span_.front().dim())
      throw DimensionError("tensor shape does not match projection reference");
  }

  int order_;
  std::vector<ModeProjector> span_;
};

inline Tensor q_component(const Tensor& a_ref, const Tensor& x, int i) {
  require_same_shape(a_ref, x);
  return CompositeProjection(a_ref).component(x, i);
}

inline Tensor q_project(const Tensor& a_ref, const Tensor& x) {
  require_same_shape(a_ref, x);
  return CompositeProjection(a_ref).project(x);
}

inline Tensor q_perp_project(const Tensor& a_ref, const Tensor& x) {
  require_same_shape(a_ref, x);
  return CompositeProjection(a_ref).project_perp(x);
}

/// P on every mode except `identity_mode`, which is left untouched.
inline Tensor project_all_but(const Tensor& x, const ModeProjector& p, int identity_mode) {
  Tensor out = x;
  for (int j = 0; j < x.order(); ++j)
    if (j != identity_mode) out = mode_multiply(out, p, j);
  return out;
}

/// Q_{Y*}(x) through the expansion
///   sum_j (P (x)..(x) I_j (x)..(x) P)(x) - (m-1) (P (x)..(x) P)(x)
/// with P the agreement projector of `partition`.
inline Tensor q_symmetric_expansion(const Partition& partition, const Tensor& x) {
  if (x.dim() != partition.n()) throw DimensionError("tensor dimension does not match partition");
  const ModeProjector p = agreement_projector(partition);
  const int m = x.order();
  Tensor sum(m, x.dim());
  for (int j = 0; j < m; ++j) sum = sum + project_all_but(x, p, j);
  // Reuse the mode-0 identity term: P on mode 0 completes P (x)..(x) P.
  const Tensor all = mode_multiply(project_all_but(x, p, 0), p, 0);
  return sum - static_cast<double>(m - 1) * all;
}

}  // namespace hyperpart
