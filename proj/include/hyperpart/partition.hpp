#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hyperpart/errors.hpp"

namespace hyperpart {

/// Assignment of n vertices into r labelled clusters of exactly k members.
/// Vertices outside every cluster carry `kUnassigned`.
class Partition {
 public:
  static constexpr int kUnassigned = -1;

  Partition() = default;

  Partition(std::vector<int> assignment, int r, int k)
      : assignment_(std::move(assignment)), r_(r), k_(k) {
    if (r < 1 || k < 1) throw ParameterError("partition needs r >= 1 and k >= 1");
    const int n = this->n();
    if (static_cast<long long>(r) * k > n)
      throw ParameterError("partition needs r*k <= n");
    std::vector<int> sizes(r, 0);
    for (int c : assignment_) {
      if (c == kUnassigned) continue;
      if (c < 0 || c >= r) throw ParameterError("cluster id out of range");
      ++sizes[c];
    }
    for (int s : sizes)
      if (s != k) throw ParameterError("every cluster must have exactly k members");
  }

  /// Infers r and k from the labels; all clusters must have equal size.
  static Partition from_labels(std::vector<int> assignment) {
    int r = 0;
    for (int c : assignment) {
      if (c < kUnassigned) throw ParameterError("cluster id out of range");
      r = std::max(r, c + 1);
    }
    if (r == 0) throw ParameterError("partition has no clusters");
    const int k = static_cast<int>(std::count(assignment.begin(), assignment.end(), 0));
    return Partition(std::move(assignment), r, k);
  }

  int n() const noexcept { return static_cast<int>(assignment_.size()); }
  int r() const noexcept { return r_; }
  int k() const noexcept { return k_; }

  const std::vector<int>& assignment() const noexcept { return assignment_; }
  int cluster_of(int vertex) const { return assignment_.at(vertex); }
  bool is_clustered(int vertex) const { return cluster_of(vertex) != kUnassigned; }

  /// Members of cluster c in increasing vertex order.
  std::vector<int> members(int c) const {
    std::vector<int> out;
    for (int v = 0; v < n(); ++v)
      if (assignment_[v] == c) out.push_back(v);
    return out;
  }

  /// 0/1 membership vector of cluster c.
  std::vector<double> membership(int c) const {
    std::vector<double> y(n(), 0.0);
    for (int v = 0; v < n(); ++v)
      if (assignment_[v] == c) y[v] = 1.0;
    return y;
  }

  /// Vertices sharing a cluster with `vertex`, including itself. Empty for
  /// unassigned vertices.
  std::vector<int> neighborhood(int vertex) const {
    const int c = cluster_of(vertex);
    if (c == kUnassigned) return {};
    return members(c);
  }

  /// Relabels clusters in order of their smallest member.
  Partition canonical() const {
    std::vector<int> relabel(r_, kUnassigned);
    int next = 0;
    std::vector<int> out(assignment_.size(), kUnassigned);
    for (int v = 0; v < n(); ++v) {
      const int c = assignment_[v];
      if (c == kUnassigned) continue;
      if (relabel[c] == kUnassigned) relabel[c] = next++;
      out[v] = relabel[c];
    }
    Partition p;
    p.assignment_ = std::move(out);
    p.r_ = r_;
    p.k_ = k_;
    return p;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> assignment_;
  int r_ = 0;
  int k_ = 0;
};

}  // namespace hyperpart
