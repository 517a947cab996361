#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hyperpart;
using testing_support::random_partition;

namespace {

ModelParams params(int n, int m, int r, int k, double p, double q,
                   DiagonalPolicy d = DiagonalPolicy::bernoulli) {
  return ModelParams{n, m, r, k, p, q, d};
}

}  // namespace

TEST(Partition, ValidatesClusterSizes) {
  EXPECT_NO_THROW(Partition({0, 1, -1, 1, 0}, 2, 2));
  EXPECT_THROW(Partition({0, 1, 1, 1, 0}, 2, 2), ParameterError);
  EXPECT_THROW(Partition({0, 2, -1, 1, 0}, 2, 2), ParameterError);
  EXPECT_THROW(Partition({0, 0}, 2, 2), ParameterError);
  EXPECT_THROW(Partition::from_labels({0, 0, 1}), ParameterError);
  EXPECT_THROW(Partition::from_labels({-1, -1}), ParameterError);
  const Partition p = Partition::from_labels({1, -1, 0, 1, 0});
  EXPECT_EQ(p.r(), 2);
  EXPECT_EQ(p.k(), 2);
}

TEST(Partition, MembershipVectorsHaveDisjointSupport) {
  const Partition p = random_partition(9, 3, 2, 4);
  std::vector<double> sum(9, 0.0);
  for (int c = 0; c < 3; ++c) {
    const auto y = p.membership(c);
    for (int v = 0; v < 9; ++v) sum[v] += y[v];
  }
  int clustered = 0;
  for (double s : sum) {
    EXPECT_LE(s, 1.0);
    clustered += static_cast<int>(s);
  }
  EXPECT_EQ(clustered, 6);
}

TEST(Partition, NeighborhoodAndCanonical) {
  const Partition p({1, 0, -1, 1, 0}, 2, 2);
  EXPECT_EQ(p.neighborhood(3), (std::vector<int>{0, 3}));
  EXPECT_TRUE(p.neighborhood(2).empty());
  EXPECT_EQ(p.canonical().assignment(), (std::vector<int>{0, 1, -1, 0, 1}));
}

TEST(ModelParams, Invariants) {
  EXPECT_FALSE(params(8, 3, 2, 4, 0.9, 0.1).violation());
  EXPECT_TRUE(params(7, 3, 2, 4, 0.9, 0.1).violation());
  EXPECT_TRUE(params(8, 1, 2, 4, 0.9, 0.1).violation());
  EXPECT_TRUE(params(8, 3, 2, 4, 0.5, 0.5).violation());
  EXPECT_FALSE(params(8, 3, 2, 4, 0.5, 0.5).violation(true));
  EXPECT_TRUE(params(8, 3, 2, 4, 1.1, 0.1).violation());
  EXPECT_TRUE(params(8, 3, 2, 4, 0.5, -0.1).violation());
  EXPECT_THROW(params(8, 3, 0, 4, 0.9, 0.1).validate(), ParameterError);
}

TEST(SamplePartition, FullAndSingleCluster) {
  const Partition full = sample_partition(params(6, 3, 3, 2, 0.9, 0.1), 1);
  for (int v = 0; v < 6; ++v) EXPECT_TRUE(full.is_clustered(v));
  const Partition one = sample_partition(params(5, 3, 1, 5, 0.9, 0.1), 2);
  for (int v = 0; v < 5; ++v) EXPECT_EQ(one.cluster_of(v), 0);
}

TEST(SamplePartition, ClusteredMarginalMatchesHypergeometric) {
  const auto mp = params(6, 3, 2, 2, 0.9, 0.1);
  const int draws = 10000;
  std::vector<int> hits(6, 0);
  for (int s = 0; s < draws; ++s) {
    const Partition p = sample_partition(mp, s);
    for (int v = 0; v < 6; ++v) hits[v] += p.is_clustered(v);
  }
  const double f = 4.0 / 6.0, sigma = std::sqrt(f * (1 - f) / draws);
  for (int v = 0; v < 6; ++v) EXPECT_NEAR(hits[v] / double(draws), f, 3 * sigma) << v;
}

TEST(AgreementTensor, Examples) {
  const Partition one({0, 0}, 1, 2);
  EXPECT_EQ(linf_norm(agreement_tensor(one, 3) - Tensor::ones(3, 2)), 0.0);
  const Partition two({0, 1, 0, 1, -1}, 2, 2);
  const Tensor y = agreement_tensor(two, 3);
  EXPECT_EQ(y({0, 1, 0}), 0.0);
  EXPECT_EQ(y({0, 2, 2}), 1.0);
  EXPECT_EQ(y({4, 4, 4}), 0.0);
  EXPECT_EQ(l1_norm(y), 2 * 8.0);
  EXPECT_THROW(agreement_tensor(two, 1), ParameterError);
}

TEST(AgreementTensor, MatchesDirectLoopAndTotalMass) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int m = 2 + static_cast<int>(s % 3);
    const int r = 1 + static_cast<int>(s % 3), k = 2;
    const Partition part = random_partition(7, r, k, s);
    const Tensor y = agreement_tensor(part, m);
    std::vector<int> idx(m);
    for (std::size_t lin = 0; lin < y.size(); ++lin) {
      y.unravel(lin, idx);
      bool same = part.cluster_of(idx[0]) >= 0;
      for (int v : idx) same = same && part.cluster_of(v) == part.cluster_of(idx[0]);
      EXPECT_EQ(y[lin], same ? 1.0 : 0.0);
    }
    EXPECT_EQ(l1_norm(y), r * std::pow(k, m));
  }
}

TEST(SampleAdjacency, DegenerateProbabilities) {
  const auto mp = params(5, 3, 2, 2, 1.0, 0.0);
  const Partition truth = sample_partition(mp, 3);
  EXPECT_EQ(linf_norm(sample_adjacency(mp, truth, 3) - agreement_tensor(truth, 3)), 0.0);

  const auto full = params(4, 3, 2, 2, 1.0, 1.0);
  const Partition t2 = sample_partition(full, 1);
  EXPECT_EQ(l1_norm(sample_adjacency(full, t2, 1)), 64.0);

  auto zeroed = full;
  zeroed.diagonal = DiagonalPolicy::zeroed;
  const Tensor a = sample_adjacency(zeroed, t2, 1);
  EXPECT_EQ(l1_norm(a), 4.0 * 3 * 2);
  std::vector<int> idx(3);
  for (std::size_t lin = 0; lin < a.size(); ++lin) {
    a.unravel(lin, idx);
    EXPECT_EQ(a[lin], is_diagonal(idx) ? 0.0 : 1.0);
  }
}

TEST(SampleAdjacency, SymmetricBinaryAndReproducible) {
  for (auto d : {DiagonalPolicy::bernoulli, DiagonalPolicy::zeroed}) {
    const auto mp = params(6, 3, 2, 2, 0.7, 0.3, d);
    const auto i1 = make_instance(mp, 42), i2 = make_instance(mp, 42);
    EXPECT_TRUE(i1.adjacency.is_symmetric(0.0));
    for (double v : i1.adjacency.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
    EXPECT_EQ(linf_norm(i1.adjacency - i2.adjacency), 0.0);
    EXPECT_EQ(i1.truth, i2.truth);
    EXPECT_NE(linf_norm(i1.adjacency - make_instance(mp, 43).adjacency), 0.0);
  }
}

TEST(SampleAdjacency, MonteCarloMeanMatchesExpectation) {
  const auto mp = params(4, 3, 1, 2, 0.8, 0.2);
  const Partition truth({0, -1, 0, -1}, 1, 2);
  const int draws = 10000;
  Tensor sum(3, 4);
  for (int s = 0; s < draws; ++s) sum = sum + sample_adjacency(mp, truth, s);
  const Tensor mean = (1.0 / draws) * sum;
  const Tensor expect = expectation_tensor(mp, truth);
  EXPECT_LE(linf_norm(mean - expect), 3 * std::sqrt(0.25 / draws));
  const Tensor formula = 0.2 * Tensor::ones(3, 4) + 0.6 * agreement_tensor(truth, 3);
  EXPECT_EQ(linf_norm(expect - formula), 0.0);
}

TEST(SampleAdjacency, EdgeFrequenciesInsideAndAcross) {
  const auto mp = params(4, 3, 2, 2, 0.7, 0.2);
  const Partition truth({0, 1, 0, 1}, 2, 2);
  const int draws = 10000;
  long long in = 0, across = 0;
  for (int s = 0; s < draws; ++s) {
    const Tensor a = sample_adjacency(mp, truth, s);
    in += static_cast<long long>(a({0, 0, 2}));
    across += static_cast<long long>(a({0, 1, 2}));
  }
  EXPECT_NEAR(in / double(draws), 0.7, 3 * std::sqrt(0.21 / draws));
  EXPECT_NEAR(across / double(draws), 0.2, 3 * std::sqrt(0.16 / draws));
}

TEST(SampleAdjacency, DrawsDoNotDependOnOtherEntries) {
  // The same multiset receives the same coin whatever the cluster layout.
  const auto mp = params(5, 3, 1, 2, 0.5, 0.5);
  const Tensor a = sample_adjacency(mp, Partition({0, 0, -1, -1, -1}, 1, 2), 9);
  const Tensor b = sample_adjacency(mp, Partition({-1, -1, -1, 0, 0}, 1, 2), 9);
  EXPECT_EQ(linf_norm(a - b), 0.0);
}

TEST(ExpectationTensor, Examples) {
  const Partition truth({0, 0, 1, 1}, 2, 2);
  const Tensor e = expectation_tensor(params(4, 3, 2, 2, 0.4, 0.4), truth);
  EXPECT_EQ(linf_norm(e - Tensor::constant(3, 4, 0.4)), 0.0);
  const Tensor e0 = expectation_tensor(params(4, 3, 2, 2, 0.6, 0.0), truth);
  EXPECT_LT(linf_norm(e0 - 0.6 * agreement_tensor(truth, 3)), 1e-15);
  const Tensor ez =
      expectation_tensor(params(4, 3, 2, 2, 0.6, 0.1, DiagonalPolicy::zeroed), truth);
  EXPECT_EQ(ez({0, 0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(ez({0, 1, 2}), 0.1);
}

TEST(Preset, ClassicalModels) {
  const auto h = preset("hsbm", {.r = 2, .k = 5, .p = 0.9, .q = 0.1});
  EXPECT_EQ(h.n, 10);
  EXPECT_THROW(preset("hsbm", {.n = 11, .r = 2, .k = 5}), ParameterError);
  EXPECT_THROW(preset("hsbm", {.r = 1, .k = 5}), ParameterError);

  const auto c = preset("hyperclique", {.q = 0.3});
  EXPECT_EQ(c.p, 1.0);
  EXPECT_EQ(c.q, 0.3);
  EXPECT_THROW(preset("hyperclique", {.p = 0.9, .q = 0.3}), ParameterError);
  EXPECT_THROW(preset("hyperclique", {.q = 1.0}), ParameterError);

  EXPECT_THROW(preset("densest", {.r = 2}), ParameterError);
  const auto d = preset("densest", {.n = 9, .k = 3, .p = 0.6, .q = 0.2});
  EXPECT_EQ(d.r, 1);
  EXPECT_THROW(preset("densest", {.p = 1.0, .q = 0.2}), ParameterError);

  EXPECT_THROW(preset("nope", {}), ParameterError);
}

TEST(DiagonalPolicy, RoundTripsThroughStrings) {
  for (auto d : {DiagonalPolicy::zeroed, DiagonalPolicy::bernoulli})
    EXPECT_EQ(parse_diagonal_policy(to_string(d)), d);
  EXPECT_THROW(parse_diagonal_policy("diag"), ParameterError);
}
