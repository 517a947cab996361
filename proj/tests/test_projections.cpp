#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace hyperpart;
using testing_support::max_abs_diff;
using testing_support::random_partition;
using testing_support::random_symmetric;
using testing_support::random_tensor;
using testing_support::random_unit_vector;

namespace {

double matrix_diff(const ModeProjector& a, const Eigen::MatrixXd& b) {
  return (a.matrix() - b).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd membership_projector(const Partition& part) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(part.n(), part.n());
  for (int c = 0; c < part.r(); ++c) {
    const auto y = part.membership(c);
    for (int i = 0; i < part.n(); ++i)
      for (int j = 0; j < part.n(); ++j) p(i, j) += y[i] * y[j] / part.k();
  }
  return p;
}

}  // namespace

TEST(FiberSpan, RankOneTensor) {
  const std::vector<double> u{1.0, -2.0, 0.5, 3.0};
  const ModeProjector p = fiber_span_projector(outer_power(u, 3), 0);
  double nu2 = 0;
  for (double x : u) nu2 += x * x;
  Eigen::MatrixXd ref(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ref(i, j) = u[i] * u[j] / nu2;
  EXPECT_LT(matrix_diff(p, ref), 1e-12);
  EXPECT_EQ(p.rank(), 1);
}

TEST(FiberSpan, ZeroTensorGivesZeroProjector) {
  const ModeProjector p = fiber_span_projector(Tensor(3, 4), 1);
  EXPECT_EQ(p.matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(FiberSpan, AgreementTensorWithUnclusteredVertex) {
  const Partition part({0, 0, 1, -1, 1}, 2, 2);
  const Tensor y = agreement_tensor(part, 3);
  const ModeProjector p = fiber_span_projector(y, 0);
  EXPECT_LT(matrix_diff(p, membership_projector(part)), 1e-10);
  EXPECT_EQ(p.rank(), 2);
}

TEST(AgreementProjector, SingleClusterIsAveraging) {
  const Partition part({0, 0, 0, 0}, 1, 4);
  EXPECT_LT(matrix_diff(agreement_projector(part), Eigen::MatrixXd::Constant(4, 4, 0.25)), 1e-15);
}

TEST(AgreementProjector, SingletonClustersIsIdentityOnClustered) {
  const Partition part({2, 0, -1, 1}, 3, 1);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Identity(4, 4);
  ref(2, 2) = 0.0;
  EXPECT_LT(matrix_diff(agreement_projector(part), ref), 1e-15);
}

TEST(AgreementProjector, MatchesFiberSpanOnEveryMode) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int r = 1 + static_cast<int>(s % 3), k = 1 + static_cast<int>(s % 2) + (s % 5 == 0);
    const int n = r * k + static_cast<int>(s % 2);
    const int m = 2 + static_cast<int>(s % 3);
    const Partition part = random_partition(n, r, k, s);
    const ModeProjector p = agreement_projector(part);
    const Tensor y = agreement_tensor(part, m);
    for (int j = 0; j < m; ++j)
      EXPECT_LT(matrix_diff(fiber_span_projector(y, j), p.matrix()), 1e-10);
    EXPECT_NEAR(p.matrix().trace(), r, 1e-12);
    EXPECT_TRUE(p.is_orthogonal_projector());
  }
}

TEST(ModeProjector, InvariantsOnRandomSpans) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor a = random_tensor(3, 5, s);
    for (int mode = 0; mode < 3; ++mode) {
      const ModeProjector p = fiber_span_projector(a, mode);
      const auto& mat = p.matrix();
      EXPECT_LT((mat - mat.transpose()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((mat * mat - mat).cwiseAbs().maxCoeff(), 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
      for (double ev : es.eigenvalues())
        EXPECT_TRUE(std::abs(ev) < 1e-8 || std::abs(ev - 1.0) < 1e-8) << ev;
    }
  }
}

TEST(ModeProjector, SymmetricTensorHasIdenticalModeSpans) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    // Low-rank symmetric tensor so the span is a proper subspace.
    const auto u = random_unit_vector(5, s), v = random_unit_vector(5, 50 + s);
    const Tensor a = outer_power(u, 3) + 0.5 * outer_power(v, 3);
    const ModeProjector p0 = fiber_span_projector(a, 0);
    for (int mode = 1; mode < 3; ++mode)
      EXPECT_LT(matrix_diff(fiber_span_projector(a, mode), p0.matrix()), 1e-10);
    EXPECT_EQ(p0.rank(), 2);
  }
}

TEST(ModeMultiply, IdentityZeroAndIdempotence) {
  const Tensor a = random_tensor(3, 4, 3);
  EXPECT_EQ(max_abs_diff(mode_multiply(a, ModeProjector::identity(4), 1), a), 0.0);
  EXPECT_EQ(linf_norm(mode_multiply(a, ModeProjector::zero(4), 2)), 0.0);
  const ModeProjector p = agreement_projector(Partition({0, 1, 0, 1}, 2, 2));
  for (int mode = 0; mode < 3; ++mode) {
    const Tensor once = mode_multiply(a, p, mode);
    EXPECT_LT(max_abs_diff(mode_multiply(once, p, mode), once), 1e-10);
  }
  EXPECT_THROW(mode_multiply(a, ModeProjector::identity(3), 0), DimensionError);
}

TEST(ModeMultiply, MatchesLoopOracle) {
  const Tensor a = random_tensor(3, 3, 8);
  Eigen::MatrixXd mat(3, 3);
  mat << 1, 2, 0, -1, 0.5, 3, 0, 0, 1;
  const Tensor b = mode_multiply(a, ModeProjector(mat), 1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) {
        double ref = 0;
        for (int t = 0; t < 3; ++t) ref += mat(j, t) * a({i, t, l});
        EXPECT_NEAR(b({i, j, l}), ref, 1e-14);
      }
}

TEST(QComponent, AgreementTensorIsFixedByQ0) {
  const Partition part({0, 1, 0, -1, 1}, 2, 2);
  const Tensor y = agreement_tensor(part, 3);
  EXPECT_LT(max_abs_diff(q_component(y, y, 0), y), 1e-12);
  for (int i = 1; i <= 3; ++i) EXPECT_LT(linf_norm(q_component(y, y, i)), 1e-12);
  EXPECT_THROW(q_component(y, y, 4), ParameterError);
  EXPECT_THROW(q_component(y, y, -1), ParameterError);
}

TEST(QComponent, ComponentsAreMutuallyOrthogonal) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int m = 2 + static_cast<int>(s % 3);
    const Partition part = random_partition(5, 2, 2, s);
    const Tensor y = agreement_tensor(part, m);
    const Tensor x = random_tensor(m, 5, 100 + s);
    std::vector<Tensor> comps;
    for (int i = 0; i <= m; ++i) comps.push_back(q_component(y, x, i));
    for (int i = 0; i <= m; ++i)
      for (int j = i + 1; j <= m; ++j) EXPECT_NEAR(inner_product(comps[i], comps[j]), 0.0, 1e-9);
  }
}

TEST(QProject, AgreementTensorExamples) {
  const Tensor y = agreement_tensor(Partition({0, 0, 1, 1}, 2, 2), 3);
  EXPECT_LT(max_abs_diff(q_project(y, y), y), 1e-12);
  EXPECT_LT(linf_norm(q_perp_project(y, y)), 1e-12);
  const Tensor x = random_tensor(3, 4, 1);
  EXPECT_LT(max_abs_diff(q_project(y, x) + q_perp_project(y, x), x), 1e-14);
  EXPECT_THROW(q_project(y, Tensor(3, 5)), DimensionError);
}

TEST(QProject, NumpyReferenceValues) {
  const Tensor y = agreement_tensor(Partition({0, 0, 1, 1, -1}, 2, 2), 3);
  const Tensor x = random_symmetric(3, 5, 21);
  const Tensor q = q_project(y, x);
  EXPECT_NEAR(q({0, 1, 4}), -0.08976344256893978, 1e-12);
  EXPECT_NEAR(q({2, 3, 3}), -0.35591748870271944, 1e-12);
  EXPECT_NEAR(linf_norm(q), 1.080263368649834, 1e-12);
}

TEST(QProject, ComplementaryIdempotents) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const int m = 2 + static_cast<int>(s % 3);
    const int n = m == 4 ? 4 : 5;
    const Partition part = random_partition(n, 2, 2, 30 + s);
    const CompositeProjection q(agreement_tensor(part, m));
    const Tensor x = random_tensor(m, n, 200 + s), z = random_tensor(m, n, 300 + s);
    const Tensor qx = q.project(x), px = q.project_perp(x);
    EXPECT_LT(max_abs_diff(q.project(qx), qx), 1e-9);
    EXPECT_LT(max_abs_diff(q.project_perp(px), px), 1e-9);
    EXPECT_LT(linf_norm(q.project(px)), 1e-9);
    EXPECT_NEAR(inner_product(qx, q.project_perp(z)), 0.0, 1e-9);
  }
}

TEST(QProject, GenericReferenceIsIdempotent) {
  const Tensor ref = outer_power(random_unit_vector(4, 1), 3) + outer_power(random_unit_vector(4, 2), 3);
  const Tensor x = random_tensor(3, 4, 5);
  const Tensor qx = q_project(ref, x);
  EXPECT_LT(max_abs_diff(q_project(ref, qx), qx), 1e-9);
}

TEST(QSymmetricExpansion, MatchesGenericProjection) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const int m = 2 + static_cast<int>(s % 3);
    const int n = m == 4 ? 6 : 7;
    const int r = 1 + static_cast<int>(s % 2), k = 2 + static_cast<int>(s % 2);
    const Partition part = random_partition(n, r, k, 400 + s);
    const Tensor x = random_symmetric(m, n, 500 + s);
    EXPECT_LT(max_abs_diff(q_symmetric_expansion(part, x), q_project(agreement_tensor(part, m), x)),
              1e-9);
  }
}

TEST(QSymmetricExpansion, AgreementTensorIsFixed) {
  const Partition part({1, 0, 1, 0, -1, -1}, 2, 2);
  const Tensor y = agreement_tensor(part, 4);
  EXPECT_LT(max_abs_diff(q_symmetric_expansion(part, y), y), 1e-12);
}

TEST(QSymmetricExpansion, MatrixCaseIsPXPlusXPMinusPXP) {
  const Partition part({0, 1, 1, 0, -1}, 2, 2);
  const Eigen::MatrixXd p = agreement_projector(part).matrix();
  const Tensor x = random_symmetric(2, 5, 8);
  Eigen::MatrixXd xm(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) xm(i, j) = x({i, j});
  const Eigen::MatrixXd ref = p * xm + xm * p - p * xm * p;
  const Tensor got = q_symmetric_expansion(part, x);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(got({i, j}), ref(i, j), 1e-12);
}

TEST(ModeProjector, Printable) {
  std::ostringstream os;
  os << ModeProjector::identity(2);
  EXPECT_FALSE(os.str().empty());
}
