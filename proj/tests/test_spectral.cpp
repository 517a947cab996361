#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hyperpart;
using testing_support::random_partition;
using testing_support::random_symmetric;
using testing_support::random_unit_vector;

namespace {

double witness_value(const Tensor& a, const SpectralEstimate& e) {
  return std::abs(contract_full(a, e.witness));
}

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(SpectralOracle, RankOne) {
  const auto u = random_unit_vector(4, 3);
  const auto est = spectral_oracle(outer_power(u, 3));
  EXPECT_NEAR(est.value, 1.0, 1e-9);
  double dot = 0;
  for (int i = 0; i < 4; ++i) dot += u[i] * est.witness[i];
  EXPECT_NEAR(std::abs(dot), 1.0, 1e-6);
  EXPECT_EQ(est.method, SpectralMethod::oracle);
}

TEST(SpectralOracle, AgreementTensor) {
  const Partition part({0, 0, 0, 0}, 1, 4);
  EXPECT_NEAR(spectral_oracle(agreement_tensor(part, 3)).value, 8.0, 1e-8);
}

TEST(SpectralOracle, AgreesWithPowerIterationOnRandom) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Tensor a = random_symmetric(3, 4, 60 + s);
    const double o = spectral_oracle(a).value;
    const double p = power_iteration(a).value;
    EXPECT_NEAR(o, p, 1e-6);
    EXPECT_LE(p, o + 1e-6);
  }
}

TEST(PowerIteration, ZeroTensor) {
  const auto est = power_iteration(Tensor(3, 4));
  EXPECT_EQ(est.value, 0.0);
  EXPECT_NEAR(norm2(est.witness), 1.0, 1e-12);
}

TEST(PowerIteration, AgreementTensorOrderFour) {
  const Partition part({0, 0}, 1, 2);
  EXPECT_NEAR(power_iteration(agreement_tensor(part, 4)).value, 4.0, 1e-6);
}

TEST(PowerIteration, OnesTensor) {
  EXPECT_NEAR(power_iteration(Tensor::ones(3, 3)).value, 5.196152422706632, 1e-6);
}

TEST(PowerIteration, NumpyReferenceValues) {
  EXPECT_NEAR(power_iteration(random_symmetric(3, 4, 5)).value, 2.5786906593766514, 1e-6);
  EXPECT_NEAR(power_iteration(random_symmetric(4, 3, 6)).value, 2.636577189733581, 1e-6);
}

TEST(PowerIteration, NegativeDefiniteEvenOrder) {
  // Maximum of |<A, u^4>| attained on the negative branch.
  const auto u = random_unit_vector(3, 9);
  auto v = random_unit_vector(3, 10);
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += u[i] * v[i];
  double nv = 0.0;
  for (int i = 0; i < 3; ++i) nv += (v[i] -= d * u[i]) * v[i];
  for (auto& c : v) c /= std::sqrt(nv);
  const Tensor a = -2.0 * outer_power(u, 4) + 0.5 * outer_power(v, 4);
  const auto est = power_iteration(a);
  EXPECT_GE(est.value, 2.0 - 1e-9);
  EXPECT_NEAR(witness_value(a, est), est.value, 1e-8);
}

TEST(PowerIteration, OddOrderWitnessIsPositive) {
  const auto u = random_unit_vector(4, 11);
  const Tensor a = -3.0 * outer_power(u, 3);
  const auto est = power_iteration(a);
  EXPECT_NEAR(est.value, 3.0, 1e-9);
  EXPECT_NEAR(contract_full(a, est.witness), 3.0, 1e-8);
}

TEST(SpectralEstimate, WitnessCertifiesValue) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int m = 2 + static_cast<int>(s % 3);
    const Tensor a = random_symmetric(m, 5, 80 + s);
    const auto est = power_iteration(a, {.restarts = 16});
    EXPECT_NEAR(witness_value(a, est), est.value, 1e-8);
    EXPECT_NEAR(norm2(est.witness), 1.0, 1e-12);
    EXPECT_EQ(est.restarts, 16);
  }
}

TEST(PowerIteration, DeterministicForSeed) {
  const Tensor a = random_symmetric(3, 5, 1);
  const auto e1 = power_iteration(a, {.restarts = 8, .seed = 4});
  const auto e2 = power_iteration(a, {.restarts = 8, .seed = 4});
  EXPECT_EQ(e1.value, e2.value);
  EXPECT_EQ(e1.witness, e2.witness);
  EXPECT_THROW(power_iteration(a, {.restarts = 0}), ParameterError);
}

TEST(PowerIteration, AbsolutelyHomogeneous) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const int m = 3 + static_cast<int>(s % 2);
    const Tensor a = random_symmetric(m, 4, 90 + s);
    const PowerIterationOptions o{.restarts = 16, .seed = s};
    const double base = power_iteration(a, o).value;
    for (double c : {-3.0, 0.25, 7.5})
      EXPECT_NEAR(power_iteration(c * a, o).value, std::abs(c) * base, 1e-8 * std::abs(c) * base);
  }
}

TEST(PowerIteration, NeverExceedsOracle) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const int n = 3 + static_cast<int>(s % 2);
    const Tensor a = random_symmetric(3, n, 120 + s);
    EXPECT_LE(power_iteration(a).value, spectral_oracle(a).value + 1e-6);
  }
}

TEST(SpectralUpperHeuristic, Examples) {
  const auto u = random_unit_vector(5, 2);
  EXPECT_NEAR(spectral_upper_heuristic(outer_power(u, 3), 1.0), 1.0, 1e-9);
  EXPECT_EQ(spectral_upper_heuristic(Tensor(3, 4), 1.25), 0.0);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Tensor a = random_symmetric(3, 4, 140 + s);
    EXPECT_GE(spectral_upper_heuristic(a, 1.1), spectral_oracle(a).value);
  }
  EXPECT_THROW(spectral_upper_heuristic(Tensor(3, 2), 0.9), ParameterError);
}

TEST(NuclearUpper, AgreementAtoms) {
  const Partition part({0, 1, 0, 1, 1, 0}, 2, 3);
  const auto atoms = agreement_atoms(part, 3);
  const auto up = nuclear_upper_from_decomposition(atoms, 3);
  EXPECT_NEAR(up.bound, 2 * std::pow(3.0, 1.5), 1e-12);
  EXPECT_LT(linf_norm(up.reconstruction - agreement_tensor(part, 3)), 1e-12);
}

TEST(NuclearUpper, SingleAndOpposingAtoms) {
  const auto u = random_unit_vector(3, 5);
  const std::vector<Atom> one{{-2.5, u}};
  EXPECT_EQ(nuclear_upper_from_decomposition(one, 3).bound, 2.5);
  const std::vector<Atom> pair{{1.5, u}, {-1.5, u}};
  const auto up = nuclear_upper_from_decomposition(pair, 3);
  EXPECT_EQ(up.bound, 3.0);
  EXPECT_LT(linf_norm(up.reconstruction), 1e-15);
}

TEST(NuclearUpper, RejectsNonUnitAtoms) {
  const std::vector<Atom> bad{{1.0, {1.0, 1.0}}};
  EXPECT_THROW(nuclear_upper_from_decomposition(bad, 3), ParameterError);
}

TEST(NuclearLower, Examples) {
  const Partition part({0, 0, 1, 1}, 2, 2);
  const Tensor y = agreement_tensor(part, 3);
  const Tensor w = std::pow(2.0, -1.5) * y;
  EXPECT_NEAR(nuclear_lower_from_witness(y, w), 2 * std::pow(2.0, 1.5), 1e-12);
  EXPECT_EQ(nuclear_lower_from_witness(y, Tensor(3, 4)), 0.0);
  const auto u = random_unit_vector(4, 1);
  const Tensor r1 = outer_power(u, 3);
  EXPECT_NEAR(nuclear_lower_from_witness(r1, r1), 1.0, 1e-12);
  EXPECT_THROW(nuclear_lower_from_witness(y, 2.0 * w), ParameterError);
}

TEST(NuclearBounds, MeetOnAgreementTensors) {
  struct Case {
    int r, k, m;
  };
  for (const Case c : {Case{1, 2, 3}, Case{2, 3, 3}, Case{2, 2, 4}, Case{3, 2, 3}}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const int n = c.r * c.k + static_cast<int>(s);
      const Partition part = random_partition(n, c.r, c.k, s);
      const Tensor y = agreement_tensor(part, c.m);
      const double scale = std::pow(static_cast<double>(c.k), -c.m / 2.0);
      const auto nb = nuclear_bounds(y, scale * y, agreement_atoms(part, c.m));
      const double target = c.r * std::pow(static_cast<double>(c.k), c.m / 2.0);
      EXPECT_LE(nb.lower, nb.upper + 1e-8);
      EXPECT_NEAR(nb.lower, target, 1e-8);
      EXPECT_NEAR(nb.upper, target, 1e-8);
      EXPECT_TRUE(nb.meet(1e-8));
    }
  }
}

TEST(NuclearBounds, DualityInequality) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Tensor a = random_symmetric(3, 4, 160 + s);
    std::vector<Atom> atoms{{1.3, random_unit_vector(4, 170 + s)}, {-0.4, random_unit_vector(4, 180 + s)}};
    const auto up = nuclear_upper_from_decomposition(atoms, 3);
    const double sn = spectral_oracle(a).value;
    EXPECT_LE(std::abs(inner_product(a, up.reconstruction)), sn * up.bound + 1e-8);
  }
}
