#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hwselftest/selftest.hpp"

using namespace hwst;

TEST(Isometry, IdealOpsGiveIsometry) {
    for (int d : {3, 5}) {
        const PrimeDim dim(d);
        const auto s = ideal_strategy(dim, NuSpec::canonical(dim));
        const auto V = build_isometry(s.A, dim, true);
        EXPECT_EQ(V.rows(), d * d);
        EXPECT_LE(max_abs(V.adjoint() * V - ComplexMatrix::Identity(d, d)), 1e-9);
    }
}

TEST(Isometry, PreservesNormsOfRandomVectors) {
    const PrimeDim d5(5);
    const auto s = perturb(ideal_strategy(d5, NuSpec::canonical(d5)), {NoiseKind::both, 0.3, 4});
    const auto V = build_isometry(s.A, d5, true);
    std::mt19937_64 rng(0);
    std::normal_distribution<double> N;
    for (int t = 0; t < 100; ++t) {
        StateVector x(5);
        for (int i = 0; i < 5; ++i) x(i) = cplx(N(rng), N(rng));
        EXPECT_NEAR((V * x).norm(), x.norm(), 1e-10);
    }
}

TEST(Isometry, EmbeddedOpsOnLargerSpace) {
    const PrimeDim d3(3);
    const auto s = ideal_strategy(d3, NuSpec::canonical(d3));
    std::vector<ComplexMatrix> ops;
    for (const auto& a : s.A) {
        ComplexMatrix big = ComplexMatrix::Zero(6, 6);
        big.topLeftCorner(3, 3) = a;
        big.bottomRightCorner(3, 3) = ComplexMatrix::Identity(3, 3);
        ops.push_back(big);
    }
    const auto V = build_isometry(ops, d3, true);
    EXPECT_EQ(V.rows(), 18);
    EXPECT_EQ(V.cols(), 6);
    EXPECT_LE(max_abs(V.adjoint() * V - ComplexMatrix::Identity(6, 6)), 1e-9);
}

TEST(Isometry, RejectsNonUnitary) {
    const PrimeDim d3(3);
    auto s = ideal_strategy(d3, NuSpec::canonical(d3));
    s.A[2] *= 1.5;
    EXPECT_THROW(build_isometry(s.A, d3, true), NonUnitaryOps);
}

TEST(Extract, IdealIsExact) {
    for (int d : {3, 5, 7, 11}) {
        const PrimeDim dim(d);
        const auto nu = NuSpec::canonical(dim);
        const auto r = extract(ideal_strategy(dim, nu), nu);
        EXPECT_LE(r.state_distance, 1e-9) << d;
        EXPECT_LE(r.max_op_distance, 1e-9) << d;
        EXPECT_NEAR(r.aux_norm, 1.0, 1e-9);
        EXPECT_EQ(r.op_distances.size(), static_cast<std::size_t>(2 * d * (d - 1)));
        EXPECT_TRUE(r.bound_satisfied);
    }
}

TEST(Extract, IdealInLargerSpaceIsExact) {
    // A_j (+) 1 on C^3 (+) C^3 with the state living in the first block.
    const PrimeDim d3(3);
    const auto nu = NuSpec::canonical(d3);
    const auto s = ideal_strategy(d3, nu);
    Strategy big{d3, StateVector::Zero(36), {}, {}, s.convention};
    auto embed = [](const ComplexMatrix& a) {
        ComplexMatrix m = ComplexMatrix::Zero(6, 6);
        m.topLeftCorner(3, 3) = a;
        m.bottomRightCorner(3, 3) = ComplexMatrix::Identity(3, 3);
        return m;
    };
    for (int j = 0; j < 3; ++j) {
        big.A.push_back(embed(s.A[j]));
        big.B.push_back(embed(s.B[j]));
    }
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) big.psi(i * 6 + k) = s.psi(i * 3 + k);
    big.validate();
    const auto r = extract(big, nu);
    EXPECT_LE(r.state_distance, 1e-9);
    EXPECT_LE(r.max_op_distance, 1e-9);
}

TEST(Extract, PerturbedWithinBound) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    const auto r = extract(perturb(s, {NoiseKind::both, 1e-3, 3}), nu);
    EXPECT_GT(r.state_distance, 0.0);
    EXPECT_LE(r.state_distance, r.delta_bound);
    EXPECT_TRUE(r.bound_satisfied);
}

TEST(Extract, MedianDistanceGrowsWithNoise) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    std::vector<double> medians;
    for (double m : {1e-4, 1e-3, 1e-2}) {
        std::vector<double> v;
        for (std::uint64_t seed = 0; seed < 9; ++seed) v.push_back(extract(perturb(s, {NoiseKind::both, m, seed}), nu).state_distance);
        std::nth_element(v.begin(), v.begin() + 4, v.end());
        medians.push_back(v[4]);
    }
    EXPECT_LT(medians[0], medians[1]);
    EXPECT_LT(medians[1], medians[2]);
}

TEST(TheoremBound, Values) {
    const auto b5 = theorem_bound(PrimeDim(5), 1e-4);
    EXPECT_NEAR(b5.mu, std::sqrt(5.0) * (std::sqrt(5.0) + 2.0), 1e-12);
    EXPECT_NEAR(b5.mu, 9.472136, 1e-6);
    EXPECT_NEAR(b5.delta, 0.01 * 20 * (b5.mu * 4.2 + 1), 1e-12);
    EXPECT_NEAR(b5.delta, 8.1566, 1e-4);
    EXPECT_FALSE(b5.out_of_regime);
    EXPECT_EQ(theorem_bound(PrimeDim(7), 0.0).delta, 0.0);
    EXPECT_THROW(theorem_bound(PrimeDim(5), -1.0), Error);
}

TEST(TheoremBound, QutritRegime) {
    const double lim = qutrit_regime_limit();
    EXPECT_NEAR(lim, 1.0 / std::pow(72.0 * (std::sqrt(3.0) + 2.0), 2), 1e-20);
    EXPECT_TRUE(theorem_bound(PrimeDim(3), lim).out_of_regime);
    EXPECT_FALSE(theorem_bound(PrimeDim(3), lim * 0.99).out_of_regime);
    const auto b = theorem_bound(PrimeDim(3), 1e-6);
    EXPECT_NEAR(b.mu, 9e-3 * (std::sqrt(3.0) + 2.0), 1e-15);
}

TEST(PhaseFreeDistance, IgnoresGlobalPhase) {
    StateVector v(2);
    v << cplx(0.6, 0), cplx(0, 0.8);
    EXPECT_LE(phase_free_distance(std::polar(1.0, 1.234) * v, v), 1e-15);
    EXPECT_NEAR(phase_free_distance(v, StateVector::Zero(2)), 1.0, 1e-15);
}
