#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hwselftest/strategy.hpp"
#include "oracles.hpp"

using namespace hwst;

TEST(IdealStrategy, ReachesTsirelson) {
    for (int d : {3, 5, 7}) {
        const PrimeDim dim(d);
        const auto nu = NuSpec::canonical(dim);
        const auto s = ideal_strategy(dim, nu);
        EXPECT_NO_THROW(s.validate());
        const auto v = bell_value_full(s, nu);
        EXPECT_NEAR(v.value, d * (d - 1.0), 1e-9);
        EXPECT_LE(std::abs(v.imag), 1e-9);
        EXPECT_LE(max_abs(matrix_power(s.A[0], d) - ComplexMatrix::Identity(d, d)), 1e-10);
    }
}

TEST(BellValue, ProductStateMatchesTermByTermSum) {
    const PrimeDim d3(3);
    const auto nu = NuSpec::canonical(d3);
    auto s = ideal_strategy(d3, nu);
    s.psi = StateVector::Zero(9);
    s.psi(0) = 1.0;
    const auto ref = oracle::bell(s.A, s.B, nu.phases());
    EXPECT_NEAR(bell_value(s, nu), s.psi.dot(ref * s.psi).real(), 1e-12);
}

TEST(BellValue, RandomStrategiesAgreeWithOracleAndRespectTsirelson) {
    for (int d : {3, 5}) {
        const PrimeDim dim(d);
        const auto nu = NuSpec::canonical(dim);
        const auto ideal = ideal_strategy(dim, nu);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto s = perturb(ideal, {NoiseKind::both, 0.7, seed});
            const auto ref = oracle::bell(s.A, s.B, nu.phases());
            EXPECT_NEAR(bell_value(s, nu), s.psi.dot(ref * s.psi).real(), 1e-10);
            EXPECT_LE(bell_value(s, nu), d * (d - 1.0) + 1e-7);
        }
    }
}

TEST(BellValue, LargerRandomSpacesNeverExceedTsirelson) {
    // Order-d unitaries V diag(omega^m) V^dagger on dimension up to 3d.
    std::mt19937_64 rng(11);
    for (int d : {3, 5}) {
        const PrimeDim dim(d);
        const auto nu = NuSpec::canonical(dim);
        for (int D : {d, 2 * d, 3 * d}) {
            auto random_obs = [&] {
                ComplexMatrix G(D, D);
                std::normal_distribution<double> N;
                for (int i = 0; i < D; ++i)
                    for (int j = 0; j < D; ++j) G(i, j) = cplx(N(rng), N(rng));
                Eigen::HouseholderQR<ComplexMatrix> qr(G);
                const ComplexMatrix V = qr.householderQ();
                std::uniform_int_distribution<int> m(0, d - 1);
                Eigen::VectorXcd ev(D);
                for (int i = 0; i < D; ++i) ev(i) = omega_pow(dim, m(rng));
                return ComplexMatrix(V * ev.asDiagonal() * V.adjoint());
            };
            Strategy s{dim, StateVector::Zero(D * D), {}, {}, Convention::conjugate_both};
            for (int j = 0; j < d; ++j) {
                s.A.push_back(random_obs());
                s.B.push_back(random_obs());
            }
            std::normal_distribution<double> N;
            for (int i = 0; i < D * D; ++i) s.psi(i) = cplx(N(rng), N(rng));
            s.psi.normalize();
            EXPECT_NO_THROW(s.validate());
            EXPECT_LE(bell_value(s, nu), d * (d - 1.0) + 1e-7);
        }
    }
}

TEST(Strategy, ValidationRejectsBrokenInputs) {
    const PrimeDim d3(3);
    const auto good = ideal_strategy(d3, NuSpec::canonical(d3));
    auto s = good;
    s.A[1] *= 2.0;
    EXPECT_THROW(s.validate(), InvalidStrategy);
    s = good;
    s.B[0] = ComplexMatrix::Identity(3, 3) * omega_pow(PrimeDim(5), 1);  // unitary but order 5
    EXPECT_THROW(s.validate(), InvalidStrategy);
    s = good;
    s.psi *= 2.0;
    EXPECT_THROW(s.validate(), InvalidStrategy);
    s = good;
    s.A.pop_back();
    EXPECT_THROW(s.validate(), InvalidStrategy);
}

TEST(BellValue, DimensionMismatch) {
    const PrimeDim d3(3);
    auto s = ideal_strategy(d3, NuSpec::canonical(d3));
    s.psi = StateVector::Zero(10);
    EXPECT_THROW(bell_value(s, NuSpec::canonical(d3)), DimensionMismatch);
}

TEST(Perturb, ZeroMagnitudeIsBitExact) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    const auto p = perturb(s, {NoiseKind::both, 0.0, 42});
    EXPECT_TRUE(p.psi == s.psi);
    for (int j = 0; j < 5; ++j) EXPECT_TRUE(p.A[j] == s.A[j] && p.B[j] == s.B[j]);
    EXPECT_EQ(bell_value(p, nu), bell_value(s, nu));
}

TEST(Perturb, DeterministicAndPreservesObservableStructure) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    const auto p1 = perturb(s, {NoiseKind::both, 1e-2, 9});
    const auto p2 = perturb(s, {NoiseKind::both, 1e-2, 9});
    EXPECT_TRUE(p1.psi == p2.psi);
    EXPECT_TRUE(p1.A[3] == p2.A[3]);
    EXPECT_NO_THROW(p1.validate());
    for (const auto& O : p1.A) EXPECT_LE(max_abs(matrix_power(O, 5) - ComplexMatrix::Identity(5, 5)), 1e-9);
    const auto p3 = perturb(s, {NoiseKind::both, 1e-2, 10});
    EXPECT_FALSE(p1.psi == p3.psi);
}

TEST(Perturb, NoiseKindsTouchOnlyTheirPart) {
    const PrimeDim d5(5);
    const auto s = ideal_strategy(d5, NuSpec::canonical(d5));
    const auto st = perturb(s, {NoiseKind::state_perturbation, 1e-2, 1});
    EXPECT_TRUE(st.A[0] == s.A[0]);
    EXPECT_FALSE(st.psi == s.psi);
    const auto ob = perturb(s, {NoiseKind::observable_conjugation, 1e-2, 1});
    EXPECT_TRUE(ob.psi == s.psi);
    EXPECT_FALSE(ob.A[0] == s.A[0]);
}

TEST(Perturb, DeficitIsQuadraticInMagnitude) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    std::vector<double> eps;
    for (double m : {1e-2, 1e-3, 1e-4}) eps.push_back(20.0 - bell_value(perturb(s, {NoiseKind::both, m, 5}), nu));
    EXPECT_GT(eps[1], 0.0);
    // log-log slope ~ 2 per decade
    EXPECT_NEAR(std::log10(eps[0] / eps[1]), 2.0, 0.1);
    EXPECT_NEAR(std::log10(eps[1] / eps[2]), 2.0, 0.1);
}

TEST(Residuals, IdealStrategyIsExact) {
    for (int d : {3, 5, 7}) {
        const PrimeDim dim(d);
        const auto nu = NuSpec::canonical(dim);
        const auto r = residuals(ideal_strategy(dim, nu), nu);
        EXPECT_LE(std::abs(r.epsilon), 1e-9);
        EXPECT_LE(r.max_c_norm, 1e-9);
        EXPECT_LE(r.max_pair, 1e-9);
        EXPECT_LE(r.max_commutator, 1e-9);
        EXPECT_TRUE(r.all_ok());
        EXPECT_EQ(r.c_norms.size(), static_cast<std::size_t>(d == 3 ? 3 : d * (d - 1) / 2));
    }
}

TEST(Residuals, IdealTwistedRelationsAsMatrices) {
    for (int d : {3, 5, 7}) {
        const PrimeDim dim(d);
        const auto s = ideal_strategy(dim, NuSpec::canonical(dim));
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l)
                EXPECT_LE(max_abs(s.B[k] * s.B[l] - omega_pow(dim, -(k - l)) * s.B[l] * s.B[k]), 1e-10);
    }
}

TEST(Residuals, GammaIsSqrtD) {
    for (int d : {5, 7}) {
        const PrimeDim dim(d);
        const auto nu = NuSpec::canonical(dim);
        const auto r = residuals(ideal_strategy(dim, nu), nu);
        EXPECT_NEAR(r.gamma, std::sqrt(static_cast<double>(d)), 1e-9);
        EXPECT_LE(r.gamma_observed, r.gamma + 1e-9);
    }
}

TEST(Residuals, PerturbedFlagsHold) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = residuals(perturb(s, {NoiseKind::both, 1e-3, seed}), nu);
        EXPECT_GT(r.epsilon, 0.0);
        EXPECT_TRUE(r.all_ok()) << seed;
    }
}

TEST(Residuals, HalvingNoiseKeepsFlagsTrue) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    const auto s = ideal_strategy(d5, nu);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (double m : {2e-2, 1e-2, 5e-3}) {
            const auto big = residuals(perturb(s, {NoiseKind::both, m, seed}), nu);
            const auto small = residuals(perturb(s, {NoiseKind::both, m / 2, seed}), nu);
            if (big.all_ok()) {
                EXPECT_TRUE(small.all_ok());
            }
        }
}

TEST(QutritQ, IdealElements) {
    const PrimeDim d3(3);
    const auto nu = NuSpec::canonical(d3);
    const auto s = ideal_strategy(d3, nu);
    const auto q = qutrit_q_elements(s, nu);
    EXPECT_EQ(q.k_star, 1);
    for (const auto& c : q.checks) EXPECT_LE(c.value, 1e-9) << c.name;
    const ComplexMatrix Q = s.B[0] * s.B[1] * s.B[0] * s.B[0] * s.B[1] * s.B[1];
    const StateVector Qpsi = apply_right(Q, s.psi, 3);
    EXPECT_LE((Qpsi - omega_pow(d3, 1) * s.psi).norm(), 1e-9);
}

TEST(QutritQ, PerturbedInRegimeFlagsHold) {
    const PrimeDim d3(3);
    const auto nu = NuSpec::canonical(d3);
    const auto s = ideal_strategy(d3, nu);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto q = qutrit_q_elements(perturb(s, {NoiseKind::both, 1e-4, seed}), nu);
        EXPECT_TRUE(q.in_regime);
        EXPECT_TRUE(q.all_ok()) << seed;
    }
}

TEST(QutritQ, WrongDim) {
    const PrimeDim d5(5);
    const auto nu = NuSpec::canonical(d5);
    EXPECT_THROW(qutrit_q_elements(ideal_strategy(d5, nu), nu), WrongDim);
}
