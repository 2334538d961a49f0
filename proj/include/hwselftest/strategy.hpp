#pragma once

// Quantum strategies (state + two observable families), Bell values, seeded
// noise, and the robustness residuals that near-optimal strategies must obey.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hwselftest/bell_op.hpp"
#include "hwselftest/errors.hpp"
#include "hwselftest/hw_algebra.hpp"
#include "hwselftest/nu.hpp"
#include "hwselftest/zmod.hpp"

namespace hwst {

struct Strategy {
    PrimeDim d;
    StateVector psi;
    std::vector<ComplexMatrix> A;
    std::vector<ComplexMatrix> B;
    /// Convention the observables are meant to approximate (decides the isometry circuit).
    Convention convention = Convention::conjugate_both;

    Eigen::Index dim_a() const { return A.empty() ? 0 : A[0].rows(); }
    Eigen::Index dim_b() const { return B.empty() ? 0 : B[0].rows(); }

    /// Throws InvalidStrategy unless every documented invariant holds.
    void validate(double tol_unitary = 1e-10, double tol_order = 1e-9, double tol_norm = 1e-10) const {
        const auto dv = d.value();
        if (static_cast<std::int64_t>(A.size()) != dv || static_cast<std::int64_t>(B.size()) != dv)
            throw InvalidStrategy("need exactly d = " + std::to_string(dv) + " observables per party");
        auto check_family = [&](const std::vector<ComplexMatrix>& ops, const char* who) {
            const auto D = ops[0].rows();
            for (std::size_t j = 0; j < ops.size(); ++j) {
                const auto& O = ops[j];
                const std::string tag = std::string(who) + "_" + std::to_string(j);
                if (O.rows() != D || O.cols() != D) throw InvalidStrategy(tag + " has inconsistent shape");
                if (unitarity_defect(O) > tol_unitary) throw InvalidStrategy(tag + " is not unitary");
                if (max_abs(matrix_power(O, dv) - ComplexMatrix::Identity(D, D)) > tol_order)
                    throw InvalidStrategy(tag + "^d != 1");
            }
        };
        check_family(A, "A");
        check_family(B, "B");
        if (psi.size() != dim_a() * dim_b())
            throw InvalidStrategy("state dimension " + std::to_string(psi.size()) + " != dim_A * dim_B");
        if (std::abs(psi.norm() - 1.0) > tol_norm) throw InvalidStrategy("state is not normalised");
    }
};

/// psi = (U_nu (x) 1)|Phi+>, A_j, B_j the HW observables T_(1,j) in the convention
/// that attains d(d-1).
inline Strategy ideal_strategy(PrimeDim dim, const NuSpec& nu) {
    if (!(dim == nu.dim())) throw SpecMismatch("nu is defined over Z_" + std::to_string(nu.dim().value()));
    const Convention c = resolve_ideal_convention(nu);
    return {dim, rotated_bell_state(nu), ideal_observables(dim, alice_conjugated(c)),
            ideal_observables(dim, bob_conjugated(c)), c};
}

/// P_{n,k} = sum_j g(j,k,n) A_j^n on Alice's side, reused by the value and the residuals.
inline StateVector bell_apply(const BellCoeffs& g, const PowerTable& pa, const PowerTable& pb, const StateVector& psi) {
    const auto d = g.dim().value();
    const auto da = pa[0][0].rows(), db = pb[0][0].rows();
    StateVector out = StateVector::Zero(psi.size());
    for (std::int64_t n = 1; n < d; ++n)
        for (std::int64_t k = 0; k < d; ++k) {
            ComplexMatrix P = ComplexMatrix::Zero(da, da);
            for (std::int64_t j = 0; j < d; ++j) P += g(n, j, k) * pa[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)];
            out += apply_right(pb[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)], apply_left(P, psi, db), da);
        }
    return out;
}

struct BellValue {
    double value;
    double imag;
};

inline BellValue bell_value_full(const Strategy& s, const NuSpec& nu) {
    if (!(s.d == nu.dim())) throw DimensionMismatch("strategy and nu over different d");
    if (s.psi.size() != s.dim_a() * s.dim_b()) throw DimensionMismatch("state does not match operator dimensions");
    const auto g = bell_coeffs(nu);
    const cplx v = s.psi.dot(bell_apply(*g, power_table(s.A, s.d), power_table(s.B, s.d), s.psi));
    return {v.real(), v.imag()};
}

inline double bell_value(const Strategy& s, const NuSpec& nu) { return bell_value_full(s, nu).value; }

enum class NoiseKind { state_perturbation, observable_conjugation, both };

inline std::string to_string(NoiseKind k) {
    switch (k) {
    case NoiseKind::state_perturbation: return "state";
    case NoiseKind::observable_conjugation: return "observables";
    case NoiseKind::both: return "both";
    }
    return "?";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "state") return NoiseKind::state_perturbation;
    if (s == "observables") return NoiseKind::observable_conjugation;
    if (s == "both") return NoiseKind::both;
    throw Error("unknown noise kind '" + s + "'");
}

struct NoiseSpec {
    NoiseKind kind = NoiseKind::both;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline ComplexMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    ComplexMatrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double re = N(rng);
            const double im = N(rng);
            M(i, j) = cplx(re, im);
        }
    return M;
}

// exp(iH) for H = V diag(l) V^dagger with ||H|| = m.
inline ComplexMatrix random_near_identity(Eigen::Index D, double m, std::mt19937_64& rng) {
    const ComplexMatrix G = random_gaussian(D, D, rng);
    const ComplexMatrix H = 0.5 * (G + G.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    const double scale = m / es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXcd ph(D);
    for (Eigen::Index i = 0; i < D; ++i) ph(i) = std::polar(1.0, scale * es.eigenvalues()(i));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// Seeded noise. Observables are conjugated by exp(iH), ||H|| = magnitude (A_0..A_{d-1}
/// then B_0..B_{d-1}), then the state becomes normalize(psi + magnitude eta) with eta a
/// Gaussian unit vector. All draws come from one std::mt19937_64 seeded with noise.seed.
inline Strategy perturb(const Strategy& s, const NoiseSpec& noise) {
    if (noise.magnitude < 0.0) throw Error("noise magnitude must be >= 0");
    if (noise.magnitude == 0.0) return s;
    std::mt19937_64 rng(noise.seed);
    Strategy out = s;
    if (noise.kind != NoiseKind::state_perturbation) {
        for (auto* fam : {&out.A, &out.B})
            for (auto& O : *fam) {
                const ComplexMatrix U = detail::random_near_identity(O.rows(), noise.magnitude, rng);
                O = U * O * U.adjoint();
            }
    }
    if (noise.kind != NoiseKind::observable_conjugation) {
        StateVector eta = detail::random_gaussian(out.psi.size(), 1, rng).col(0);
        eta.normalize();
        out.psi = (out.psi + noise.magnitude * eta).normalized();
    }
    return out;
}

struct TwistedResidual {
    char party;  // 'A' or 'B'
    std::int64_t n, m, k, l;
    double pair;
    double commutator;
};

struct ResidualReport {
    double bell_value = 0.0;
    double epsilon = 0.0;
    std::vector<double> c_norms;  // ||C_{n,j} psi||, (n, j) row-major
    std::vector<double> d_norms;  // ||D_{n,j} psi||
    double max_c_norm = 0.0;
    std::vector<TwistedResidual> twisted;
    double max_pair = 0.0;
    double max_commutator = 0.0;
    double gamma = 0.0;           // gamma(nu) = max_{n,j} sum_k |g|
    double gamma_observed = 0.0;  // max_{n,j} ||P_{n,j}|| for this strategy
    double c_bound = 0.0, pair_bound = 0.0, commutator_bound = 0.0;
    bool c_ok = false, pair_ok = false, commutator_ok = false;

    bool all_ok() const { return c_ok && pair_ok && commutator_ok; }
};

/// Residuals of the SOPO witnesses and the twisted relations
///   B_k^n B_l^m ~ omega^{-2^{-1} n m (k-l)} B^{n+m}_{(n+m)^{-1}(nk+ml)},
///   B_k^n B_l^m ~ omega^{-n m (k-l)} B_l^m B_k^n
/// (both parties), each measured as a vector norm on psi, against the bounds
/// sqrt(eps), sqrt(d) sqrt(eps)(gamma+2) and twice that.
inline ResidualReport residuals(const Strategy& s, const NuSpec& nu, double tol = 1e-9) {
    const PrimeDim dim = s.d;
    const auto d = dim.value();
    const auto h = half(dim);
    const auto g = bell_coeffs(nu);
    const Omega w(dim);
    const auto pa = power_table(s.A, dim), pb = power_table(s.B, dim);
    const auto da = s.dim_a(), db = s.dim_b();

    ResidualReport r;
    r.bell_value = s.psi.dot(bell_apply(*g, pa, pb, s.psi)).real();
    r.epsilon = tsirelson_value(dim) - r.bell_value;
    const double eps = std::max(r.epsilon, 0.0);

    // SOPO witnesses on the actual operators.
    const std::int64_t nmax = d == 3 ? 1 : (d - 1) / 2;
    for (std::int64_t n = 1; n <= nmax; ++n)
        for (std::int64_t j = 0; j < d; ++j) {
            ComplexMatrix sb = ComplexMatrix::Zero(db, db), sa = ComplexMatrix::Zero(da, da);
            for (std::int64_t k = 0; k < d; ++k) {
                sb += std::conj((*g)(n, j, k)) * pb[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)].adjoint();
                sa += std::conj((*g)(n, k, j)) * pa[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)].adjoint();
            }
            const StateVector c = apply_left(pa[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)], s.psi, db) -
                                  apply_right(sb, s.psi, da);
            const StateVector dd = apply_right(pb[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)], s.psi, da) -
                                   apply_left(sa, s.psi, db);
            r.c_norms.push_back(c.norm());
            r.d_norms.push_back(dd.norm());
            r.max_c_norm = std::max({r.max_c_norm, c.norm(), dd.norm()});
        }

    r.gamma = g->gamma();
    for (std::int64_t n = 1; n < d; ++n)
        for (std::int64_t j = 0; j < d; ++j) {
            ComplexMatrix P = ComplexMatrix::Zero(db, db);
            for (std::int64_t k = 0; k < d; ++k) P += (*g)(n, j, k) * pb[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
            Eigen::JacobiSVD<ComplexMatrix> svd(P);
            r.gamma_observed = std::max(r.gamma_observed, svd.singularValues()(0));
        }

    for (char party : {'A', 'B'}) {
        const auto& pw = party == 'A' ? pa : pb;
        auto act = [&](const ComplexMatrix& M) {
            return party == 'A' ? apply_left(M, s.psi, db) : apply_right(M, s.psi, da);
        };
        for (std::int64_t n = 1; n < d; ++n)
            for (std::int64_t m = 1; m < d; ++m) {
                if (dim.reduce(n + m) == 0) continue;
                const auto inm = inv_mod(n + m, dim);
                for (std::int64_t k = 0; k < d; ++k)
                    for (std::int64_t l = 0; l < d; ++l) {
                        const auto& Bkn = pw[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
                        const auto& Blm = pw[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)];
                        const auto q = dim.reduce(inm * dim.reduce(n * k + m * l));
                        const auto nm = dim.reduce(n * m);
                        const ComplexMatrix prod = Bkn * Blm;
                        const ComplexMatrix R1 =
                            prod - w(-h * nm % d * (k - l)) * pw[static_cast<std::size_t>(q)][static_cast<std::size_t>(dim.reduce(n + m))];
                        const ComplexMatrix R2 = prod - w(-nm * (k - l)) * (Blm * Bkn);
                        TwistedResidual t{party, n, m, k, l, act(R1).norm(), act(R2).norm()};
                        r.max_pair = std::max(r.max_pair, t.pair);
                        r.max_commutator = std::max(r.max_commutator, t.commutator);
                        r.twisted.push_back(t);
                    }
            }
    }

    const double sd = std::sqrt(static_cast<double>(d));
    r.c_bound = std::sqrt(eps);
    r.pair_bound = sd * std::sqrt(eps) * (r.gamma + 2.0);
    r.commutator_bound = 2.0 * r.pair_bound;
    r.c_ok = r.max_c_norm <= r.c_bound + tol;
    r.pair_ok = r.max_pair <= r.pair_bound + tol;
    r.commutator_ok = r.max_commutator <= r.commutator_bound + tol;
    return r;
}

struct QutritCheck {
    std::string name;
    double value;
    double bound;
    bool ok;
};

struct QutritReport {
    double epsilon = 0.0;
    int k_star = 1;
    bool in_regime = true;
    std::vector<QutritCheck> checks;
    bool all_ok() const {
        for (const auto& c : checks)
            if (!c.ok) return false;
        return true;
    }
};

/// eps < (72(sqrt3 + 2))^{-2}: the regime in which the qutrit chain is claimed.
inline double qutrit_regime_limit() {
    const double c = 72.0 * (std::sqrt(3.0) + 2.0);
    return 1.0 / (c * c);
}

/// Bob-side anticommutator system, commutation elements Q, Q', Q'' and their
/// spectrum chain, each against its bound (multiples of sqrt(eps)(sqrt3 + 2)).
inline QutritReport qutrit_q_elements(const Strategy& s, const NuSpec& nu, double tol = 1e-9) {
    if (s.d.value() != 3) throw WrongDim("commutation elements are defined for d = 3 only");
    const auto da = s.dim_a(), db = s.dim_b();
    const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    const auto& B = s.B;
    std::vector<ComplexMatrix> B2;
    for (const auto& b : B) B2.push_back(b * b);
    const ComplexMatrix I = ComplexMatrix::Identity(db, db);
    auto nrm = [&](const ComplexMatrix& M) { return apply_right(M, s.psi, da).norm(); };
    auto anti = [](const ComplexMatrix& X, const ComplexMatrix& Y) -> ComplexMatrix { return X * Y + Y * X; };

    QutritReport r;
    r.epsilon = tsirelson_value(s.d) - bell_value(s, nu);
    r.in_regime = r.epsilon < qutrit_regime_limit();
    const double c = std::sqrt(std::max(r.epsilon, 0.0)) * (std::sqrt(3.0) + 2.0);
    auto add = [&](std::string name, double v, double bound) { r.checks.push_back({std::move(name), v, bound, v <= bound + tol}); };

    const int triples[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
    for (const auto& t : triples) {
        const auto tag = std::to_string(t[0]) + std::to_string(t[1]) + std::to_string(t[2]);
        add("anticomm_sq_" + tag, nrm(anti(B2[t[0]], B2[t[1]]) + B[t[2]]), 3.0 * c);
        add("anticomm_" + tag, nrm(anti(B[t[0]], B[t[1]]) + B2[t[2]]), 3.0 * c);
    }
    const ComplexMatrix Q = B[0] * B[1] * B2[0] * B2[1];
    const ComplexMatrix Qp = B[2] * B[0] * B2[2] * B2[0];
    const ComplexMatrix Qpp = B[1] * B[2] * B2[1] * B2[2];
    const double q1 = nrm(Q - w * I), q2 = nrm(Q - w * w * I);
    r.k_star = q1 <= q2 ? 1 : 2;
    add("Q_eigen", std::min(q1, q2), 36.0 * c);
    add("Q_cubed", nrm(Q * Q * Q - I), 36.0 * c);
    add("Q_minus_Qp", nrm(Q - Qp), 9.0 * c);
    add("Q_minus_Qpp", nrm(Q - Qpp), 9.0 * c);
    add("Qp_minus_Qpp", nrm(Qp - Qpp), 9.0 * c);
    add("Q_cyclotomic", nrm(Q + Q.adjoint() + I), 6.0 * c);
    const int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (const auto& p : pairs)
        add("twisted_" + std::to_string(p[0]) + std::to_string(p[1]), nrm(B[p[0]] * B[p[1]] - w * B[p[1]] * B[p[0]]), 9.0 * c);
    return r;
}

} // namespace hwst
