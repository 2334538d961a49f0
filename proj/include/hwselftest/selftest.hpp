#pragma once

// SWAP-type extraction isometries built from a party's own observables, the
// extraction distances, and the robustness bound delta(eps).

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hwselftest/bell_op.hpp"
#include "hwselftest/errors.hpp"
#include "hwselftest/hw_algebra.hpp"
#include "hwselftest/strategy.hpp"

namespace hwst {

/// The isometry H -> C^d (x) H (ancilla first, row-major) as a (d D) x D matrix:
///   |0> -> F -> ctrl_j omega^{-2^{-1} j} A_0^dagger A_j -> F^dagger -> ctrl_n (A_0^n)^dagger.
/// For observables approximating T_(1,j)^* the circuit is complex-conjugated
/// (F <-> F^dagger, omega^{-2^{-1} j} -> omega^{+2^{-1} j}).
inline ComplexMatrix build_isometry(const std::vector<ComplexMatrix>& ops, PrimeDim dim, bool conjugated,
                                    double tol = 1e-9) {
    const auto d = dim.value();
    if (static_cast<std::int64_t>(ops.size()) != d) throw DimensionMismatch("need exactly d observables");
    const auto D = ops[0].rows();
    for (const auto& O : ops)
        if (O.rows() != D || O.cols() != D || unitarity_defect(O) > tol)
            throw NonUnitaryOps("isometry needs unitary observables of one shape");

    const Omega w(dim);
    const auto h = half(dim);
    const ComplexMatrix F = fourier(dim);
    const ComplexMatrix first = conjugated ? ComplexMatrix(F.adjoint()) : F;
    const ComplexMatrix second = conjugated ? F : ComplexMatrix(F.adjoint());
    const ComplexMatrix A0d = ops[0].adjoint();

    // Layers [1]-[2]: ancilla amplitude first(j, 0), then the controlled phase gate.
    std::vector<ComplexMatrix> branch(static_cast<std::size_t>(d));
    for (std::int64_t j = 0; j < d; ++j)
        branch[static_cast<std::size_t>(j)] = first(j, 0) * w(conjugated ? h * j : -h * j) * (A0d * ops[static_cast<std::size_t>(j)]);

    // Layers [3]-[4]: mix the ancilla, then undo A_0^n on branch n.
    ComplexMatrix V = ComplexMatrix::Zero(d * D, D);
    ComplexMatrix A0n_d = ComplexMatrix::Identity(D, D);
    for (std::int64_t n = 0; n < d; ++n) {
        ComplexMatrix blk = ComplexMatrix::Zero(D, D);
        for (std::int64_t j = 0; j < d; ++j) blk += second(n, j) * branch[static_cast<std::size_t>(j)];
        V.block(n * D, 0, D, D) = A0n_d * blk;
        A0n_d = A0n_d * A0d;
    }
    return V;
}

struct Bound {
    double mu;
    double delta;
    bool out_of_regime;
};

/// delta = sqrt(eps) d(d-1)(mu (4 + 1/d) + 1), mu = sqrt(d)(sqrt(d)+2) for d > 3 and
/// 9 sqrt(eps)(sqrt3 + 2) for d = 3 (valid only for eps < (72(sqrt3+2))^{-2}).
inline Bound theorem_bound(PrimeDim dim, double epsilon) {
    if (epsilon < 0.0) throw Error("epsilon must be >= 0");
    const double d = static_cast<double>(dim.value());
    const double se = std::sqrt(epsilon);
    Bound b{};
    if (dim.value() == 3) {
        b.mu = 9.0 * se * (std::sqrt(3.0) + 2.0);
        b.out_of_regime = epsilon >= qutrit_regime_limit();
    } else {
        b.mu = std::sqrt(d) * (std::sqrt(d) + 2.0);
        b.out_of_regime = false;
    }
    b.delta = se * d * (d - 1.0) * (b.mu * (4.0 + 1.0 / d) + 1.0);
    return b;
}

/// ||v - e^{i a} w|| minimised over a.
/// The optimum is a = arg<w|v>; evaluated as a difference, not via the norm
/// identity, which loses half the digits near zero.
inline double phase_free_distance(const StateVector& v, const StateVector& w) {
    const cplx ov = w.dot(v);
    const cplx ph = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx(1.0);
    return (v - ph * w).norm();
}

struct OpDistance {
    char party;
    std::int64_t u;
    std::int64_t v;
    double distance;
};

struct IsometryReport {
    double epsilon = 0.0;
    double state_distance = 0.0;
    std::vector<OpDistance> op_distances;
    double max_op_distance = 0.0;
    double delta_bound = 0.0;
    double mu = 0.0;
    bool out_of_regime = false;
    bool bound_satisfied = false;
    double aux_norm = 0.0;
    Convention convention = Convention::conjugate_both;
};

namespace detail {

// (V_A (x) V_B) x for bipartite x, reordered to (ancA, ancB, H_A, H_B).
inline StateVector apply_isometries(const ComplexMatrix& VA, const ComplexMatrix& VB, const StateVector& x,
                                    Eigen::Index d, Eigen::Index da, Eigen::Index db) {
    using RM = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RM> X(x.data(), da, db);
    const RM Y = VA * X * VB.transpose();  // rows (ancA, H_A), cols (ancB, H_B)
    StateVector out(d * d * da * db);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            for (Eigen::Index i = 0; i < da; ++i)
                for (Eigen::Index k = 0; k < db; ++k) out(((a * d + b) * da + i) * db + k) = Y(a * da + i, b * db + k);
    return out;
}

} // namespace detail

/// Extracts the reference state from the strategy and measures how far the result
/// is from Phi_nu (x) aux, aux = d^{-1/2} sum_t omega^{-+2^{-1} t} (1 (x) B_0^dagger B_t) psi
/// (sign per Bob's convention), plus the operator mapping for every A_u^v, B_u^v, v != 0.
inline IsometryReport extract(const Strategy& s, const NuSpec& nu, double tol = 1e-9) {
    const PrimeDim dim = s.d;
    const auto d = dim.value();
    const auto h = half(dim);
    const auto da = s.dim_a(), db = s.dim_b();
    const bool ca = alice_conjugated(s.convention), cb = bob_conjugated(s.convention);
    const Omega w(dim);

    IsometryReport r;
    r.convention = s.convention;
    r.epsilon = tsirelson_value(dim) - bell_value(s, nu);
    const auto bound = theorem_bound(dim, std::max(r.epsilon, 0.0));
    r.mu = bound.mu;
    r.delta_bound = bound.delta;
    r.out_of_regime = bound.out_of_regime;

    const ComplexMatrix VA = build_isometry(s.A, dim, ca), VB = build_isometry(s.B, dim, cb);

    StateVector aux = StateVector::Zero(s.psi.size());
    const ComplexMatrix B0d = s.B[0].adjoint();
    for (std::int64_t t = 0; t < d; ++t)
        aux += w(cb ? h * t : -h * t) * apply_right(B0d * s.B[static_cast<std::size_t>(t)], s.psi, da);
    aux /= std::sqrt(static_cast<double>(d));
    r.aux_norm = aux.norm();

    const StateVector phi = rotated_bell_state(nu);
    r.state_distance = phase_free_distance(detail::apply_isometries(VA, VB, s.psi, d, da, db), kron(phi, aux));

    const auto pa = power_table(s.A, dim), pb = power_table(s.B, dim);
    for (std::int64_t u = 0; u < d; ++u) {
        const ComplexMatrix TA = hw_observable(dim, u, ca), TB = hw_observable(dim, u, cb);
        for (std::int64_t v = 1; v < d; ++v) {
            const auto uz = static_cast<std::size_t>(u), vz = static_cast<std::size_t>(v);
            const StateVector ta = kron(apply_left(matrix_power(TA, v), phi, d), aux);
            const StateVector tb = kron(apply_right(matrix_power(TB, v), phi, d), aux);
            const double dA = phase_free_distance(detail::apply_isometries(VA, VB, apply_left(pa[uz][vz], s.psi, db), d, da, db), ta);
            const double dB = phase_free_distance(detail::apply_isometries(VA, VB, apply_right(pb[uz][vz], s.psi, da), d, da, db), tb);
            r.op_distances.push_back({'A', u, v, dA});
            r.op_distances.push_back({'B', u, v, dB});
            r.max_op_distance = std::max({r.max_op_distance, dA, dB});
        }
    }
    r.bound_satisfied = r.state_distance <= r.delta_bound + tol;
    return r;
}

} // namespace hwst
