#pragma once

// Bell coefficients g(j,k,n), the Bell operators B_d / B_3, the stabiliser part
// S, the full operator 1 + S + B_d, and the SOPO witnesses C_{n,j}, D_{n,j}.

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hwselftest/errors.hpp"
#include "hwselftest/hw_algebra.hpp"
#include "hwselftest/nu.hpp"
#include "hwselftest/zmod.hpp"

namespace hwst {

/// g(j,k,n) = (1/d) sum_s omega^{n(j+k)s} exp(i(theta_{s+hn} - theta_{s-hn})), n != 0.
inline cplx g_coeff(const FieldElem& j, const FieldElem& k, const FieldElem& n, const NuSpec& nu) {
    const PrimeDim dim = nu.dim();
    if (!(j.dim() == dim) || !(k.dim() == dim) || !(n.dim() == dim))
        throw DimensionMismatch("g index over a different field than nu");
    if (n.is_zero()) throw ZeroN("g(j,k,n) is defined for n != 0 only");
    const Omega w(dim);
    const auto& th = nu.phases();
    const auto hn = dim.reduce(half(dim) * n.value());
    const auto jk = dim.reduce(j.value() + k.value());
    cplx acc = 0.0;
    for (std::int64_t s = 0; s < dim.value(); ++s) {
        const double dth = th[static_cast<std::size_t>(dim.reduce(s + hn))] - th[static_cast<std::size_t>(dim.reduce(s - hn))];
        acc += w(n.value() * jk % dim.value() * s) * std::polar(1.0, dth);
    }
    return acc / static_cast<double>(dim.value());
}

/// Dense table g[n][j][k] for n = 0..d-1 (row n = 0 unused and left zero).
class BellCoeffs {
public:
    explicit BellCoeffs(const NuSpec& nu) : dim_(nu.dim()), nu_id_(nu.id()) {
        const auto d = static_cast<std::size_t>(dim_.value());
        table_.assign(d * d * d, cplx(0.0));
        if (nu.is_qutrit()) {
            // Qutrit phases enter directly: g(j,k,1) = e^{i phi_{j+k}} / sqrt(3), g(.,.,2) = conj.
            for (std::int64_t j = 0; j < 3; ++j)
                for (std::int64_t k = 0; k < 3; ++k) {
                    const cplx v = std::polar(1.0 / std::sqrt(3.0), nu.qutrit_phase(j, k));
                    at(1, j, k) = v;
                    at(2, j, k) = std::conj(v);
                }
            return;
        }
        // g depends on j, k only through j + k; evaluate once per (n, m = j + k).
        for (std::int64_t n = 1; n < dim_.value(); ++n)
            for (std::int64_t m = 0; m < dim_.value(); ++m) {
                const cplx v = g_coeff(FieldElem(m, dim_), FieldElem(0, dim_), FieldElem(n, dim_), nu);
                for (std::int64_t j = 0; j < dim_.value(); ++j) at(n, j, dim_.reduce(m - j)) = v;
            }
    }

    PrimeDim dim() const { return dim_; }
    const std::string& nu_id() const { return nu_id_; }

    cplx operator()(std::int64_t n, std::int64_t j, std::int64_t k) const {
        const auto d = dim_.value();
        return table_[static_cast<std::size_t>((dim_.reduce(n) * d + dim_.reduce(j)) * d + dim_.reduce(k))];
    }

    /// G_n = [g(j,k,n)]_{j,k}.
    ComplexMatrix matrix(std::int64_t n) const {
        const int d = dim_.size();
        ComplexMatrix G(d, d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) G(j, k) = (*this)(n, j, k);
        return G;
    }

    /// gamma(nu) = max_{n,j} sum_k |g(j,k,n)|, the largest ||P_{n,j}|| any unitary strategy can reach.
    double gamma() const {
        double best = 0.0;
        for (std::int64_t n = 1; n < dim_.value(); ++n)
            for (std::int64_t j = 0; j < dim_.value(); ++j) {
                double s = 0.0;
                for (std::int64_t k = 0; k < dim_.value(); ++k) s += std::abs((*this)(n, j, k));
                best = std::max(best, s);
            }
        return best;
    }

private:
    cplx& at(std::int64_t n, std::int64_t j, std::int64_t k) {
        const auto d = dim_.value();
        return table_[static_cast<std::size_t>((n * d + j) * d + k)];
    }

    PrimeDim dim_;
    std::string nu_id_;
    std::vector<cplx> table_;
};

/// Shared, cached coefficient tables keyed by (d, nu).
inline std::shared_ptr<const BellCoeffs> bell_coeffs(const NuSpec& nu) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, std::string>, std::shared_ptr<const BellCoeffs>> cache;
    const auto key = std::make_pair(nu.dim().value(), nu.id());
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto p = std::make_shared<const BellCoeffs>(nu);
    cache.emplace(key, p);
    return p;
}

/// Powers O^n for n = 0..d-1 of each observable in a family.
using PowerTable = std::vector<std::vector<ComplexMatrix>>;

inline PowerTable power_table(const std::vector<ComplexMatrix>& ops, PrimeDim dim) {
    PowerTable t(ops.size());
    for (std::size_t j = 0; j < ops.size(); ++j) {
        t[j].reserve(static_cast<std::size_t>(dim.value()));
        t[j].push_back(ComplexMatrix::Identity(ops[j].rows(), ops[j].cols()));
        for (std::int64_t n = 1; n < dim.value(); ++n) t[j].push_back(t[j].back() * ops[j]);
    }
    return t;
}

/// sum_{n != 0} sum_{j,k} g(j,k,n) A_j^n (x) B_k^n for arbitrary observable families.
inline ComplexMatrix bell_operator(const BellCoeffs& g, const std::vector<ComplexMatrix>& A,
                                   const std::vector<ComplexMatrix>& B) {
    const PrimeDim dim = g.dim();
    const auto d = dim.value();
    if (static_cast<std::int64_t>(A.size()) != d || static_cast<std::int64_t>(B.size()) != d)
        throw DimensionMismatch("need exactly d observables per party");
    const auto pa = power_table(A, dim), pb = power_table(B, dim);
    const auto da = A[0].rows(), db = B[0].rows();
    ComplexMatrix out = ComplexMatrix::Zero(da * db, da * db);
    for (std::int64_t n = 1; n < d; ++n)
        for (std::int64_t k = 0; k < d; ++k) {
            ComplexMatrix P = ComplexMatrix::Zero(da, da);
            for (std::int64_t j = 0; j < d; ++j) P += g(n, j, k) * pa[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)];
            out += kron(P, pb[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)]);
        }
    return out;
}

inline std::vector<ComplexMatrix> ideal_observables(PrimeDim dim, bool conjugated) {
    std::vector<ComplexMatrix> ops;
    for (std::int64_t j = 0; j < dim.value(); ++j) ops.push_back(hw_observable(dim, j, conjugated));
    return ops;
}

/// S = sum_{j != 0} T_(0,j) (x) T_(0,-j); for d = 3 this is Z (x) Z^dagger + Z^dagger (x) Z.
inline ComplexMatrix stabilizer_part(PrimeDim dim) {
    const int d = dim.size();
    ComplexMatrix S = ComplexMatrix::Zero(d * d, d * d);
    for (std::int64_t j = 1; j < d; ++j) S += kron(displacement(0, j, dim), displacement(0, -j, dim));
    return S;
}

/// Tsirelson value d(d-1) of B_d (6 for d = 3).
inline double tsirelson_value(PrimeDim dim) {
    return static_cast<double>(dim.value() * (dim.value() - 1));
}

inline double max_eigenvalue(const ComplexMatrix& M) {
    const ComplexMatrix H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Picks the conjugation convention under which the ideal HW observables reach
/// d(d-1) on the rotated Bell state; tried in order standard, conjugate_bob, conjugate_both.
inline Convention resolve_ideal_convention(const NuSpec& nu, double tol = 1e-6) {
    const PrimeDim dim = nu.dim();
    const auto g = bell_coeffs(nu);
    const StateVector psi = rotated_bell_state(nu);
    for (auto c : {Convention::standard, Convention::conjugate_bob, Convention::conjugate_both}) {
        const ComplexMatrix B =
            bell_operator(*g, ideal_observables(dim, alice_conjugated(c)), ideal_observables(dim, bob_conjugated(c)));
        const double v = psi.dot(B * psi).real();
        if (std::abs(v - tsirelson_value(dim)) <= tol) return c;
    }
    throw ConventionUnresolvable("no conjugation convention reaches d(d-1) for nu = " + nu.id());
}

struct BellOperatorSet {
    PrimeDim dim;
    Convention convention;
    ComplexMatrix B_d;
    ComplexMatrix S;
    ComplexMatrix B_full;
    std::shared_ptr<const BellCoeffs> coeffs;
};

/// Qutrit form (1/sqrt 3) sum_{j,k} e^{i phi_{jk}} A_j (x) B_k + h.c.
inline ComplexMatrix qutrit_bell_operator(const NuSpec& nu, const std::vector<ComplexMatrix>& A,
                                          const std::vector<ComplexMatrix>& B) {
    const auto da = A[0].rows(), db = B[0].rows();
    ComplexMatrix M = ComplexMatrix::Zero(da * db, da * db);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            M += std::polar(1.0 / std::sqrt(3.0), nu.qutrit_phase(j, k)) * kron(A[static_cast<std::size_t>(j)], B[static_cast<std::size_t>(k)]);
    return M + M.adjoint();
}

inline BellOperatorSet build_bell(PrimeDim dim, const NuSpec& nu) {
    if (!(dim == nu.dim())) throw SpecMismatch("nu is defined over Z_" + std::to_string(nu.dim().value()));
    if ((dim.value() == 3) != nu.is_qutrit()) throw SpecMismatch("d = 3 needs qutrit phases, d > 3 a polynomial nu");
    const Convention c = resolve_ideal_convention(nu);
    const auto A = ideal_observables(dim, alice_conjugated(c));
    const auto B = ideal_observables(dim, bob_conjugated(c));
    BellOperatorSet set{dim, c, {}, stabilizer_part(dim), {}, bell_coeffs(nu)};
    set.B_d = dim.value() == 3 ? qutrit_bell_operator(nu, A, B) : bell_operator(*set.coeffs, A, B);
    const auto D = set.B_d.rows();
    set.B_full = ComplexMatrix::Identity(D, D) + set.S + set.B_d;
    return set;
}

/// sum_{u,v} chi_{u,v} T_u (x) T_v over all d^4 index pairs, chi of the rotated Bell state.
inline ComplexMatrix build_full_bell_from_chi(PrimeDim dim, const NuSpec& nu) {
    if (dim.value() == 3) throw UnsupportedDim("the chi expansion is built for polynomial nu (d > 3)");
    if (!(dim == nu.dim())) throw SpecMismatch("nu is defined over Z_" + std::to_string(nu.dim().value()));
    const auto d = dim.value();
    const StateVector psi = rotated_bell_state(nu);
    std::vector<ComplexMatrix> T;
    for (std::int64_t x = 0; x < d; ++x)
        for (std::int64_t z = 0; z < d; ++z) T.push_back(displacement(x, z, dim));
    ComplexMatrix out = ComplexMatrix::Zero(d * d, d * d);
    for (std::int64_t x1 = 0; x1 < d; ++x1)
        for (std::int64_t z1 = 0; z1 < d; ++z1)
            for (std::int64_t x2 = 0; x2 < d; ++x2)
                for (std::int64_t z2 = 0; z2 < d; ++z2) {
                    const cplx chi = char_function(psi, PhaseIndex(x1, z1, dim), PhaseIndex(x2, z2, dim));
                    if (chi == cplx(0.0)) continue;
                    out += chi * kron(T[static_cast<std::size_t>(x1 * d + z1)], T[static_cast<std::size_t>(x2 * d + z2)]);
                }
    return out;
}

struct SopoOp {
    std::int64_t n;
    std::int64_t j;
    ComplexMatrix C;
    ComplexMatrix D;
};

/// C_{n,j} = A_j^n (x) 1 - sum_k g(j,k,n)^* 1 (x) (B_k^n)^dagger,
/// D_{n,j} = 1 (x) B_j^n - sum_k g(k,j,n)^* (A_k^n)^dagger (x) 1,
/// for n = 1..(d-1)/2 (n = 1 only for d = 3), in the ideal representation.
inline std::vector<SopoOp> sopo_ops(PrimeDim dim, const NuSpec& nu) {
    if (!(dim == nu.dim())) throw SpecMismatch("nu is defined over Z_" + std::to_string(nu.dim().value()));
    const Convention c = resolve_ideal_convention(nu);
    const auto g = bell_coeffs(nu);
    const auto pa = power_table(ideal_observables(dim, alice_conjugated(c)), dim);
    const auto pb = power_table(ideal_observables(dim, bob_conjugated(c)), dim);
    const int d = dim.size();
    const ComplexMatrix I = ComplexMatrix::Identity(d, d);
    std::vector<SopoOp> out;
    for (std::int64_t n = 1; n <= (d - 1) / 2; ++n)
        for (std::int64_t j = 0; j < d; ++j) {
            ComplexMatrix sb = ComplexMatrix::Zero(d, d), sa = ComplexMatrix::Zero(d, d);
            for (std::int64_t k = 0; k < d; ++k) {
                sb += std::conj((*g)(n, j, k)) * pb[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)].adjoint();
                sa += std::conj((*g)(n, k, j)) * pa[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)].adjoint();
            }
            out.push_back({n, j, kron(pa[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)], I) - kron(I, sb),
                           kron(I, pb[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)]) - kron(sa, I)});
        }
    return out;
}

struct SopoResidual {
    double c_family = 0.0;
    double d_family = 0.0;
    double max() const { return std::max(c_family, d_family); }
};

/// ||d(d-1) 1 - B_d - sum C^dagger C||_max and the D-family analogue.
inline SopoResidual sopo_residual(PrimeDim dim, const NuSpec& nu) {
    const auto set = build_bell(dim, nu);
    const auto ops = sopo_ops(dim, nu);
    const auto D = set.B_d.rows();
    ComplexMatrix sc = ComplexMatrix::Zero(D, D), sd = ComplexMatrix::Zero(D, D);
    for (const auto& o : ops) {
        sc += o.C.adjoint() * o.C;
        sd += o.D.adjoint() * o.D;
    }
    const ComplexMatrix lhs = tsirelson_value(dim) * ComplexMatrix::Identity(D, D) - set.B_d;
    return {max_abs(lhs - sc), max_abs(lhs - sd)};
}

/// max over n != 0 of ||G_n G_n^dagger - 1||_max.
inline double g_orthogonality(const BellCoeffs& g) {
    double worst = 0.0;
    const int d = g.dim().size();
    for (std::int64_t n = 1; n < d; ++n) {
        const ComplexMatrix G = g.matrix(n);
        worst = std::max(worst, max_abs(G * G.adjoint() - ComplexMatrix::Identity(d, d)));
        worst = std::max(worst, max_abs(G.adjoint() * G - ComplexMatrix::Identity(d, d)));
    }
    return worst;
}

/// Quadratic folding: g(j,k,n+n') = sum_r g(j,k+n'r,n) g(j,k-nr,n') omega^{2^{-1} n n'(n+n') r}.
/// trials <= 0 checks every admissible tuple; otherwise a seeded sample of that many tuples.
inline double folding_check(PrimeDim dim, const NuSpec& nu, int trials = 0, std::uint64_t seed = 0) {
    if (dim.value() == 3) throw UnsupportedDim("the folding identity is stated for polynomial nu (d > 3)");
    const auto g = bell_coeffs(nu);
    const Omega w(dim);
    const auto d = dim.value();
    const auto h = half(dim);
    auto one = [&](std::int64_t j, std::int64_t k, std::int64_t n, std::int64_t m) {
        cplx acc = 0.0;
        const auto e = dim.reduce(h * dim.reduce(n * m) % d * dim.reduce(n + m));
        for (std::int64_t r = 0; r < d; ++r) acc += (*g)(n, j, k + m * r) * (*g)(m, j, k - n * r) * w(e * r);
        return std::abs((*g)(n + m, j, k) - acc);
    };
    double worst = 0.0;
    if (trials <= 0) {
        for (std::int64_t n = 1; n < d; ++n)
            for (std::int64_t m = 1; m < d; ++m) {
                if (dim.reduce(n + m) == 0) continue;
                for (std::int64_t j = 0; j < d; ++j)
                    for (std::int64_t k = 0; k < d; ++k) worst = std::max(worst, one(j, k, n, m));
            }
        return worst;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> any(0, d - 1), nz(1, d - 1);
    for (int t = 0; t < trials; ++t) {
        const auto n = nz(rng), m = nz(rng), j = any(rng), k = any(rng);
        if (dim.reduce(n + m) == 0) continue;
        worst = std::max(worst, one(j, k, n, m));
    }
    return worst;
}

/// Frobenius norm of the projection of M onto span{Z^a (x) Z^b}.
inline double diagonal_projection(const ComplexMatrix& M, PrimeDim dim) {
    const int d = dim.size();
    // Z^a (x) Z^b is diagonal with entries omega^{a p + b q} at index p d + q, so its
    // coefficient is a 2-D DFT of diag(M); Parseval turns the projection norm into
    // the norm of the diagonal itself.
    if (M.rows() != static_cast<Eigen::Index>(d) * d) throw DimensionMismatch("operator is not on C^d (x) C^d");
    return M.diagonal().norm();
}

/// The default qutrit phase pair, checked against both constraints to 1e-12.
inline QutritPhases qutrit_phase_solve(QutritOrientation o = QutritOrientation::omega) {
    const NuSpec s = NuSpec::qutrit_default(o);
    const auto q = s.qutrit_data();
    const double p1 = q.phi1.radians(), p2 = q.phi2.radians();
    const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    const cplx target = o == QutritOrientation::omega ? w : w * w;
    const double sign = o == QutritOrientation::omega ? 1.0 : -1.0;
    if (std::abs(1.0 - std::sqrt(3.0) * std::polar(1.0, 3.0 * p1) - target) > 1e-12 ||
        std::abs(std::remainder(p1 - p2 - sign * 2.0 * std::numbers::pi / 3.0, 2.0 * std::numbers::pi)) > 1e-12)
        throw InvalidNu("qutrit phase constraints fail at 1e-12");
    return q;
}

} // namespace hwst
