#pragma once

// Heisenberg-Weyl operators on C^d, the Fourier matrix, the diagonal phase
// unitary U_nu, Bell states and the bipartite characteristic function.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hwselftest/errors.hpp"
#include "hwselftest/nu.hpp"
#include "hwselftest/zmod.hpp"

namespace hwst {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// u = (x, z) labelling T_u.
struct PhaseIndex {
    FieldElem x;
    FieldElem z;

    PhaseIndex(std::int64_t x_, std::int64_t z_, PrimeDim dim) : x(x_, dim), z(z_, dim) {}
    PhaseIndex(FieldElem x_, FieldElem z_) : x(x_), z(z_) {
        if (!(x.dim() == z.dim())) throw DimensionMismatch("PhaseIndex components over different fields");
    }
    PrimeDim dim() const { return x.dim(); }
};

/// Powers of omega = exp(2 pi i / d), tabulated once; exponents reduced exactly.
class Omega {
public:
    explicit Omega(PrimeDim dim) : dim_(dim), table_(static_cast<std::size_t>(dim.value())) {
        const double d = static_cast<double>(dim.value());
        for (std::int64_t m = 0; m < dim.value(); ++m)
            table_[static_cast<std::size_t>(m)] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) / d);
    }
    cplx operator()(std::int64_t e) const { return table_[static_cast<std::size_t>(dim_.reduce(e))]; }
    PrimeDim dim() const { return dim_; }

private:
    PrimeDim dim_;
    std::vector<cplx> table_;
};

inline cplx omega_pow(PrimeDim dim, std::int64_t e) {
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(dim.reduce(e)) / static_cast<double>(dim.value()));
}

inline ComplexMatrix shift_x(PrimeDim dim) {
    const int d = dim.size();
    ComplexMatrix X = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) X((k + 1) % d, k) = 1.0;
    return X;
}

inline ComplexMatrix clock_z(PrimeDim dim) {
    const Omega w(dim);
    const int d = dim.size();
    ComplexMatrix Z = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) Z(k, k) = w(k);
    return Z;
}

/// T_(x,z) = omega^{2^{-1} x z} X^x Z^z, built entrywise: T|k> = omega^{h x z + z k}|k + x>.
inline ComplexMatrix displacement(const PhaseIndex& u) {
    const PrimeDim dim = u.dim();
    const Omega w(dim);
    const int d = dim.size();
    const auto x = u.x.value(), z = u.z.value();
    const auto base = half(dim) * dim.reduce(x * z);
    ComplexMatrix T = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) T(static_cast<int>(dim.reduce(k + x)), k) = w(base + z * k);
    return T;
}

inline ComplexMatrix displacement(std::int64_t x, std::int64_t z, PrimeDim dim) {
    return displacement(PhaseIndex(x, z, dim));
}

inline ComplexMatrix fourier(PrimeDim dim) {
    const Omega w(dim);
    const int d = dim.size();
    ComplexMatrix F(d, d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) F(j, k) = s * w(static_cast<std::int64_t>(j) * k);
    return F;
}

/// U_nu = diag(exp(i theta_k)). For d = 3 the qutrit phase table is used.
inline ComplexMatrix magic_unitary(const NuSpec& nu) {
    const auto& th = nu.phases();
    const int d = nu.dim().size();
    ComplexMatrix U = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) U(k, k) = std::polar(1.0, th[static_cast<std::size_t>(k)]);
    return U;
}

inline StateVector bell_state(PrimeDim dim) {
    const int d = dim.size();
    StateVector v = StateVector::Zero(d * d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < d; ++k) v(k * d + k) = s;
    return v;
}

/// (U_nu (x) 1)|Phi+>.
inline StateVector rotated_bell_state(const NuSpec& nu) {
    const int d = nu.dim().size();
    const auto& th = nu.phases();
    StateVector v = StateVector::Zero(d * d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < d; ++k) v(k * d + k) = std::polar(s, th[static_cast<std::size_t>(k)]);
    return v;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline StateVector kron(const StateVector& a, const StateVector& b) {
    StateVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// Applies M (x) 1 or 1 (x) M to a bipartite vector without forming the Kronecker product.
inline StateVector apply_left(const ComplexMatrix& M, const StateVector& v, Eigen::Index dim_b) {
    const Eigen::Index da = M.cols();
    if (da * dim_b != v.size()) throw DimensionMismatch("operator does not fit the state on the left factor");
    // v viewed as da x dim_b, row-major: (M (x) 1) v  ->  M * V
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(v.data(), da, dim_b);
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = M * V;
    return Eigen::Map<StateVector>(R.data(), R.size());
}

inline StateVector apply_right(const ComplexMatrix& M, const StateVector& v, Eigen::Index dim_a) {
    const Eigen::Index db = M.cols();
    if (dim_a * db != v.size()) throw DimensionMismatch("operator does not fit the state on the right factor");
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(v.data(), dim_a, db);
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = V * M.transpose();
    return Eigen::Map<StateVector>(R.data(), R.size());
}

/// chi_{u,v} = <psi| T_u^dagger (x) T_v^dagger |psi>.
inline cplx char_function(const StateVector& state, const PhaseIndex& u, const PhaseIndex& v) {
    const PrimeDim dim = u.dim();
    if (!(dim == v.dim())) throw DimensionMismatch("u and v over different fields");
    const Eigen::Index d = dim.size();
    if (state.size() != d * d)
        throw DimensionMismatch("state has dimension " + std::to_string(state.size()) + ", expected d^2 = " +
                                std::to_string(d * d));
    const ComplexMatrix Tu = displacement(u).adjoint();
    const ComplexMatrix Tv = displacement(v).adjoint();
    return state.dot(apply_right(Tv, apply_left(Tu, state, d), d));
}

/// eps_d in sum_s omega^{s^2} = eps_d sqrt(d): 1 for d = 1 mod 4, i for d = 3 mod 4.
inline cplx gauss_sign(PrimeDim dim) { return dim.value() % 4 == 1 ? cplx(1.0) : cplx(0.0, 1.0); }

/// Gauss-sum evaluation of chi for the rotated Bell state of a polynomial nu of
/// degree exactly 3. For x1 = x2 = x != 0 the sum over s is quadratic in s:
///   nu(s + a) - nu(s - a) - Z s = A s^2 + B s + C,   a = 2^{-1} x,  Z = z1 + z2,
/// and sum_s omega^{A s^2 + B s} = eps_d sqrt(d) (A/d) omega^{-B^2 (4A)^{-1}}.
/// x = 0 falls back to the plain sum (it is just delta_{Z,0}).
inline cplx char_closed_form(const NuSpec& nu, const PhaseIndex& u, const PhaseIndex& v) {
    const PrimeDim dim = nu.dim();
    if (dim.value() == 3) throw UnsupportedDim("closed-form chi needs a polynomial nu (d > 3)");
    if (!(u.dim() == dim) || !(v.dim() == dim)) throw DimensionMismatch("indices and nu over different fields");
    if (nu.degree() != 3) throw SpecMismatch("closed-form chi needs nu of degree exactly 3");
    if (u.x != v.x) return 0.0;

    const auto& c = nu.cubic_data().coeffs;
    const Omega w(dim);
    const auto d = dim.value();
    const auto Z = dim.reduce(u.z.value() + v.z.value());
    const auto x = u.x.value();
    if (x == 0) return Z == 0 ? cplx(1.0) : cplx(0.0);

    const auto a = dim.reduce(half(dim) * x);
    const auto a3 = dim.reduce(dim.reduce(a * a) * a);
    const auto A = dim.reduce(6 * dim.reduce(c[3] * a));
    const auto B = dim.reduce(4 * dim.reduce(c[2] * a) - Z);
    const auto C = dim.reduce(2 * dim.reduce(c[1] * a) + 2 * dim.reduce(c[3] * a3));
    const auto shift = dim.reduce(dim.reduce(B * B) * inv_mod(4 * A, dim));
    const cplx eps_d = gauss_sign(dim);
    const double leg = legendre(FieldElem(A, dim));
    return eps_d * leg / std::sqrt(static_cast<double>(d)) * w(C - shift);
}

/// Which complex conjugation convention realises the ideal observables.
enum class Convention { standard, conjugate_bob, conjugate_both };

inline std::string to_string(Convention c) {
    switch (c) {
    case Convention::standard: return "standard";
    case Convention::conjugate_bob: return "conjugate_bob";
    case Convention::conjugate_both: return "conjugate_both";
    }
    return "?";
}

inline Convention convention_from_string(const std::string& s) {
    if (s == "standard") return Convention::standard;
    if (s == "conjugate_bob") return Convention::conjugate_bob;
    if (s == "conjugate_both") return Convention::conjugate_both;
    throw InvalidStrategy("unknown convention '" + s + "'");
}

inline bool alice_conjugated(Convention c) { return c == Convention::conjugate_both; }
inline bool bob_conjugated(Convention c) { return c != Convention::standard; }

/// Ideal observable for setting j, n-th power folded in: T_(n, n j), conjugated on request.
inline ComplexMatrix hw_observable(PrimeDim dim, std::int64_t j, bool conjugated) {
    ComplexMatrix T = displacement(1, j, dim);
    return conjugated ? ComplexMatrix(T.conjugate()) : T;
}

inline double max_abs(const ComplexMatrix& M) { return M.cwiseAbs().maxCoeff(); }

inline double unitarity_defect(const ComplexMatrix& M) {
    return max_abs(M.adjoint() * M - ComplexMatrix::Identity(M.cols(), M.cols()));
}

inline ComplexMatrix matrix_power(const ComplexMatrix& M, std::int64_t n) {
    ComplexMatrix result = ComplexMatrix::Identity(M.rows(), M.cols());
    ComplexMatrix base = M;
    while (n > 0) {
        if (n & 1) result = result * base;
        base = base * base;
        n >>= 1;
    }
    return result;
}

} // namespace hwst
