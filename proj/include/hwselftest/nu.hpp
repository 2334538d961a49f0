#pragma once

// The non-Clifford phase data nu. For d > 3 it is a polynomial over Z_d of
// degree at least three; for d = 3 no such polynomial exists and the phases
// are given by the pair (phi1, phi2) of the qutrit Bell operator instead.
//
// Both cases are exposed through one real phase table theta_k, with
// U_nu = diag(exp(i theta_k)). For a polynomial theta_k = 2 pi nu_k / d.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hwselftest/errors.hpp"
#include "hwselftest/zmod.hpp"

namespace hwst {

/// A rational multiple of pi, kept exact until a float is needed.
struct RationalPi {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double radians() const { return std::numbers::pi * static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const RationalPi&, const RationalPi&) = default;
};

struct CubicNu {
    /// nu(k) = sum_i coeffs[i] k^i over Z_d, reduced so exponents stay below d.
    std::vector<std::int64_t> coeffs;
};

/// Which cube root of unity the qutrit phases are tuned to
/// (1 - sqrt(3) e^{3 i phi1} = omega or omega^2).
enum class QutritOrientation { omega, omega_squared };

struct QutritPhases {
    RationalPi phi1;
    RationalPi phi2;
    QutritOrientation orientation = QutritOrientation::omega;
};

namespace detail {

inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a;
}

// Reduce exponents >= d with k^d = k (valid as functions on Z_d).
inline std::vector<std::int64_t> reduce_poly(std::vector<std::int64_t> c, PrimeDim dim) {
    const auto d = dim.value();
    for (auto& x : c) x = dim.reduce(x);
    for (std::size_t e = c.size(); e-- > static_cast<std::size_t>(d);) {
        if (c[e] == 0) continue;
        c[e - static_cast<std::size_t>(d - 1)] = dim.reduce(c[e - static_cast<std::size_t>(d - 1)] + c[e]);
        c[e] = 0;
    }
    while (!c.empty() && c.back() == 0) c.pop_back();
    return c;
}

inline std::int64_t eval_poly(const std::vector<std::int64_t>& c, std::int64_t k, PrimeDim dim) {
    std::int64_t acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = dim.reduce(acc * k + *it);
    return acc;
}

// True iff the table agrees with the quadratic interpolating k = 0, 1, 2.
inline bool is_at_most_quadratic(const std::vector<std::int64_t>& table, PrimeDim dim) {
    const auto f0 = table[0], f1 = table[1], f2 = table[2];
    const auto i2 = half(dim);
    // Newton form: f0 + (f1 - f0) k + (f2 - 2 f1 + f0) k (k - 1) / 2
    const auto d1 = dim.reduce(f1 - f0);
    const auto d2 = dim.reduce((f2 - 2 * f1 + f0) % dim.value() * i2);
    for (std::int64_t k = 0; k < dim.value(); ++k) {
        const auto q = dim.reduce(f0 + d1 * k + dim.reduce(k * (k - 1)) * d2);
        if (q != table[static_cast<std::size_t>(k)]) return false;
    }
    return true;
}

} // namespace detail

class NuSpec {
public:
    /// The canonical choice: 12^{-1}(k - 3k^2 + 2k^3) for d > 3, the default
    /// qutrit phases for d = 3.
    static NuSpec canonical(PrimeDim dim) {
        if (dim.value() == 3) return qutrit_default();
        const auto i12 = inv_mod(12, dim);
        return cubic(dim, {0, i12, dim.reduce(-3 * i12), dim.reduce(2 * i12)});
    }

    /// A validated polynomial nu. Rejects d = 3 and anything that agrees with a
    /// polynomial of degree <= 2 as a function on Z_d.
    static NuSpec cubic(PrimeDim dim, std::vector<std::int64_t> coeffs) {
        if (dim.value() == 3)
            throw UnsupportedDim("no polynomial nu works for d = 3; use qutrit phases");
        NuSpec s = unchecked_cubic(dim, std::move(coeffs));
        if (detail::is_at_most_quadratic(s.nu_table_, dim))
            throw InvalidNu("nu must not be representable by a polynomial of degree <= 2 over Z_" +
                            std::to_string(dim.value()));
        return s;
    }

    /// Debug path: builds a polynomial nu without the non-degeneracy check.
    /// Only meant for negative controls.
    static NuSpec unchecked_cubic(PrimeDim dim, std::vector<std::int64_t> coeffs) {
        NuSpec s(dim);
        s.data_ = CubicNu{detail::reduce_poly(std::move(coeffs), dim)};
        const auto& c = std::get<CubicNu>(s.data_).coeffs;
        const auto d = dim.value();
        s.nu_table_.resize(static_cast<std::size_t>(d));
        s.theta_.resize(static_cast<std::size_t>(d));
        for (std::int64_t k = 0; k < d; ++k) {
            const auto v = detail::eval_poly(c, k, dim);
            s.nu_table_[static_cast<std::size_t>(k)] = v;
            s.theta_[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * static_cast<double>(v) / static_cast<double>(d);
        }
        return s;
    }

    static NuSpec qutrit_default(QutritOrientation o = QutritOrientation::omega) {
        if (o == QutritOrientation::omega) return qutrit({-1, 18}, {-13, 18});
        return qutrit({1, 18}, {13, 18});
    }

    /// Validated qutrit phases: phi1 - phi2 = +-2pi/3 and 1 - sqrt(3) e^{3 i phi1}
    /// equal to omega (resp. omega^2) within 1e-9. The sign selects the orientation.
    static NuSpec qutrit(RationalPi phi1, RationalPi phi2) {
        const double p1 = phi1.radians(), p2 = phi2.radians();
        const std::complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
        const auto lhs = 1.0 - std::sqrt(3.0) * std::polar(1.0, 3.0 * p1);
        std::optional<QutritOrientation> o;
        if (std::abs(detail::wrap_angle(p1 - p2 - 2.0 * std::numbers::pi / 3.0)) <= 1e-9 && std::abs(lhs - w) <= 1e-9)
            o = QutritOrientation::omega;
        else if (std::abs(detail::wrap_angle(p1 - p2 + 2.0 * std::numbers::pi / 3.0)) <= 1e-9 &&
                 std::abs(lhs - w * w) <= 1e-9)
            o = QutritOrientation::omega_squared;
        if (!o)
            throw InvalidNu("qutrit phases violate phi1 - phi2 = 2pi/3, 1 - sqrt(3) e^{3i phi1} = omega");

        NuSpec s(PrimeDim(3));
        s.data_ = QutritPhases{phi1, phi2, *o};
        s.theta_ = solve_qutrit_theta(p1, p2);
        return s;
    }

    PrimeDim dim() const noexcept { return dim_; }
    bool is_cubic() const noexcept { return std::holds_alternative<CubicNu>(data_); }
    bool is_qutrit() const noexcept { return std::holds_alternative<QutritPhases>(data_); }

    const CubicNu& cubic_data() const {
        if (!is_cubic()) throw SpecMismatch("nu is not polynomial");
        return std::get<CubicNu>(data_);
    }
    const QutritPhases& qutrit_data() const {
        if (!is_qutrit()) throw SpecMismatch("nu is not a qutrit phase pair");
        return std::get<QutritPhases>(data_);
    }

    /// nu_k in Z_d (polynomial case only).
    const std::vector<std::int64_t>& nu_table() const {
        if (!is_cubic()) throw SpecMismatch("nu is not polynomial");
        return nu_table_;
    }

    /// theta_k in radians, U_nu = diag(exp(i theta_k)).
    const std::vector<double>& phases() const noexcept { return theta_; }

    /// Degree of nu as a reduced polynomial (polynomial case only).
    int degree() const { return static_cast<int>(cubic_data().coeffs.size()) - 1; }

    /// qutrit phase of the term A_j (x) B_k: phi2 when j + k = 1 mod 3, else phi1.
    double qutrit_phase(std::int64_t j, std::int64_t k) const {
        const auto& q = qutrit_data();
        return ((j + k) % 3 + 3) % 3 == 1 ? q.phi2.radians() : q.phi1.radians();
    }

    std::string id() const {
        std::ostringstream os;
        if (is_cubic()) {
            os << "cubic[";
            const auto& c = std::get<CubicNu>(data_).coeffs;
            for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
            os << "]";
        } else {
            const auto& q = std::get<QutritPhases>(data_);
            os << "qutrit[" << q.phi1.num << "/" << q.phi1.den << "pi," << q.phi2.num << "/" << q.phi2.den << "pi]";
        }
        return os.str();
    }

private:
    explicit NuSpec(PrimeDim dim) : dim_(dim) {}

    // theta with e^{i(theta_{s+2} - theta_{s+1})} = sum_m omega^{-ms} e^{i phi_m} / sqrt(3),
    // phi_m = phi2 for m = 1 and phi1 otherwise; normalised to theta_0 = 0.
    static std::vector<double> solve_qutrit_theta(double p1, double p2) {
        const double tau = 2.0 * std::numbers::pi;
        std::vector<double> delta(3);
        for (int s = 0; s < 3; ++s) {
            std::complex<double> acc = 0.0;
            for (int m = 0; m < 3; ++m)
                acc += std::polar(1.0, -tau * m * s / 3.0 + (m == 1 ? p2 : p1));
            acc /= std::sqrt(3.0);
            if (std::abs(std::abs(acc) - 1.0) > 1e-9)
                throw InvalidNu("qutrit phases do not come from a diagonal unitary");
            delta[static_cast<std::size_t>(s)] = std::arg(acc);
        }
        std::vector<double> theta{0.0, delta[2], -delta[1]};
        if (std::abs(detail::wrap_angle(theta[2] - theta[1] - delta[0])) > 1e-9)
            throw InvalidNu("qutrit phase differences are inconsistent");
        return theta;
    }

    PrimeDim dim_;
    std::variant<CubicNu, QutritPhases> data_;
    std::vector<std::int64_t> nu_table_;
    std::vector<double> theta_;
};

} // namespace hwst
