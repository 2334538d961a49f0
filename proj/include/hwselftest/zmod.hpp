#pragma once

// Exact arithmetic in the prime field Z_d for odd prime d.

#include <compare>
#include <cstdint>
#include <string>

#include "hwselftest/errors.hpp"

namespace hwst {

inline constexpr std::int64_t kMaxDim = 1000;

constexpr bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

/// An odd prime d >= 3, checked on construction.
class PrimeDim {
public:
    explicit PrimeDim(std::int64_t d) : d_(d) {
        if (d < 3 || d > kMaxDim || d % 2 == 0 || !is_prime(d))
            throw InvalidDimension("d must be an odd prime in [3, " + std::to_string(kMaxDim) +
                                   "], got " + std::to_string(d));
    }

    constexpr std::int64_t value() const noexcept { return d_; }
    constexpr int size() const noexcept { return static_cast<int>(d_); }

    /// Reduces any integer (negative included) into [0, d).
    constexpr std::int64_t reduce(std::int64_t a) const noexcept {
        const std::int64_t r = a % d_;
        return r < 0 ? r + d_ : r;
    }

    friend constexpr bool operator==(PrimeDim, PrimeDim) = default;

private:
    std::int64_t d_;
};

/// An element of Z_d. The value is always reduced; mixing dimensions throws.
class FieldElem {
public:
    FieldElem(std::int64_t v, PrimeDim dim) : v_(dim.reduce(v)), dim_(dim) {}

    std::int64_t value() const noexcept { return v_; }
    PrimeDim dim() const noexcept { return dim_; }
    bool is_zero() const noexcept { return v_ == 0; }

    friend FieldElem operator+(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.v_ + b.v_, a.dim_};
    }
    friend FieldElem operator-(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.v_ - b.v_, a.dim_};
    }
    friend FieldElem operator*(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.v_ * b.v_, a.dim_};
    }
    FieldElem operator-() const { return {-v_, dim_}; }

    friend bool operator==(FieldElem a, FieldElem b) {
        return a.dim_ == b.dim_ && a.v_ == b.v_;
    }

private:
    static void check_same(FieldElem a, FieldElem b) {
        if (!(a.dim_ == b.dim_))
            throw DimensionMismatch("field elements over Z_" + std::to_string(a.dim_.value()) +
                                    " and Z_" + std::to_string(b.dim_.value()));
    }

    std::int64_t v_;
    PrimeDim dim_;
};

/// base^exp mod d by square-and-multiply; exp >= 0.
inline std::int64_t pow_mod(std::int64_t base, std::int64_t exp, PrimeDim dim) {
    std::int64_t result = 1;
    std::int64_t b = dim.reduce(base);
    while (exp > 0) {
        if (exp & 1) result = result * b % dim.value();
        b = b * b % dim.value();
        exp >>= 1;
    }
    return result;
}

/// Multiplicative inverse (Fermat). Throws ZeroInverse for a = 0.
inline FieldElem inv(FieldElem a) {
    if (a.is_zero())
        throw ZeroInverse("0 has no inverse mod " + std::to_string(a.dim().value()));
    return {pow_mod(a.value(), a.dim().value() - 2, a.dim()), a.dim()};
}

/// Inverse of an integer taken mod d.
inline std::int64_t inv_mod(std::int64_t a, PrimeDim dim) {
    return inv(FieldElem(a, dim)).value();
}

/// The canonical 2^{-1} = (d+1)/2.
inline std::int64_t half(PrimeDim dim) { return (dim.value() + 1) / 2; }

/// Legendre symbol (a/d) via Euler's criterion.
inline int legendre(FieldElem a) {
    if (a.is_zero()) return 0;
    const auto e = pow_mod(a.value(), (a.dim().value() - 1) / 2, a.dim());
    return e == 1 ? 1 : -1;
}

/// nu_k = 12^{-1}(k - 3k^2 + 2k^3) over Z_d. Needs 12 invertible, so d > 3.
inline FieldElem canonical_nu(FieldElem k) {
    const PrimeDim dim = k.dim();
    if (dim.value() == 3)
        throw UnsupportedDim("the canonical cubic phase needs 12 invertible mod d (d > 3)");
    const std::int64_t x = k.value();
    const std::int64_t poly = dim.reduce(x - 3 * dim.reduce(x * x) + 2 * dim.reduce(dim.reduce(x * x) * x));
    return FieldElem(poly, dim) * inv(FieldElem(12, dim));
}

} // namespace hwst
