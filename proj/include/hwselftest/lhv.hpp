#pragma once

// Classical (LHV) values of the Bell expression over deterministic assignments
// A_j -> omega^{a_j}, B_k -> omega^{b_k}, with exact enumeration where feasible
// and seeded local search beyond that.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hwselftest/bell_op.hpp"
#include "hwselftest/errors.hpp"
#include "hwselftest/hw_algebra.hpp"
#include "hwselftest/nu.hpp"

namespace hwst {

struct Assignment {
    std::vector<std::int64_t> a;
    std::vector<std::int64_t> b;
    friend bool operator==(const Assignment&, const Assignment&) = default;
};

enum class LhvMethod { exhaustive, best_response_exhaustive, sampled };

inline std::string to_string(LhvMethod m) {
    switch (m) {
    case LhvMethod::exhaustive: return "exhaustive";
    case LhvMethod::best_response_exhaustive: return "best_response_exhaustive";
    case LhvMethod::sampled: return "sampled";
    }
    return "?";
}

inline LhvMethod lhv_method_from_string(const std::string& s) {
    if (s == "exhaustive") return LhvMethod::exhaustive;
    if (s == "best_response_exhaustive") return LhvMethod::best_response_exhaustive;
    if (s == "sampled") return LhvMethod::sampled;
    throw Error("unknown LHV method '" + s + "'");
}

/// The natural method for d: exhaustive for 3, best response for 5 and 7, sampled above.
inline LhvMethod default_lhv_method(PrimeDim dim) {
    if (dim.value() == 3) return LhvMethod::exhaustive;
    if (dim.value() <= 7) return LhvMethod::best_response_exhaustive;
    return LhvMethod::sampled;
}

struct LhvCertificate {
    std::int64_t d = 0;
    std::string nu_id;
    double best_value = 0.0;
    Assignment best_assignment;
    LhvMethod method = LhvMethod::exhaustive;
    std::uint64_t assignments_examined = 0;
    double quantum_value = 0.0;
    double gap = 0.0;
    std::uint64_t seed = 0;
    bool exhaustive() const { return method != LhvMethod::sampled; }
};

struct LhvOptions {
    std::uint64_t seed = 0;
    int restarts = 64;
    unsigned threads = 0;  // 0: SELFTEST_THREADS or hardware concurrency
};

inline unsigned worker_count(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SELFTEST_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

namespace detail {

// Kahan-compensated complex sum.
struct KahanSum {
    cplx sum = 0.0, c = 0.0;
    void add(cplx x) {
        const cplx y = x - c;
        const cplx t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

// For fixed a the value splits into independent terms per Bob setting k:
//   Re sum_n omega^{n b_k} P_{n,k},  P_{n,k} = sum_j g(j,k,n) omega^{n a_j}.
class BestResponse {
public:
    explicit BestResponse(const BellCoeffs& g) : g_(g), w_(g.dim()), d_(g.dim().value()),
        P_(static_cast<std::size_t>(d_ * d_)) {}

    /// Fills best b for the given a and returns the value. Ties go to the smallest b_k.
    double solve(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& b, bool compensated = false) {
        const auto d = d_;
        for (std::int64_t n = 1; n < d; ++n)
            for (std::int64_t k = 0; k < d; ++k) {
                cplx acc = 0.0;
                for (std::int64_t j = 0; j < d; ++j) acc += g_(n, j, k) * w_(n * a[static_cast<std::size_t>(j)]);
                P_[static_cast<std::size_t>(n * d + k)] = acc;
            }
        b.resize(static_cast<std::size_t>(d));
        detail::KahanSum total;
        double plain = 0.0;
        for (std::int64_t k = 0; k < d; ++k) {
            double best = -1e300;
            std::int64_t arg = 0;
            for (std::int64_t bb = 0; bb < d; ++bb) {
                double v = 0.0;
                for (std::int64_t n = 1; n < d; ++n) v += (P_[static_cast<std::size_t>(n * d + k)] * w_(n * bb)).real();
                if (v > best + 1e-12) {
                    best = v;
                    arg = bb;
                }
            }
            b[static_cast<std::size_t>(k)] = arg;
            plain += best;
            total.add(best);
        }
        return compensated ? total.sum.real() : plain;
    }

private:
    const BellCoeffs& g_;
    Omega w_;
    std::int64_t d_;
    std::vector<cplx> P_;
};

inline void decode(std::uint64_t idx, std::int64_t d, std::vector<std::int64_t>& out) {
    // Most significant digit first, so increasing idx is lexicographic order.
    for (auto i = static_cast<std::int64_t>(out.size()) - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(idx % static_cast<std::uint64_t>(d));
        idx /= static_cast<std::uint64_t>(d);
    }
}

inline std::uint64_t ipow(std::uint64_t b, std::int64_t e) {
    std::uint64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) r *= b;
    return r;
}

} // namespace detail

/// Re sum_{n != 0} sum_{j,k} g(j,k,n) omega^{n(a_j + b_k)}.
inline cplx lhv_value_complex(const Assignment& x, const BellCoeffs& g) {
    const auto d = g.dim().value();
    if (static_cast<std::int64_t>(x.a.size()) != d || static_cast<std::int64_t>(x.b.size()) != d)
        throw DimensionMismatch("assignment must have d entries per party");
    const Omega w(g.dim());
    detail::KahanSum acc;
    for (std::int64_t n = 1; n < d; ++n)
        for (std::int64_t j = 0; j < d; ++j)
            for (std::int64_t k = 0; k < d; ++k)
                acc.add(g(n, j, k) * w(n * (x.a[static_cast<std::size_t>(j)] + x.b[static_cast<std::size_t>(k)])));
    return acc.sum;
}

inline double lhv_value(const Assignment& x, const NuSpec& nu) {
    return lhv_value_complex(x, *bell_coeffs(nu)).real();
}

namespace detail {

struct BlockBest {
    double value = -1e300;
    Assignment arg;
    std::uint64_t examined = 0;
};

// Replace only on a strict improvement so the lexicographically first maximiser wins.
inline void merge(BlockBest& into, const BlockBest& other) {
    into.examined += other.examined;
    if (other.value > into.value + 1e-12) {
        into.value = other.value;
        into.arg = other.arg;
    }
}

template <class Body>
BlockBest run_blocks(std::uint64_t total, unsigned threads, Body body) {
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(total, 1)));
    std::vector<BlockBest> parts(threads);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t lo = std::min(total, t * chunk), hi = std::min(total, lo + chunk);
        if (threads == 1) {
            parts[t] = body(lo, hi);
        } else {
            pool.emplace_back([&, t, lo, hi] { parts[t] = body(lo, hi); });
        }
    }
    for (auto& th : pool) th.join();
    BlockBest best;
    for (const auto& p : parts) merge(best, p);
    return best;
}

} // namespace detail

inline LhvCertificate lhv_bound(PrimeDim dim, const NuSpec& nu, LhvMethod method, const LhvOptions& opt = {}) {
    if (!(dim == nu.dim())) throw SpecMismatch("nu is defined over Z_" + std::to_string(nu.dim().value()));
    const auto g = bell_coeffs(nu);
    const auto d = dim.value();
    const auto dd = static_cast<std::uint64_t>(d);
    const unsigned threads = worker_count(opt.threads);

    LhvCertificate cert;
    cert.d = d;
    cert.nu_id = nu.id();
    cert.method = method;
    cert.quantum_value = tsirelson_value(dim);
    cert.seed = opt.seed;

    detail::BlockBest best;
    if (method == LhvMethod::exhaustive) {
        if (d > 5) throw InfeasibleMethod("exhaustive enumeration of d^{2d} assignments is limited to d <= 5");
        const std::uint64_t na = detail::ipow(dd, d), total = na * na;
        best = detail::run_blocks(total, threads, [&](std::uint64_t lo, std::uint64_t hi) {
            detail::BlockBest bb;
            Assignment x{std::vector<std::int64_t>(dd), std::vector<std::int64_t>(dd)};
            for (std::uint64_t i = lo; i < hi; ++i) {
                detail::decode(i / na, d, x.a);
                detail::decode(i % na, d, x.b);
                const double v = lhv_value_complex(x, *g).real();
                ++bb.examined;
                if (v > bb.value + 1e-12) {
                    bb.value = v;
                    bb.arg = x;
                }
            }
            return bb;
        });
    } else if (method == LhvMethod::best_response_exhaustive) {
        if (d > 7) throw InfeasibleMethod("best-response enumeration of d^d Alice assignments is limited to d <= 7");
        const std::uint64_t na = detail::ipow(dd, d);
        best = detail::run_blocks(na, threads, [&](std::uint64_t lo, std::uint64_t hi) {
            detail::BlockBest bb;
            detail::BestResponse br(*g);
            Assignment x{std::vector<std::int64_t>(dd), {}};
            for (std::uint64_t i = lo; i < hi; ++i) {
                detail::decode(i, d, x.a);
                const double v = br.solve(x.a, x.b);
                ++bb.examined;
                if (v > bb.value + 1e-12) {
                    bb.value = v;
                    bb.arg = x;
                }
            }
            return bb;
        });
    } else {
        // Multi-start coordinate ascent on Alice's assignment, Bob always best-responding.
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<std::int64_t> U(0, d - 1);
        std::vector<std::vector<std::int64_t>> starts(static_cast<std::size_t>(std::max(opt.restarts, 1)));
        for (auto& s : starts) {
            s.resize(dd);
            for (auto& v : s) v = U(rng);
        }
        best = detail::run_blocks(starts.size(), threads, [&](std::uint64_t lo, std::uint64_t hi) {
            detail::BlockBest bb;
            detail::BestResponse br(*g);
            for (std::uint64_t i = lo; i < hi; ++i) {
                std::vector<std::int64_t> a = starts[i], b;
                double cur = br.solve(a, b, true);
                ++bb.examined;
                for (bool improved = true; improved;) {
                    improved = false;
                    for (std::int64_t j = 0; j < d; ++j) {
                        const auto keep = a[static_cast<std::size_t>(j)];
                        auto best_v = keep;
                        for (std::int64_t v = 0; v < d; ++v) {
                            if (v == keep) continue;
                            a[static_cast<std::size_t>(j)] = v;
                            std::vector<std::int64_t> tb;
                            const double val = br.solve(a, tb, true);
                            ++bb.examined;
                            if (val > cur + 1e-12) {
                                cur = val;
                                best_v = v;
                                improved = true;
                            }
                        }
                        a[static_cast<std::size_t>(j)] = best_v;
                    }
                }
                br.solve(a, b, true);
                if (cur > bb.value + 1e-12) {
                    bb.value = cur;
                    bb.arg = Assignment{a, b};
                }
            }
            return bb;
        });
    }
    cert.best_value = best.value;
    cert.best_assignment = best.arg;
    cert.assignments_examined = best.examined;
    cert.gap = cert.quantum_value - cert.best_value;
    return cert;
}

} // namespace hwst
