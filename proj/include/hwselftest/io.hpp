#pragma once

// JSON/CSV serialisation of strategies and reports, and parsing of nu specs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwselftest/errors.hpp"
#include "hwselftest/hw_algebra.hpp"
#include "hwselftest/lhv.hpp"
#include "hwselftest/nu.hpp"
#include "hwselftest/selftest.hpp"
#include "hwselftest/strategy.hpp"

namespace hwst {

using json = nlohmann::json;

/// %.17g, enough for a bit-exact round trip of a double.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx cplx_from(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InvalidStrategy("complex entries are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_json(const ComplexMatrix& M) {
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(cplx_json(M(i, j)));
    return out;
}

inline ComplexMatrix matrix_from(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidStrategy("observables are non-empty flat row-major arrays");
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(j.size()))));
    if (n * n != static_cast<Eigen::Index>(j.size())) throw InvalidStrategy("observable entry count is not a square");
    ComplexMatrix M(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) M(r, c) = cplx_from(j[static_cast<std::size_t>(r * n + c)]);
    return M;
}

} // namespace detail

inline json strategy_to_json(const Strategy& s) {
    json psi = json::array();
    for (Eigen::Index i = 0; i < s.psi.size(); ++i) psi.push_back(detail::cplx_json(s.psi(i)));
    json A = json::array(), B = json::array();
    for (const auto& a : s.A) A.push_back(detail::matrix_json(a));
    for (const auto& b : s.B) B.push_back(detail::matrix_json(b));
    return {{"d", s.d.value()}, {"psi", psi}, {"A", A}, {"B", B}, {"convention", to_string(s.convention)}};
}

/// Parses and validates a strategy document; every failure is an InvalidStrategy
/// (or InvalidDimension for a bad d).
inline Strategy strategy_from_json(const json& j) {
    if (!j.is_object()) throw InvalidStrategy("strategy document must be an object");
    for (const char* key : {"d", "psi", "A", "B"})
        if (!j.contains(key)) throw InvalidStrategy(std::string("missing field '") + key + "'");
    if (!j["d"].is_number_integer()) throw InvalidStrategy("'d' must be an integer");
    Strategy s{PrimeDim(j["d"].get<std::int64_t>()), {}, {}, {}, Convention::conjugate_both};
    const auto& psi = j["psi"];
    if (!psi.is_array()) throw InvalidStrategy("'psi' must be an array");
    s.psi.resize(static_cast<Eigen::Index>(psi.size()));
    for (std::size_t i = 0; i < psi.size(); ++i) s.psi(static_cast<Eigen::Index>(i)) = detail::cplx_from(psi[i]);
    for (const char* key : {"A", "B"}) {
        if (!j[key].is_array()) throw InvalidStrategy(std::string("'") + key + "' must be an array");
        auto& fam = std::string(key) == "A" ? s.A : s.B;
        for (const auto& m : j[key]) fam.push_back(detail::matrix_from(m));
    }
    if (j.contains("convention")) s.convention = convention_from_string(j["convention"].get<std::string>());
    s.validate();
    return s;
}

inline Strategy load_strategy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidStrategy("cannot open strategy file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidStrategy(std::string("malformed JSON: ") + e.what());
    }
    return strategy_from_json(j);
}

/// --nu values: "canonical", "qutrit-omega2", or a path to a file holding either
/// {"coefficients": [c0, c1, ...]} / {"phi1": [num, den], "phi2": [num, den]}
/// (phases as multiples of pi) or whitespace-separated integer coefficients.
inline NuSpec parse_nu(const std::string& arg, PrimeDim dim) {
    if (arg.empty() || arg == "canonical") return NuSpec::canonical(dim);
    if (arg == "qutrit-omega2") {
        if (dim.value() != 3) throw SpecMismatch("qutrit phases need d = 3");
        return NuSpec::qutrit_default(QutritOrientation::omega_squared);
    }
    std::ifstream in(arg);
    if (!in) throw InvalidNu("cannot open nu file '" + arg + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw InvalidNu(std::string("malformed nu JSON: ") + e.what());
        }
        if (j.contains("coefficients")) return NuSpec::cubic(dim, j["coefficients"].get<std::vector<std::int64_t>>());
        if (j.contains("phi1") && j.contains("phi2")) {
            if (dim.value() != 3) throw SpecMismatch("qutrit phases need d = 3");
            auto rp = [](const json& x) { return RationalPi{x.at(0).get<std::int64_t>(), x.at(1).get<std::int64_t>()}; };
            return NuSpec::qutrit(rp(j["phi1"]), rp(j["phi2"]));
        }
        throw InvalidNu("nu JSON needs 'coefficients' or 'phi1'/'phi2'");
    }
    std::vector<std::int64_t> coeffs;
    std::istringstream is(text);
    for (std::int64_t c; is >> c;) coeffs.push_back(c);
    if (!is.eof()) throw InvalidNu("nu file must hold integer coefficients");
    return NuSpec::cubic(dim, coeffs);
}

inline json certificate_to_json(const LhvCertificate& c) {
    return {{"d", c.d},
            {"nu_id", c.nu_id},
            {"best_value", c.best_value},
            {"best_assignment", {{"a", c.best_assignment.a}, {"b", c.best_assignment.b}}},
            {"method", to_string(c.method)},
            {"exhaustive", c.exhaustive()},
            {"assignments_examined", c.assignments_examined},
            {"quantum_value", c.quantum_value},
            {"gap", c.gap},
            {"seed", c.seed}};
}

inline std::string certificate_csv_header() { return "d,method,best_value,quantum_value,gap,assignments_examined,seed"; }

inline std::string certificate_csv_row(const LhvCertificate& c) {
    return std::to_string(c.d) + "," + to_string(c.method) + "," + fmt17(c.best_value) + "," + fmt17(c.quantum_value) +
           "," + fmt17(c.gap) + "," + std::to_string(c.assignments_examined) + "," + std::to_string(c.seed);
}

inline json residuals_to_json(const ResidualReport& r) {
    return {{"bell_value", r.bell_value},
            {"epsilon", r.epsilon},
            {"c_norms", r.c_norms},
            {"d_norms", r.d_norms},
            {"max_c_norm", r.max_c_norm},
            {"max_pair_residual", r.max_pair},
            {"max_commutator_residual", r.max_commutator},
            {"gamma", r.gamma},
            {"gamma_observed", r.gamma_observed},
            {"bounds", {{"c_norm", r.c_bound}, {"pair", r.pair_bound}, {"commutator", r.commutator_bound}}},
            {"bound_checks", {{"c_norm", r.c_ok}, {"pair", r.pair_ok}, {"commutator", r.commutator_ok}}}};
}

inline json qutrit_to_json(const QutritReport& q) {
    json checks = json::array();
    for (const auto& c : q.checks) checks.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"ok", c.ok}});
    return {{"epsilon", q.epsilon}, {"k_star", q.k_star}, {"in_regime", q.in_regime}, {"checks", checks}};
}

inline json isometry_to_json(const IsometryReport& r) {
    json ops = json::array();
    for (const auto& o : r.op_distances)
        ops.push_back({{"party", std::string(1, o.party)}, {"u", o.u}, {"v", o.v}, {"distance", o.distance}});
    return {{"epsilon", r.epsilon},
            {"state_distance", r.state_distance},
            {"op_distances", ops},
            {"max_op_distance", r.max_op_distance},
            {"delta_bound", r.delta_bound},
            {"mu", r.mu},
            {"out_of_regime", r.out_of_regime},
            {"bound_satisfied", r.bound_satisfied},
            {"aux_norm", r.aux_norm},
            {"convention", to_string(r.convention)}};
}

} // namespace hwst
