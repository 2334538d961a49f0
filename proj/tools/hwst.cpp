// hwst: command-line front end for the self-test toolkit.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hwselftest/cli.hpp"

namespace {

// "0,1,5-9" -> {0,1,5,6,7,8,9}
std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& tokens) {
    std::vector<std::uint64_t> out;
    for (const auto& t : tokens) {
        const auto dash = t.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoull(t));
            continue;
        }
        const auto lo = std::stoull(t.substr(0, dash)), hi = std::stoull(t.substr(dash + 1));
        if (hi < lo) throw hwst::Error("empty seed range '" + t + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of the Heisenberg-Weyl generalised CHSH self-test"};
    app.require_subcommand(1);

    hwst::cli::RunConfig cfg;
    std::vector<std::string> seed_tokens{"0"};

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--d", cfg.d, "odd prime local dimension")->required();
        sub->add_option("--nu", cfg.nu, "canonical | qutrit-omega2 | path to coefficient/phase file");
        sub->add_option("--seeds", seed_tokens, "seeds, e.g. 0,1,2 or 0-19")->delimiter(',');
        sub->add_option("--magnitudes", cfg.magnitudes, "noise magnitudes")->delimiter(',');
        sub->add_option("--method", cfg.method, "exhaustive | best_response_exhaustive | sampled");
        sub->add_option("--format", cfg.format, "json | csv");
        sub->add_option("--out", cfg.out, "output file (default stdout)");
        sub->add_option("--tol-identity", cfg.tol_identity, "tolerance for exact identities");
        sub->add_option("--tol-eig", cfg.tol_eig, "tolerance for eigenvalue checks");
        sub->add_option("--strategy", cfg.strategy, "strategy JSON to test instead of the ideal one");
        sub->add_option("--noise", cfg.noise, "state | observables | both");
        sub->add_option("--restarts", cfg.restarts, "local-search restarts for the sampled LHV method");
    };
    auto* identities = app.add_subcommand("identities", "operator identities (SOPO, folding, orthogonality, ...)");
    auto* bounds = app.add_subcommand("bounds", "classical LHV bound and quantum maximum");
    auto* selftest = app.add_subcommand("selftest", "residuals and isometry extraction per seed and magnitude");
    auto* sweep = app.add_subcommand("sweep", "CSV table of extraction distance against delta(eps)");
    for (auto* s : {identities, bounds, selftest, sweep}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : hwst::cli::kExitConfig;
    }

    hwst::cli::Resolved r{cfg, hwst::PrimeDim(3), hwst::NuSpec::canonical(hwst::PrimeDim(3)), hwst::NoiseKind::both};
    try {
        cfg.seeds = parse_seeds(seed_tokens);
        r = hwst::cli::resolve(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hwst::cli::kExitConfig;
    }

    try {
        if (*identities) return hwst::cli::cmd_identities(r, std::cout);
        if (*bounds) return hwst::cli::cmd_bounds(r, std::cout);
        if (*selftest) return hwst::cli::cmd_selftest(r, std::cout);
        return hwst::cli::cmd_sweep(r, std::cout);
    } catch (const hwst::InvalidStrategy& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hwst::cli::kExitConfig;
    } catch (const hwst::InfeasibleMethod& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hwst::cli::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hwst::cli::kExitConfig;
    }
}
