#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "verify.hpp"

namespace {

using qpspec::algebra::cplx;

cplx parse_energy(const std::string& s) {
    const std::size_t comma = s.find(',');
    if (comma == std::string::npos) return cplx(std::stod(s), 0.0);
    return cplx(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
}

void write_or_print(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-periodic cocycle spectral toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_path, energy_str = "0";
    double eps = 0.0;
    std::optional<double> lambda_override;
    std::optional<std::uint64_t> seed_override;
    int threads = 1;

    app.add_option("--config", config_path, "experiment configuration file");
    app.add_option("--out", out_path, "output path (stdout when omitted)");
    app.add_option("--seed", seed_override, "override engine seed");
    app.add_option("--threads", threads, "worker threads for grid scans");
    app.add_option("--E", energy_str, "energy as re or re,im");
    app.add_option("--eps", eps, "imaginary phase shift");
    app.add_option("--lambda", lambda_override, "override coupling constant");

    auto* c_lyap = app.add_subcommand("lyapunov", "exponent at one energy");
    auto* c_prof = app.add_subcommand("le-profile", "exponent profile over a shift range");
    double eps_min = -1.0, eps_max = 1.0;
    int prof_steps = 21;
    c_prof->add_option("--eps-min", eps_min, "profile start");
    c_prof->add_option("--eps-max", eps_max, "profile end");
    c_prof->add_option("--steps", prof_steps, "profile sample count");
    auto* c_spec = app.add_subcommand("spectrum", "classify a complex-energy rectangle");
    auto* c_kam = app.add_subcommand("kam", "run the reducibility iteration at one energy");
    auto* c_verify = app.add_subcommand("verify", "run an acceptance suite");
    std::string suite = "all";
    c_verify->add_option("suite", suite, "sarnak | cone | kam | amo | determinism | all");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_verify->parsed()) {
            const auto results = qpspec::cli::run_suite(suite);
            const std::string report = qpspec::cli::format_results(results);
            write_or_print(out_path, report);
            for (const auto& r : results)
                if (!r.passed) return 1;
            return 0;
        }

        auto cfg = qpspec::cli::load_config(config_path);
        if (lambda_override) cfg.potential.lambda = *lambda_override;
        if (seed_override) {
            cfg.engine.seed = *seed_override;
            cfg.engine.uh.seed = *seed_override;
        }
        const cplx energy = parse_energy(energy_str);

        if (c_lyap->parsed()) {
            const auto rep = qpspec::cli::cmd_lyapunov(cfg, energy, eps);
            write_or_print(out_path, rep.text);
        } else if (c_prof->parsed()) {
            write_or_print(out_path,
                           qpspec::cli::cmd_le_profile(cfg, energy, eps_min, eps_max,
                                                       prof_steps));
        } else if (c_spec->parsed()) {
            const auto out = qpspec::cli::cmd_spectrum(cfg, threads);
            write_or_print(out_path, out.csv);
            std::cerr << "points: " << out.summary.total
                      << "  in-spectrum: " << out.summary.in_spectrum
                      << "  resolvent: " << out.summary.resolvent
                      << "  undecided: " << out.summary.undecided << "\n";
            if (out.reference_checked > 0)
                std::cerr << "closed-form agreement: " << out.reference_agreed << "/"
                          << out.reference_checked << "\n";
        } else if (c_kam->parsed()) {
            const auto out = qpspec::cli::cmd_kam(cfg, energy);
            write_or_print(out_path, out.jsonl);
            std::cerr << "steps: " << out.trace.steps.size()
                      << "  resonances: " << out.trace.resonance_count()
                      << "  stop: " << out.trace.stop_reason << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
