// dicke — Liouvillian spectra, sweeps, dynamics, symmetry and rate reports

#include "dicke/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kUsage = 2 };

void print_spectrum(const dicke::SpectrumResult& r) {
    const auto& rep = r.report;
    std::printf("lambda1 = %.6g %+.6gi\n", rep.lambda1.real(), rep.lambda1.imag());
    std::printf("subradiant (-Re < %.3g): %d including steady state, %d excluding\n", rep.threshold,
                rep.count_inclusive, rep.count_exclusive);
    if (r.drive_limit)
        std::printf("strong-drive recount (x%.3g): %d including steady state, %d excluding\n",
                    r.drive_limit->drive_factor, r.drive_limit->inclusive, r.drive_limit->exclusive);
    std::printf("distinct frequencies in subradiant set: %zu\n", rep.frequencies.size());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven disordered Dicke model: Liouvillian spectra and dark-state counting"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--threads", threads, "worker threads for sweeps (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "seed for gaussian disorder");
    app.add_option("--gamma", gamma, "value of gamma used to label outputs");

    auto* spectrum = app.add_subcommand("spectrum", "Liouvillian spectrum and subradiant classification");
    auto* sweep = app.add_subcommand("sweep", "lambda1 over the (drive, broadening) grid");
    auto* dynamics = app.add_subcommand("dynamics", "correlation traces, exponential fits, eigenvector contributions");
    auto* symmetry = app.add_subcommand("symmetry", "irrep decompositions and dark-state counts");
    auto* rates = app.add_subcommand("rates", "secular rate equation and predicted frequencies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    dicke::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = dicke::load_config(config_path);
        if (out_dir) cfg.output_dir = *out_dir;
        if (threads) cfg.threads = *threads;
        if (seed) cfg.disorder.seed = *seed;
        if (gamma) cfg.gamma_label = *gamma;
        dicke::validate(cfg);
    } catch (const dicke::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    }

    const std::filesystem::path dir = cfg.output_dir;
    try {
        if (spectrum->parsed()) {
            const auto r = dicke::run_spectrum(cfg);
            dicke::write_spectrum(cfg, r, dir);
            print_spectrum(r);
        } else if (sweep->parsed()) {
            const auto r = dicke::run_sweep(cfg);
            dicke::write_sweep(cfg, r, dir);
            int failed = 0;
            for (const auto& p : r.points) failed += !p.error.empty();
            std::printf("%zu grid points, %d failed\n", r.points.size(), failed);
        } else if (dynamics->parsed()) {
            const auto r = dicke::run_dynamics(cfg);
            dicke::write_dynamics(cfg, r, dir);
            for (const auto& f : r.fits) {
                if (f.fit) std::printf("(%d,%d) A = %.4g  B = %.4g\n", f.pair.n, f.pair.m, f.fit->amplitude, f.fit->rate);
                else std::printf("(%d,%d) fit failed: %s\n", f.pair.n, f.pair.m, f.error.c_str());
            }
        } else if (symmetry->parsed()) {
            const auto r = dicke::run_symmetry(cfg);
            dicke::write_symmetry(cfg, r, dir);
            std::cout << r.table;
        } else if (rates->parsed()) {
            const auto r = dicke::run_rates(cfg);
            dicke::write_rates(cfg, r, dir);
            std::printf("conservation: %s (max |column sum| = %.3g)\n", r.conservation_ok() ? "PASS" : "FAIL",
                        r.max_column_sum);
            std::printf("null space dimension: %d%s\n", r.null_space.dimension,
                        r.null_space.ambiguous ? " (ambiguous gap)" : "");
            if (r.prediction)
                std::printf("predicted frequencies: %zu pairs, %zu distinct; Liouvillian match: %s\n",
                            r.prediction->pairs.size(), r.prediction->distinct.size(),
                            r.comparison->ok() ? "PASS" : "FAIL");
        }
    } catch (const dicke::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
