// levi-dm: simulate trapped-particle dynamics under injectable force
// signals, extract directional cross-correlation spectra, run dark-matter
// decoherence scans, and print the reference sensitivity table.

#include <iostream>

#include "CLI11.hpp"

#include "levidm/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"levitated-sensor dark-matter toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::string mode = "isotropic";
    std::string format = "text";
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> trajectories;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* copt = sub->add_option("--config", config_path, "JSON run configuration");
        if (needs_config) copt->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--seed", seed, "seed override")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* sim = app.add_subcommand("simulate", "integrate trajectories");
    add_common(sim, true);

    auto* spec = app.add_subcommand("spectra", "spectral estimation and orientation fit");
    add_common(spec, true);
    spec->add_option("trajectories", trajectories,
                     "trajectory CSV files (globs allowed)")
        ->required();

    auto* dec = app.add_subcommand("decohere", "dark-matter decoherence rates");
    add_common(dec, false);
    dec->add_option("--preset", preset, "bateman-100ev or riedel-scan");
    dec->add_option("--mode", mode, "isotropic or directional")
        ->check(CLI::IsMember({"isotropic", "directional"}));
    dec->add_flag("--scan", "run the full preset lattice (implied by riedel-scan)");

    auto* tab = app.add_subcommand("table", "reference sensitivity table");
    tab->add_option("--format", format, "text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    levidm::cli::Overrides ov;
    if (seed_set) ov.seed = seed;
    if (!out_dir.empty()) ov.out_dir = out_dir;

    if (sim->parsed()) {
        return levidm::cli::cmd_simulate(config_path, ov, std::cerr);
    }
    if (spec->parsed()) {
        return levidm::cli::cmd_spectra(trajectories, config_path, ov, std::cerr);
    }
    if (dec->parsed()) {
        if (preset.empty() && config_path.empty()) {
            std::cerr << "error: decohere needs --preset or --config\n";
            return 2;
        }
        return levidm::cli::cmd_decohere(preset, config_path, mode, ov, std::cerr);
    }
    if (tab->parsed()) {
        return levidm::cli::cmd_table(format, std::cout, std::cerr);
    }
    return 2;
}
