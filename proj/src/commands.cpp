#include "levidm/commands.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "levidm/config.hpp"
#include "levidm/fileio.hpp"
#include "levidm/langevin.hpp"
#include "levidm/reference_table.hpp"

namespace levidm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int map_exception(const std::exception& e, std::ostream& diag) {
    diag << "error: " << e.what() << "\n";
    if (dynamic_cast<const InvalidInput*>(&e) != nullptr) return 2;
    if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const NumericError*>(&e) != nullptr) return 4;
    if (dynamic_cast<const EstimationError*>(&e) != nullptr) return 4;
    return 4;
}

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
}

io::RunConfig load_with_overrides(const std::string& config_path,
                                  const Overrides& ov) {
    io::RunConfig cfg = io::load_config(config_path);
    if (ov.seed) cfg.sim.seed = *ov.seed;
    if (ov.out_dir) cfg.output_dir = *ov.out_dir;
    return cfg;
}

std::string member_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trajectory_%03zu.csv", i);
    return buf;
}

// Run f(i) for i in [0, n) on a few worker threads; results land by index.
template <typename F>
void parallel_for(std::size_t n, const F& f) {
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> futs;
    futs.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < n;
                 i = next.fetch_add(1)) {
                f(i);
            }
        }));
    }
    for (auto& fu : futs) fu.get();
}

} // namespace

int cmd_simulate(const std::string& config_path, const Overrides& ov,
                 std::ostream& diag) {
    try {
        const io::RunConfig cfg = load_with_overrides(config_path, ov);
        fs::create_directories(cfg.output_dir);

        std::vector<std::uint64_t> seeds(cfg.sim.n_ensemble);
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            seeds[i] = cfg.sim.seed + i;
        }

        std::vector<std::string> files(cfg.sim.n_ensemble);
        std::exception_ptr failure;
        std::mutex failure_mutex;
        parallel_for(cfg.sim.n_ensemble, [&](std::size_t i) {
            try {
                sim::SimOptions opts;
                opts.sample_every = cfg.sim.sample_every;
                opts.store_velocities = cfg.sim.store_velocities;
                const sim::Trajectory traj =
                    sim::simulate(cfg.trap, cfg.signals, cfg.sim.duration_s,
                                  cfg.sim.dt_s, seeds[i], opts);
                const fs::path path = fs::path(cfg.output_dir) / member_name(i);
                io::write_trajectory_csv(path.string(), traj, cfg.hash);
                files[i] = path.filename().string();
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        if (failure) std::rethrow_exception(failure);

        json manifest{{"schema", 1},
                      {"config_hash", cfg.hash},
                      {"seeds", seeds},
                      {"trajectory_files", files},
                      {"dt_s", cfg.sim.dt_s * static_cast<double>(cfg.sim.sample_every)},
                      {"n_ensemble", cfg.sim.n_ensemble}};
        write_json_file(fs::path(cfg.output_dir) / "manifest.json", manifest);
        return 0;
    } catch (const std::exception& e) {
        return map_exception(e, diag);
    }
}

int cmd_spectra(const std::vector<std::string>& trajectory_patterns,
                const std::string& config_path, const Overrides& ov,
                std::ostream& diag) {
    try {
        const io::RunConfig cfg = load_with_overrides(config_path, ov);
        fs::create_directories(cfg.output_dir);

        std::vector<std::string> paths;
        for (const auto& pat : trajectory_patterns) {
            for (auto& p : io::expand_glob(pat)) paths.push_back(p);
        }
        if (paths.empty()) {
            throw InvalidInput("cmd_spectra: no trajectory files matched");
        }

        std::vector<spectra::SpectralEstimate> parts(paths.size());
        std::exception_ptr failure;
        std::mutex failure_mutex;
        parallel_for(paths.size(), [&](std::size_t i) {
            try {
                const sim::Trajectory traj =
                    io::read_trajectory_csv(paths[i], cfg.trap);
                parts[i] = spectra::welch_psd(traj, cfg.spectra.segment_length,
                                              cfg.spectra.overlap);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        if (failure) std::rethrow_exception(failure);

        const spectra::SpectralEstimate est = spectra::average_estimates(parts);
        const spectra::SusceptibilityModel model{cfg.trap};
        const spectra::OrientationFit fit =
            spectra::estimate_orientation(est, model);

        io::write_spectra_csv((fs::path(cfg.output_dir) / "spectra.csv").string(),
                              est, cfg.hash);
        write_json_file(fs::path(cfg.output_dir) / "spectra.json",
                        json{{"config_hash", cfg.hash},
                             {"n_averages", est.n_averages},
                             {"window", est.window},
                             {"segment_length", est.segment_length},
                             {"overlap", est.overlap},
                             {"n_inputs", paths.size()}});
        write_json_file(fs::path(cfg.output_dir) / "orientation.json",
                        json{{"config_hash", cfg.hash},
                             {"psi_hat_rad", fit.psi_hat_rad},
                             {"quadrant_sign", fit.quadrant_sign},
                             {"uncertainty_rad", fit.uncertainty_rad},
                             {"amplitude_n2_per_hz", fit.amplitude},
                             {"amplitude_sigma_n2_per_hz", fit.amplitude_sigma},
                             {"s_force_hat_n2_per_hz", fit.s_force_hat}});
        return 0;
    } catch (const std::exception& e) {
        return map_exception(e, diag);
    }
}

int cmd_decohere(const std::string& preset_name, const std::string& config_path,
                 const std::string& mode, const Overrides& ov,
                 std::ostream& diag) {
    try {
        std::optional<deco::DirectionalMode> dir_mode;
        if (mode == "directional") {
            dir_mode = deco::DirectionalMode{};
        } else if (mode != "isotropic") {
            throw InvalidInput("cmd_decohere: mode must be isotropic or directional");
        }

        deco::ScenarioPreset preset;
        std::string hash;
        std::string out_dir = ov.out_dir.value_or("out");
        if (!preset_name.empty()) {
            preset = deco::scenario_preset(preset_name);
            hash = io::document_hash(json{{"preset", preset_name}, {"mode", mode}});
        } else {
            const io::RunConfig cfg = load_with_overrides(config_path, ov);
            if (!cfg.decoherence.present) {
                throw InvalidInput("decoherence: section missing from config");
            }
            preset.name = "config";
            preset.points.push_back({cfg.halo, cfg.decoherence.coupling,
                                     cfg.decoherence.target,
                                     cfg.decoherence.superposition});
            hash = cfg.hash;
            out_dir = cfg.output_dir;
            if (ov.out_dir) out_dir = *ov.out_dir;
        }

        deco::DecoherenceOptions opts;
        if (ov.seed) opts.mc_seed = *ov.seed;

        std::vector<io::ScanRow> rows(preset.points.size());
        std::exception_ptr failure;
        std::mutex failure_mutex;
        parallel_for(preset.points.size(), [&](std::size_t i) {
            try {
                const auto& pt = preset.points[i];
                io::ScanRow row;
                row.m_chi_ev = pt.halo.m_chi_ev;
                row.m_mediator_ev = pt.coupling.m_mediator_ev;
                row.report = deco::dm_decoherence(pt.halo, pt.coupling, pt.target,
                                                  pt.superposition, dir_mode, opts);
                rows[i] = row;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        if (failure) std::rethrow_exception(failure);

        fs::create_directories(out_dir);
        io::write_scan_csv((fs::path(out_dir) / "scan.csv").string(), rows, hash);
        write_json_file(fs::path(out_dir) / "scan.json",
                        json{{"config_hash", hash},
                             {"preset", preset.name},
                             {"mode", mode},
                             {"n_points", rows.size()},
                             {"quad_rel_tol", opts.quad_rel_tol},
                             {"mc_seed", opts.mc_seed},
                             {"agreement_gate", opts.agreement}});
        return 0;
    } catch (const std::exception& e) {
        return map_exception(e, diag);
    }
}

int cmd_table(const std::string& format, std::ostream& out, std::ostream& diag) {
    try {
        if (format == "text") {
            reftable::print_text(out);
        } else if (format == "json") {
            reftable::print_json(out);
        } else if (format == "csv") {
            reftable::print_csv(out);
        } else {
            throw InvalidInput("cmd_table: format must be text, json or csv");
        }
        return 0;
    } catch (const std::exception& e) {
        return map_exception(e, diag);
    }
}

} // namespace levidm::cli
