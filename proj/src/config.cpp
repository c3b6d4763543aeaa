#include "levidm/config.hpp"

#include <cmath>
#include <fstream>

#include "levidm/errors.hpp"

namespace levidm::io {

namespace {

using nlohmann::json;

const json* descend(const json& doc, const std::string& path) {
    const json* cur = &doc;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(
            start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

double require_number(const json& doc, const std::string& path) {
    const json* v = descend(doc, path);
    if (v == nullptr) throw InvalidInput(path + ": missing required field");
    if (!v->is_number()) throw InvalidInput(path + ": must be a number");
    return v->get<double>();
}

double number_or(const json& doc, const std::string& path, double fallback) {
    const json* v = descend(doc, path);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw InvalidInput(path + ": must be a number");
    return v->get<double>();
}

bool bool_or(const json& doc, const std::string& path, bool fallback) {
    const json* v = descend(doc, path);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw InvalidInput(path + ": must be a boolean");
    return v->get<bool>();
}

std::array<double, 3> require_vec3(const json& j, const std::string& path) {
    const json* v = descend(j, path);
    if (v == nullptr) throw InvalidInput(path + ": missing required field");
    if (!v->is_array() || v->size() != 3) {
        throw InvalidInput(path + ": must be an array of three numbers");
    }
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number()) {
            throw InvalidInput(path + ": must be an array of three numbers");
        }
        out[i] = (*v)[i].get<double>();
    }
    return out;
}

constexpr double kTwoPi = 2.0 * M_PI;

halo::WindTrack parse_wind(const json& doc) {
    halo::WindTrack w;
    w.psi_mean_rad = number_or(doc, "wind.psi_mean_rad", 0.0);
    w.psi_amplitude_rad = number_or(doc, "wind.psi_amplitude_rad", 0.0);
    w.period_s = number_or(doc, "wind.period_days", 365.25) * 86400.0;
    w.phase_zero_day = number_or(doc, "wind.phase_zero_day", 0.0);
    w.validate();
    return w;
}

sim::ForceSignal parse_signal(const json& s, const std::string& path,
                              const halo::WindTrack& wind) {
    if (!s.is_object() || !s.contains("type") || !s["type"].is_string()) {
        throw InvalidInput(path + ".type: missing signal type");
    }
    const std::string type = s["type"].get<std::string>();
    if (type == "constant") {
        return sim::ConstantForce{require_vec3(s, "force_n")};
    }
    if (type == "impulse") {
        return sim::ImpulseForce{require_vec3(s, "delta_p_ns"),
                                 require_number(s, "t0_s")};
    }
    if (type == "harmonic") {
        sim::HarmonicForce h;
        h.amplitude_n = require_number(s, "amplitude_n");
        h.freq_rad_s = kTwoPi * require_number(s, "freq_hz");
        h.phase_rad = number_or(s, "phase_rad", 0.0);
        h.direction = require_vec3(s, "direction");
        return h;
    }
    if (type == "directional_stochastic") {
        sim::DirectionalStochasticForce d;
        d.s_force_n2_hz = require_number(s, "s_force_n2_per_hz");
        if (bool_or(s, "use_wind", false)) {
            d.orientation = wind;
        } else {
            d.orientation = require_number(s, "psi_rad");
        }
        return d;
    }
    if (type == "uncorrelated_bath") {
        return sim::UncorrelatedBathForce{require_vec3(s, "s_force_n2_per_hz")};
    }
    throw InvalidInput(path + ".type: unknown signal type '" + type + "'");
}

} // namespace

std::string document_hash(const json& doc) {
    const std::string dump = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw InvalidInput("config: root must be an object");
    const json* schema = descend(doc, "schema");
    if (schema == nullptr || !schema->is_number_integer() ||
        schema->get<int>() != 1) {
        throw InvalidInput("schema: expected 1");
    }

    RunConfig cfg;
    cfg.hash = document_hash(doc);

    cfg.trap.mass_kg = require_number(doc, "trap.mass_kg");
    cfg.trap.omega_rad_s = {kTwoPi * require_number(doc, "trap.omega_x_hz"),
                            kTwoPi * require_number(doc, "trap.omega_y_hz"),
                            kTwoPi * require_number(doc, "trap.omega_z_hz")};
    cfg.trap.gamma_rad_s = {kTwoPi * require_number(doc, "trap.gamma_x_hz"),
                            kTwoPi * require_number(doc, "trap.gamma_y_hz"),
                            kTwoPi * require_number(doc, "trap.gamma_z_hz")};
    cfg.trap.temp_k = {require_number(doc, "trap.temp_x_k"),
                       require_number(doc, "trap.temp_y_k"),
                       require_number(doc, "trap.temp_z_k")};
    cfg.trap.detector_rotation_rad =
        number_or(doc, "trap.detector_rotation_rad", 0.0);
    cfg.trap.validate();

    cfg.wind = parse_wind(doc);

    if (doc.contains("signals")) {
        if (!doc["signals"].is_array()) {
            throw InvalidInput("signals: must be an array");
        }
        std::size_t idx = 0;
        for (const auto& s : doc["signals"]) {
            const std::string path = "signals[" + std::to_string(idx++) + "]";
            sim::ForceSignal sig = parse_signal(s, path, cfg.wind);
            sim::validate(sig);
            cfg.signals.push_back(std::move(sig));
        }
    }

    cfg.halo.rho_local_gev_cm3 = number_or(doc, "halo.rho_gev_per_cm3", 0.3);
    cfg.halo.v_mean_m_s = number_or(doc, "halo.v_mean_km_s", 220.0) * 1e3;
    cfg.halo.v_escape_m_s = number_or(doc, "halo.v_escape_km_s", 544.0) * 1e3;
    cfg.halo.m_chi_ev = number_or(doc, "halo.m_chi_ev", 1e9);
    cfg.halo.validate();

    cfg.sim.duration_s = require_number(doc, "sim.duration_s");
    cfg.sim.dt_s = require_number(doc, "sim.dt_s");
    const double seed = number_or(doc, "sim.seed", 1.0);
    if (seed < 0.0) throw InvalidInput("sim.seed: must be >= 0");
    cfg.sim.seed = static_cast<std::uint64_t>(seed);
    const double n_ens = number_or(doc, "sim.n_ensemble", 1.0);
    if (n_ens < 1.0) throw InvalidInput("sim.n_ensemble: must be >= 1");
    cfg.sim.n_ensemble = static_cast<std::size_t>(n_ens);
    const double stride = number_or(doc, "sim.sample_every", 1.0);
    if (stride < 1.0) throw InvalidInput("sim.sample_every: must be >= 1");
    cfg.sim.sample_every = static_cast<std::size_t>(stride);
    cfg.sim.store_velocities = bool_or(doc, "sim.store_velocities", true);

    const double seg = number_or(doc, "spectra.segment_length", 16384.0);
    if (seg < 8.0) throw InvalidInput("spectra.segment_length: must be >= 8");
    cfg.spectra.segment_length = static_cast<std::size_t>(seg);
    cfg.spectra.overlap = number_or(doc, "spectra.overlap", 0.5);
    if (!(cfg.spectra.overlap >= 0.0) || cfg.spectra.overlap > 0.9) {
        throw InvalidInput("spectra.overlap: must lie in [0, 0.9]");
    }

    if (doc.contains("decoherence")) {
        cfg.decoherence.present = true;
        cfg.decoherence.coupling.g_chi =
            require_number(doc, "decoherence.g_chi");
        cfg.decoherence.coupling.g_m = require_number(doc, "decoherence.g_m");
        cfg.decoherence.coupling.m_mediator_ev =
            require_number(doc, "decoherence.m_mediator_ev");
        cfg.decoherence.coupling.validate();
        cfg.decoherence.target.n_nucleons =
            require_number(doc, "decoherence.target.n_nucleons");
        cfg.decoherence.target.radius_m =
            require_number(doc, "decoherence.target.radius_m");
        cfg.decoherence.target.mass_kg =
            require_number(doc, "decoherence.target.mass_kg");
        cfg.decoherence.target.validate();
        cfg.decoherence.superposition.delta_x_m =
            require_number(doc, "decoherence.superposition.delta_x_m");
        cfg.decoherence.superposition.exposure_s =
            require_number(doc, "decoherence.superposition.exposure_s");
        cfg.decoherence.superposition.validate();
    }

    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) {
            throw InvalidInput("output_dir: must be a string");
        }
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw InvalidInput("config parse error in " + path + ": " + e.what());
    }
    return parse_config(doc);
}

} // namespace levidm::io
