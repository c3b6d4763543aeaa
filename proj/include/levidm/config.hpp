#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "levidm/decoherence.hpp"
#include "levidm/halo.hpp"
#include "levidm/trap.hpp"

// Versioned JSON run configuration. Field names are unit-suffixed (mass_kg,
// omega_x_hz, m_chi_ev, ...); frequencies and damping rates are given in Hz
// and converted to rad/s on load. Validation is all-or-nothing and failures
// name the offending field path.

namespace levidm::io {

struct SimParams {
    double duration_s = 1.0;
    double dt_s = 1e-7;
    std::uint64_t seed = 1;
    std::size_t n_ensemble = 1;
    std::size_t sample_every = 1;
    bool store_velocities = true;
};

struct SpectraParams {
    std::size_t segment_length = 16384;
    double overlap = 0.5;
};

// Optional explicit decoherence physics (an alternative to --preset).
struct DecoherePhysics {
    bool present = false;
    deco::YukawaCoupling coupling;
    deco::Target target;
    deco::Superposition superposition;
};

struct RunConfig {
    sim::TrapConfig trap;
    std::vector<sim::ForceSignal> signals;
    halo::HaloModel halo;
    halo::WindTrack wind;
    SimParams sim;
    SpectraParams spectra;
    DecoherePhysics decoherence;
    std::string output_dir = "out";
    std::string hash; // 16 hex digits over the canonical document
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// FNV-1a (64 bit) over the canonical (sorted-key) dump.
std::string document_hash(const nlohmann::json& doc);

} // namespace levidm::io
