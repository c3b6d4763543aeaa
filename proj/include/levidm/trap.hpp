#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "levidm/errors.hpp"
#include "levidm/halo.hpp"

// Sensor description and injectable force signals.

namespace levidm::sim {

struct TrapConfig {
    double mass_kg = 0.0;
    std::array<double, 3> omega_rad_s = {0.0, 0.0, 0.0}; // trap frequencies
    std::array<double, 3> gamma_rad_s = {0.0, 0.0, 0.0}; // energy damping rates
    std::array<double, 3> temp_k = {0.0, 0.0, 0.0};      // CM temperatures
    // Misalignment of the lab detectors relative to the normal modes,
    // x-y plane, in (-pi/2, pi/2].
    double detector_rotation_rad = 0.0;

    void validate() const;
};

struct ConstantForce {
    std::array<double, 3> force_n = {0.0, 0.0, 0.0};
};

struct ImpulseForce {
    std::array<double, 3> delta_p_ns = {0.0, 0.0, 0.0}; // momentum kick, N s
    double t0_s = 0.0;
};

struct HarmonicForce {
    double amplitude_n = 0.0;
    double freq_rad_s = 0.0;
    double phase_rad = 0.0;
    std::array<double, 3> direction = {1.0, 0.0, 0.0}; // unit vector
};

// White force noise confined to a fixed (or yearly-modulating) orientation
// in the x-y plane. s_force is the one-sided force PSD of the stream.
struct DirectionalStochasticForce {
    double s_force_n2_hz = 0.0;
    std::variant<double, halo::WindTrack> orientation = 0.0; // psi or track
};

// Independent white force noise per axis (extra thermal-like baths).
struct UncorrelatedBathForce {
    std::array<double, 3> s_force_n2_hz = {0.0, 0.0, 0.0};
};

using ForceSignal = std::variant<ConstantForce, ImpulseForce, HarmonicForce,
                                 DirectionalStochasticForce,
                                 UncorrelatedBathForce>;

void validate(const ForceSignal& s);

// Orientation angle of a directional signal at time t.
double signal_psi(const DirectionalStochasticForce& s, double t_s);

// Uniformly sampled center-of-mass motion with full provenance. Velocities
// are either empty (not stored) or the same length as positions.
struct Trajectory {
    double dt_s = 0.0; // sample interval of the stored series
    std::size_t n_samples = 0;
    std::array<std::vector<double>, 3> positions_m;
    std::array<std::vector<double>, 3> velocities_m_s;
    std::uint64_t seed = 0;
    TrapConfig trap;
    std::vector<ForceSignal> signals;
    double integration_dt_s = 0.0;      // integrator step used to produce it
    double cumulative_rotation_rad = 0.0;

    bool has_velocities() const { return !velocities_m_s[0].empty(); }
};

} // namespace levidm::sim
