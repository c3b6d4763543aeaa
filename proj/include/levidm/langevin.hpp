#pragma once

#include <cstdint>
#include <span>

#include "levidm/trap.hpp"

// Time-domain simulation of the trapped particle plus the closed-form
// sensitivity quantities of a thermal-noise-limited oscillator.

namespace levidm::sim {

struct SimOptions {
    // Store every k-th integrator sample (the Trajectory's dt_s becomes
    // k * dt). Long runs at spectral-quality time steps do not fit in
    // memory at full rate.
    std::size_t sample_every = 1;
    bool store_velocities = true;
};

// Integrate the damped, thermally driven harmonic motion with the injected
// signals. The trap dynamics are advanced by the exact one-step Gaussian
// propagator of the linear system (no frequency warp at any step size);
// deterministic forces enter as their per-step trapezoidal average,
// stochastic signal forces as per-step constants, impulses as instantaneous
// velocity kicks. Identical arguments (including seed) give a bit-identical
// Trajectory. The trap's detector_rotation is applied to the emitted x-y
// channels.
//
// dt must satisfy dt <= 0.01 * 2 pi / max(omega); the cap bounds the
// force-sampling error, not the trap propagation, which is exact.
Trajectory simulate(const TrapConfig& trap, std::span<const ForceSignal> signals,
                    double duration_s, double dt_s, std::uint64_t seed,
                    const SimOptions& opts = {});

// Thermal-noise force floor sqrt(2 k_B m Gamma T b) for the given axis and
// measurement bandwidth b in Hz.
double min_force_n(const TrapConfig& trap, double bandwidth_hz, int axis);

// Ground-state position spread sqrt(hbar / (2 m omega)).
double zero_point_fluctuation_m(double mass_kg, double omega_rad_s);

// Momentum-kick resolution at the standard quantum limit,
// sqrt(hbar m omega0 / 2).
double sql_impulse_ns(double mass_kg, double omega0_rad_s);

// Rotate the emitted x-y channels by theta (z untouched); the trajectory's
// cumulative rotation metadata is updated.
Trajectory rotate_detector_frame(const Trajectory& traj, double theta_rad);

} // namespace levidm::sim
