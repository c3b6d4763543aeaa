#include "levidm/langevin.hpp"

#include <complex>
#include <cmath>
#include <string>

#include "levidm/rng.hpp"
#include "levidm/units.hpp"

namespace levidm::sim {

using units::constants::hbar;
using units::constants::k_boltzmann;

void TrapConfig::validate() const {
    if (!(mass_kg > 0.0)) throw InvalidInput("trap.mass_kg: must be > 0");
    for (int j = 0; j < 3; ++j) {
        if (!(omega_rad_s[j] > 0.0)) {
            throw InvalidInput("trap.omega[" + std::to_string(j) +
                               "]: must be > 0");
        }
        if (!(gamma_rad_s[j] >= 0.0)) {
            throw InvalidInput("trap.gamma[" + std::to_string(j) +
                               "]: must be >= 0");
        }
        if (!(temp_k[j] >= 0.0)) {
            throw InvalidInput("trap.temp[" + std::to_string(j) +
                               "]: must be >= 0");
        }
    }
    if (!(detector_rotation_rad > -M_PI / 2.0) ||
        !(detector_rotation_rad <= M_PI / 2.0)) {
        throw InvalidInput("trap.detector_rotation_rad: must lie in (-pi/2, pi/2]");
    }
}

void validate(const ForceSignal& s) {
    std::visit(
        [](const auto& sig) {
            using T = std::decay_t<decltype(sig)>;
            if constexpr (std::is_same_v<T, ConstantForce>) {
                for (double f : sig.force_n) {
                    if (!std::isfinite(f)) {
                        throw InvalidInput("signal.constant: non-finite force");
                    }
                }
            } else if constexpr (std::is_same_v<T, ImpulseForce>) {
                for (double p : sig.delta_p_ns) {
                    if (!std::isfinite(p)) {
                        throw InvalidInput("signal.impulse: non-finite delta_p");
                    }
                }
            } else if constexpr (std::is_same_v<T, HarmonicForce>) {
                const double n2 = sig.direction[0] * sig.direction[0] +
                                  sig.direction[1] * sig.direction[1] +
                                  sig.direction[2] * sig.direction[2];
                if (std::abs(n2 - 1.0) > 1e-12) {
                    throw InvalidInput("signal.harmonic.direction: must be a unit vector");
                }
                if (!(sig.amplitude_n >= 0.0) || !(sig.freq_rad_s >= 0.0)) {
                    throw InvalidInput("signal.harmonic: amplitude and freq must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, DirectionalStochasticForce>) {
                if (!(sig.s_force_n2_hz >= 0.0)) {
                    throw InvalidInput("signal.directional_stochastic.s_force: must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, UncorrelatedBathForce>) {
                for (double s : sig.s_force_n2_hz) {
                    if (!(s >= 0.0)) {
                        throw InvalidInput("signal.uncorrelated_bath.s_force: must be >= 0");
                    }
                }
            }
        },
        s);
}

double signal_psi(const DirectionalStochasticForce& s, double t_s) {
    if (std::holds_alternative<double>(s.orientation)) {
        return std::get<double>(s.orientation);
    }
    return halo::wind_angle(std::get<halo::WindTrack>(s.orientation), t_s);
}

namespace {

// Stream id layout: 0-2 thermal baths, 3-8 initial conditions,
// 16 + 8*i (+axis) for signal i.
constexpr std::uint64_t kSignalStreamBase = 16;

struct StochasticDrive {
    // Gaussian amplitude per step for a white force of one-sided PSD S:
    // <F F'> = (S/2) delta(t-t') discretizes to sqrt(S / (2 dt)) per step.
    double sigma_step = 0.0;
    bool directional = false;
    bool wind = false;
    double cos_psi = 1.0, sin_psi = 0.0;
    halo::WindTrack track;
    int axis = 0; // for per-axis baths
    rng::NoiseStream stream;
};

} // namespace

Trajectory simulate(const TrapConfig& trap, std::span<const ForceSignal> signals,
                    double duration_s, double dt_s, std::uint64_t seed,
                    const SimOptions& opts) {
    trap.validate();
    for (const auto& s : signals) validate(s);
    if (!(duration_s > 0.0)) throw InvalidInput("simulate: duration must be > 0");
    if (!(dt_s > 0.0)) throw InvalidInput("simulate: dt must be > 0");
    if (opts.sample_every == 0) throw InvalidInput("simulate: sample_every must be >= 1");

    const double omega_max =
        std::max({trap.omega_rad_s[0], trap.omega_rad_s[1], trap.omega_rad_s[2]});
    const double dt_cap = 0.01 * 2.0 * M_PI / omega_max;
    if (dt_s > dt_cap * (1.0 + 1e-12)) {
        throw InvalidInput("simulate: dt exceeds stability cap 0.01 * 2pi / max(omega) = " +
                           std::to_string(dt_cap));
    }

    const auto n_steps = static_cast<std::size_t>(std::floor(duration_s / dt_s));
    const std::size_t n_stored = n_steps / opts.sample_every + 1;

    // One-step propagator of the damped oscillator, exact for the linear
    // dynamics: mean map M = exp(A dt) with A = [[0,1],[-w^2,-G]], evaluated
    // through complex nu = sqrt(w^2 - G^2/4) so under-, over- and critically
    // damped axes share one expression. The noise increment covariance
    // follows from stationarity, Q = S - M S M^T with S = diag(kT/mw^2,
    // kT/m), sampled through its Cholesky factor. A splitting integrator
    // would displace the sampled resonance by O((w dt)^2 / 24), which is a
    // third of a linewidth for Q ~ 1e3 at the dt cap; the exact map has no
    // such warp.
    double w2[3];
    double m00[3], m01[3], m10[3], m11[3];
    double l00[3], l10[3], l11[3];
    for (int j = 0; j < 3; ++j) {
        const double w = trap.omega_rad_s[j];
        const double g = trap.gamma_rad_s[j];
        w2[j] = w * w;
        const std::complex<double> nu =
            std::sqrt(std::complex<double>(w * w - 0.25 * g * g, 0.0));
        const std::complex<double> nh = nu * dt_s;
        const std::complex<double> cos_nh = std::cos(nh);
        // sin(nu h)/nu, finite as nu -> 0.
        const std::complex<double> sinc_nh =
            std::abs(nh) > 1e-8 ? std::sin(nh) / nu
                                : std::complex<double>(dt_s, 0.0);
        const double decay = std::exp(-0.5 * g * dt_s);
        m00[j] = decay * (cos_nh + 0.5 * g * sinc_nh).real();
        m01[j] = decay * sinc_nh.real();
        m10[j] = decay * (-w * w * sinc_nh).real();
        m11[j] = decay * (cos_nh - 0.5 * g * sinc_nh).real();

        const double sx = k_boltzmann * trap.temp_k[j] / (trap.mass_kg * w * w);
        const double sv = k_boltzmann * trap.temp_k[j] / trap.mass_kg;
        const double q00 = sx - (m00[j] * m00[j] * sx + m01[j] * m01[j] * sv);
        const double q01 = -(m00[j] * m10[j] * sx + m01[j] * m11[j] * sv);
        const double q11 = sv - (m10[j] * m10[j] * sx + m11[j] * m11[j] * sv);
        l00[j] = std::sqrt(std::max(q00, 0.0));
        l10[j] = l00[j] > 0.0 ? q01 / l00[j] : 0.0;
        l11[j] = std::sqrt(std::max(q11 - l10[j] * l10[j], 0.0));
    }

    rng::NoiseStream thermal[3] = {{seed, 0}, {seed, 1}, {seed, 2}};

    // Equilibrium initial conditions (exact for the signal-free trap).
    double x[3], v[3];
    for (int j = 0; j < 3; ++j) {
        rng::NoiseStream init_x(seed, 3 + static_cast<std::uint64_t>(j));
        rng::NoiseStream init_v(seed, 6 + static_cast<std::uint64_t>(j));
        const double kt = k_boltzmann * trap.temp_k[j];
        x[j] = std::sqrt(kt / (trap.mass_kg * w2[j])) * init_x.gaussian();
        v[j] = std::sqrt(kt / trap.mass_kg) * init_v.gaussian();
    }

    // Split signals into precomputed pieces.
    double f_const[3] = {0.0, 0.0, 0.0};
    std::vector<HarmonicForce> harmonics;
    std::vector<std::pair<std::size_t, std::array<double, 3>>> kicks;
    std::vector<StochasticDrive> drives;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        const std::uint64_t base = kSignalStreamBase + 8 * i;
        std::visit(
            [&](const auto& sig) {
                using T = std::decay_t<decltype(sig)>;
                if constexpr (std::is_same_v<T, ConstantForce>) {
                    for (int j = 0; j < 3; ++j) f_const[j] += sig.force_n[j];
                } else if constexpr (std::is_same_v<T, HarmonicForce>) {
                    harmonics.push_back(sig);
                } else if constexpr (std::is_same_v<T, ImpulseForce>) {
                    if (sig.t0_s >= 0.0 && sig.t0_s < duration_s) {
                        const auto step =
                            static_cast<std::size_t>(std::floor(sig.t0_s / dt_s));
                        kicks.emplace_back(step, sig.delta_p_ns);
                    }
                } else if constexpr (std::is_same_v<T, DirectionalStochasticForce>) {
                    StochasticDrive d{std::sqrt(sig.s_force_n2_hz / (2.0 * dt_s)),
                                      true,
                                      std::holds_alternative<halo::WindTrack>(sig.orientation),
                                      1.0,
                                      0.0,
                                      {},
                                      0,
                                      rng::NoiseStream(seed, base)};
                    if (d.wind) {
                        d.track = std::get<halo::WindTrack>(sig.orientation);
                    } else {
                        const double psi = std::get<double>(sig.orientation);
                        d.cos_psi = std::cos(psi);
                        d.sin_psi = std::sin(psi);
                    }
                    drives.push_back(d);
                } else if constexpr (std::is_same_v<T, UncorrelatedBathForce>) {
                    for (int j = 0; j < 3; ++j) {
                        if (sig.s_force_n2_hz[j] <= 0.0) continue;
                        drives.push_back(
                            {std::sqrt(sig.s_force_n2_hz[j] / (2.0 * dt_s)), false,
                             false, 1.0, 0.0, {}, j,
                             rng::NoiseStream(seed, base + static_cast<std::uint64_t>(j))});
                    }
                }
            },
            signals[i]);
    }
    const bool simple_forces = harmonics.empty() && drives.empty();

    Trajectory traj;
    traj.dt_s = dt_s * static_cast<double>(opts.sample_every);
    traj.n_samples = n_stored;
    traj.seed = seed;
    traj.trap = trap;
    traj.signals.assign(signals.begin(), signals.end());
    traj.integration_dt_s = dt_s;
    for (int j = 0; j < 3; ++j) {
        traj.positions_m[j].resize(n_stored);
        if (opts.store_velocities) traj.velocities_m_s[j].resize(n_stored);
    }

    const double inv_m = 1.0 / trap.mass_kg;

    auto eval_deterministic = [&](double t, double out[3]) {
        out[0] = f_const[0];
        out[1] = f_const[1];
        out[2] = f_const[2];
        for (const auto& h : harmonics) {
            const double a =
                h.amplitude_n * std::cos(h.freq_rad_s * t + h.phase_rad);
            out[0] += a * h.direction[0];
            out[1] += a * h.direction[1];
            out[2] += a * h.direction[2];
        }
    };

    auto store = [&](std::size_t slot) {
        for (int j = 0; j < 3; ++j) {
            traj.positions_m[j][slot] = x[j];
            if (opts.store_velocities) traj.velocities_m_s[j][slot] = v[j];
        }
    };
    store(0);

    std::size_t next_kick = 0;
    std::size_t slot = 1;
    // Deterministic force at the step edges; f_lo carries over between steps.
    double f_lo[3], f_hi[3], f_sto[3];
    eval_deterministic(0.0, f_lo);
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * dt_s;

        while (next_kick < kicks.size() && kicks[next_kick].first == n) {
            for (int j = 0; j < 3; ++j) {
                v[j] += kicks[next_kick].second[j] * inv_m;
            }
            ++next_kick;
        }

        // Per-step white signal noise, held constant across both B kicks.
        f_sto[0] = f_sto[1] = f_sto[2] = 0.0;
        for (auto& d : drives) {
            const double amp = d.sigma_step * d.stream.gaussian();
            if (d.directional) {
                if (d.wind) {
                    const double psi = halo::wind_angle(d.track, t);
                    f_sto[0] += amp * std::cos(psi);
                    f_sto[1] += amp * std::sin(psi);
                } else {
                    f_sto[0] += amp * d.cos_psi;
                    f_sto[1] += amp * d.sin_psi;
                }
            } else {
                f_sto[d.axis] += amp;
            }
        }

        if (simple_forces) {
            f_hi[0] = f_lo[0];
            f_hi[1] = f_lo[1];
            f_hi[2] = f_lo[2];
        } else {
            eval_deterministic(t + dt_s, f_hi);
        }

        // Exact Gaussian update about the step's force balance point; the
        // deterministic force enters as its trapezoidal average, the
        // stochastic sample as a constant over the step.
        for (int j = 0; j < 3; ++j) {
            const double f_bar = 0.5 * (f_lo[j] + f_hi[j]) + f_sto[j];
            const double xp = f_bar * inv_m / w2[j];
            const double dx = x[j] - xp;
            const double xi1 = thermal[j].gaussian();
            const double xi2 = thermal[j].gaussian();
            x[j] = xp + m00[j] * dx + m01[j] * v[j] + l00[j] * xi1;
            v[j] = m10[j] * dx + m11[j] * v[j] + l10[j] * xi1 + l11[j] * xi2;
        }
        f_lo[0] = f_hi[0];
        f_lo[1] = f_hi[1];
        f_lo[2] = f_hi[2];

        if ((n + 1) % opts.sample_every == 0) {
            for (int j = 0; j < 3; ++j) {
                if (!std::isfinite(x[j]) || !std::isfinite(v[j])) {
                    throw NumericError("simulate: non-finite state at step " +
                                       std::to_string(n + 1));
                }
            }
            if (slot < n_stored) store(slot++);
        }
    }

    if (trap.detector_rotation_rad != 0.0) {
        Trajectory rotated = rotate_detector_frame(traj, trap.detector_rotation_rad);
        return rotated;
    }
    return traj;
}

double min_force_n(const TrapConfig& trap, double bandwidth_hz, int axis) {
    if (axis < 0 || axis > 2) throw InvalidInput("min_force: axis must be 0, 1 or 2");
    if (!(bandwidth_hz >= 0.0)) throw InvalidInput("min_force: bandwidth must be >= 0");
    return std::sqrt(2.0 * k_boltzmann * trap.mass_kg * trap.gamma_rad_s[axis] *
                     trap.temp_k[axis] * bandwidth_hz);
}

double zero_point_fluctuation_m(double mass_kg, double omega_rad_s) {
    if (!(mass_kg > 0.0) || !(omega_rad_s > 0.0)) {
        throw InvalidInput("zero_point_fluctuation: mass and omega must be > 0");
    }
    return std::sqrt(hbar / (2.0 * mass_kg * omega_rad_s));
}

double sql_impulse_ns(double mass_kg, double omega0_rad_s) {
    if (!(mass_kg > 0.0) || !(omega0_rad_s > 0.0)) {
        throw InvalidInput("sql_impulse: mass and omega must be > 0");
    }
    return std::sqrt(hbar * mass_kg * omega0_rad_s / 2.0);
}

Trajectory rotate_detector_frame(const Trajectory& traj, double theta_rad) {
    if (!std::isfinite(theta_rad)) {
        throw InvalidInput("rotate_detector_frame: theta must be finite");
    }
    Trajectory out = traj;
    const double c = std::cos(theta_rad);
    const double s = std::sin(theta_rad);
    auto rotate = [&](std::vector<double>& xs, std::vector<double>& ys) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double xi = xs[i];
            const double yi = ys[i];
            xs[i] = c * xi + s * yi;
            ys[i] = -s * xi + c * yi;
        }
    };
    rotate(out.positions_m[0], out.positions_m[1]);
    if (out.has_velocities()) {
        rotate(out.velocities_m_s[0], out.velocities_m_s[1]);
    }
    out.cumulative_rotation_rad += theta_rad;
    return out;
}

} // namespace levidm::sim
