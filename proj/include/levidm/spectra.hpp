#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "levidm/trap.hpp"

// Spectral estimation (Welch-averaged auto- and cross-spectra) and the
// analytic driven-oscillator spectral models, including the sin(2 psi)
// directional cross-correlation signature and its orientation fit.

namespace levidm::spectra {

struct SpectralEstimate {
    std::vector<double> freq_hz;
    std::vector<double> s_xx, s_yy, s_zz;         // one-sided, m^2/Hz
    std::vector<std::complex<double>> s_xy;       // <x*(f) y(f)>, m^2/Hz
    std::size_t n_averages = 0;
    std::string window = "hann";
    std::size_t segment_length = 0;
    double overlap = 0.5;

    double df_hz() const {
        return freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 0.0;
    }
};

// Hann-windowed, overlapped, averaged one-sided periodograms for all three
// axes plus the complex x-y cross-spectrum. Per-segment means are removed;
// normalization satisfies Parseval (sum S df = variance).
SpectralEstimate welch_psd(const sim::Trajectory& traj,
                           std::size_t segment_length, double overlap = 0.5);

// Weighted (by n_averages) mean of estimates computed on identical grids.
SpectralEstimate average_estimates(std::span<const SpectralEstimate> parts);

// Frequency-integrated real part of the cross-spectrum; by Parseval this is
// the equal-time covariance <x y> and measures how much correlation the
// damping overlap lets a common drive build up.
double cross_band_covariance(const SpectralEstimate& est);

// Driven-oscillator response chi_j(w) = 1 / (m (w_j^2 - w^2 - i Gamma_j w)).
struct SusceptibilityModel {
    sim::TrapConfig trap;

    std::complex<double> chi(int axis, double omega_rad_s) const;
    // One-sided thermal force PSD 4 k_B T m Gamma feeding the axis, N^2/Hz.
    double thermal_force_psd(int axis) const;
    // Thermal position PSD at frequency f, m^2/Hz.
    double thermal_psd(int axis, double f_hz) const;
};

// A harmonic drive shows up as a line; reported as integrated power
// (amplitude^2 / 2), not a bin-height.
struct SpectralLine {
    double freq_hz = 0.0;
    double power_m2 = 0.0;
};

struct AnalyticPsd {
    std::vector<double> freq_hz;
    std::vector<double> s; // m^2/Hz, continuous part
    std::vector<SpectralLine> lines;
};

// Model PSD of one axis under the thermal bath plus the given stochastic /
// harmonic drives (other signal classes are rejected).
AnalyticPsd analytic_psd(const SusceptibilityModel& model,
                         std::span<const sim::ForceSignal> drives, int axis,
                         std::span<const double> freq_hz);

// S_xy(f) = cos(psi) sin(psi) s_force chi_x conj(chi_y); with chi defined
// through 1/(m (w0^2 - w^2 - i Gamma w)) this matches the <x*(f) y(f)>
// estimator built on the e^{-i w t} transform. Independent baths contribute
// zero.
std::vector<std::complex<double>> analytic_cross_spectrum(
    const SusceptibilityModel& model, double s_force_n2_hz, double psi_rad,
    std::span<const double> freq_hz);

struct OrientationFit {
    double psi_hat_rad = 0.0;
    int quadrant_sign = 1;
    double uncertainty_rad = 0.0;
    // Fitted cross-spectrum coefficient a = s_force sin(2 psi) / 2 and its
    // standard error, N^2/Hz.
    double amplitude = 0.0;
    double amplitude_sigma = 0.0;
    // Excess auto-spectral force power per axis (s_force cos^2 / sin^2 psi).
    double excess_x = 0.0, excess_y = 0.0;
    double s_force_hat = 0.0;
};

// Weighted least-squares fit of the measured cross-spectrum against the
// analytic template; the auto-spectral excesses break the psi vs pi/2-psi
// degeneracy, and the cross amplitude's sign selects the quadrant.
OrientationFit estimate_orientation(const SpectralEstimate& est,
                                    const SusceptibilityModel& model);

struct ImpulseEvent {
    double t_s = 0.0;
    double delta_p_hat_ns = 0.0;
};

// Sliding-window total-energy jump detector; delta_p is estimated as
// sqrt(2 m dE). Requires stored velocities.
std::vector<ImpulseEvent> detect_impulses(const sim::Trajectory& traj,
                                          double threshold_sigma);

} // namespace levidm::spectra
