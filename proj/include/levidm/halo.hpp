#pragma once

#include <cmath>

#include "levidm/errors.hpp"
#include "levidm/units.hpp"

// Standard-halo dark-matter environment: local density, truncated
// Maxwell-Boltzmann speed distribution, de Broglie wavelength, and the
// yearly-modulating wind orientation in the sensor x-y plane.

namespace levidm::halo {

struct HaloModel {
    double rho_local_gev_cm3 = 0.3; // local mass density
    double v_mean_m_s = 220e3;      // mean candidate speed
    double v_escape_m_s = 544e3;    // galactic escape speed (hard cutoff)
    double m_chi_ev = 1e9;          // candidate mass

    void validate() const;
};

// Orientation angle of the wind in the sensor plane,
// psi(t) = psi_mean + psi_amplitude * cos(2 pi (t - t0) / period).
struct WindTrack {
    double psi_mean_rad = 0.0;
    double psi_amplitude_rad = 0.0;
    double period_s = 365.25 * 86400.0;
    double phase_zero_day = 0.0; // t0 in days

    void validate() const;
};

// rho / m_chi in SI (1/m^3).
double number_density_m3(const HaloModel& h);

// Maxwell-Boltzmann speed density, most-probable speed fixed so that the
// untruncated mean equals v_mean, truncated at v_escape and renormalized.
// Returns 0 for v > v_escape. Units 1/(m/s); integrates to 1.
double speed_pdf(const HaloModel& h, double v_m_s);

// 2 pi hbar / (m v), with the mass given in eV.
double de_broglie_m(double m_chi_ev, double v_m_s);

double wind_angle(const WindTrack& w, double t_s);

// Most-probable speed of the (untruncated) distribution, m/s.
inline double most_probable_speed(const HaloModel& h) {
    return h.v_mean_m_s * std::sqrt(M_PI) / 2.0;
}

} // namespace levidm::halo
