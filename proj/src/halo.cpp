#include "levidm/halo.hpp"

namespace levidm::halo {

void HaloModel::validate() const {
    if (!(rho_local_gev_cm3 >= 0.0)) {
        throw InvalidInput("halo.rho_gev_per_cm3: must be >= 0");
    }
    if (!(v_mean_m_s > 0.0)) {
        throw InvalidInput("halo.v_mean_m_s: must be > 0");
    }
    if (!(v_escape_m_s > v_mean_m_s)) {
        throw InvalidInput("halo.v_escape_m_s: must exceed v_mean");
    }
    if (!(v_escape_m_s < units::constants::c)) {
        throw InvalidInput("halo.v_escape_m_s: must be sub-luminal");
    }
    if (!(m_chi_ev > 0.0)) {
        throw InvalidInput("halo.m_chi_ev: must be > 0");
    }
}

void WindTrack::validate() const {
    if (!(period_s > 0.0)) {
        throw InvalidInput("wind.period_s: must be > 0");
    }
    if (!(psi_amplitude_rad >= 0.0)) {
        throw InvalidInput("wind.psi_amplitude_rad: must be >= 0");
    }
}

double number_density_m3(const HaloModel& h) {
    if (!(h.m_chi_ev > 0.0)) {
        throw InvalidInput("number_density: m_chi_ev must be > 0");
    }
    // rho [GeV/cm^3] / m [eV] -> 1/cm^3 -> 1/m^3
    return h.rho_local_gev_cm3 * 1e9 / h.m_chi_ev * 1e6;
}

namespace {

// Fraction of the untruncated Maxwell-Boltzmann distribution below x = v/v_p.
double mb_cdf(double x) {
    return std::erf(x) - 2.0 * x * std::exp(-x * x) / std::sqrt(M_PI);
}

} // namespace

double speed_pdf(const HaloModel& h, double v_m_s) {
    if (v_m_s < 0.0 || v_m_s > h.v_escape_m_s) return 0.0;
    const double vp = most_probable_speed(h);
    const double x = v_m_s / vp;
    const double norm = mb_cdf(h.v_escape_m_s / vp);
    const double raw =
        4.0 / std::sqrt(M_PI) * x * x * std::exp(-x * x) / vp;
    return raw / norm;
}

double de_broglie_m(double m_chi_ev, double v_m_s) {
    if (!(m_chi_ev > 0.0) || !(v_m_s > 0.0)) {
        throw InvalidInput("de_broglie: mass and speed must be > 0");
    }
    const double m_kg = units::kg_from_ev(m_chi_ev);
    return 2.0 * M_PI * units::constants::hbar / (m_kg * v_m_s);
}

double wind_angle(const WindTrack& w, double t_s) {
    if (!(w.period_s > 0.0)) {
        throw InvalidInput("wind_angle: period must be > 0");
    }
    const double t0 = w.phase_zero_day * 86400.0;
    return w.psi_mean_rad +
           w.psi_amplitude_rad *
               std::cos(2.0 * M_PI * (t_s - t0) / w.period_s);
}

} // namespace levidm::halo
