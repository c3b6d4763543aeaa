#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "levidm/halo.hpp"

// Collisional-decoherence calculus for matter-wave superpositions:
// localisation-rate integrals with short/long-wavelength limits, residual-gas
// rates, Yukawa-mediated dark-matter scattering with nucleon coherence, and
// the directional coherent-phase contribution. All integrands run in natural
// units (energies in eV); SI enters and leaves at the API boundary.

namespace levidm::deco {

// Scatterer bath: number density and normalized speed distribution over
// v/c, plus the scatterer mass. Momenta are q = mass * (v/c) in eV.
struct Environment {
    double n0_ev3 = 0.0;                      // number density, eV^3
    std::function<double(double)> speed_pdf;  // over v/c; integrates to 1
    double v_max = 0.0;                       // support bound, units of c
    double mass_ev = 0.0;
    std::string label;
};

Environment environment_from_halo(const halo::HaloModel& h);

// Ideal gas with Maxwell-Boltzmann speeds of the given mean (temperature is
// implied by the mean speed and molecule mass).
Environment environment_from_gas(double pressure_pa, double gas_mass_kg,
                                 double mean_speed_m_s);

// Differential cross-section in natural units (eV^-2 per sr) as a function
// of the incoming momentum q [eV] and the scattering angle cosine.
using DifferentialCrossSection = std::function<double(double, double)>;

// Isotropic hard-sphere scattering with the given total cross-section.
DifferentialCrossSection hard_sphere_dcs(double sigma_tot_m2);

struct YukawaCoupling {
    double g_chi = 0.0;
    double g_m = 0.0;
    double m_mediator_ev = 0.0; // 0 = massless mediator
    void validate() const;
};

struct Target {
    double n_nucleons = 1.0;
    double radius_m = 0.0; // uniform-sphere nucleon distribution
    double mass_kg = 0.0;
    void validate() const;
};

struct Superposition {
    double delta_x_m = 0.0;
    double exposure_s = 0.0;
    void validate() const;
};

struct DecoherenceReport {
    double gamma_rate_per_s = 0.0;
    double phase_rate_per_s = 0.0;
    double exposure_s = 0.0;
    double visibility = 1.0; // exp(-gamma * exposure)
    double phase_rad = 0.0;  // phase_rate * exposure
    // Monte-Carlo cross-check of the quadrature (when enabled).
    double mc_gamma_rate_per_s = 0.0;
    double mc_phase_rate_per_s = 0.0;
    double mc_gamma_se_per_s = 0.0;
    std::size_t mc_samples = 0;
};

// Localisation rate F(dx): speed integral of the angular-averaged
// (1 - e^{i (q - q') dx}) |f|^2 kernel under elastic, infinite-target-mass
// kinematics. Returns 1/s.
double localisation_rate_per_s(const Environment& env,
                               const DifferentialCrossSection& dcs,
                               double delta_x_m, double rel_tol = 1e-4);

// Saturation value of the localisation rate (total scattering rate
// int dq n v sigma_tot), 1/s.
double short_wavelength_rate_per_s(const Environment& env,
                                   const DifferentialCrossSection& dcs);

// Quadratic coefficient Lambda of the small-separation law F = Lambda dx^2,
// computed from the angular second moment of the cross-section. 1/(m^2 s).
double long_wavelength_coefficient(const Environment& env,
                                   const DifferentialCrossSection& dcs);

struct AirRates {
    double lambda_lwr_per_m2_s = 0.0; // long-wavelength coefficient
    double gamma_swr_per_s = 0.0;     // short-wavelength saturation rate
};

// Residual-gas decoherence rates for a sphere of the given radius:
// Lambda = 8 sqrt(2 pi) m v p r^2 / (3 sqrt(3) hbar^2),
// gamma  = 16 pi sqrt(2 pi) p r^2 / (sqrt(3) m v).
AirRates air_rates(double pressure_pa, double gas_mass_kg,
                   double gas_velocity_m_s, double radius_m);

// Yukawa-mediated differential cross-section
// g_chi^2 g_m^2 m_chi^2 / (4 pi^2 (q^2 + m_M^2)^2), natural units (eV^-2).
// q_transfer is the momentum transfer.
double yukawa_dcs_ev2(const YukawaCoupling& c, double m_chi_ev,
                      double q_transfer_ev);

double yukawa_dcs_cm2(const YukawaCoupling& c, double m_chi_ev,
                      double q_transfer_ev);

// Angle-integrated Yukawa cross-section at incoming momentum q (closed
// form), natural units. Used to normalize couplings to a target
// per-nucleon cross-section.
double yukawa_total_cross_section_ev2(const YukawaCoupling& c, double m_chi_ev,
                                      double q_ev);

// Nucleon-coherence factor N^2 |F|^2 + N (1 - |F|^2) with the uniform-sphere
// form factor F(x) = 3 (sin x - x cos x) / x^3; N^2 at zero transfer, N at
// large transfer.
double structure_factor(const Target& t, double q_transfer_ev);

// Incoming directions restricted to a cone about the wind direction (angle
// psi from the superposition axis, in the sensor plane).
struct DirectionalMode {
    double psi_rad = 0.0;
    double half_width_rad = 5.0 * M_PI / 180.0;
};

struct DecoherenceOptions {
    double quad_rel_tol = 1e-3;
    double agreement = 0.05;          // quadrature vs Monte-Carlo gate
    bool cross_validate = true;
    std::uint64_t mc_seed = 20260314;
    std::size_t mc_batch = 100000;
    std::size_t mc_max_samples = 3200000;
    double mc_target_rel_se = 0.01;
};

// Dark-matter scattering decoherence of a superposed target. Isotropic mode
// averages over all incoming directions (phase rate identically zero);
// directional mode returns the decoherence rate from the cosine part and the
// coherent phase rate from the sine part of (1 - e^{i dq dx}). Both modes
// are cross-validated against a Monte-Carlo integrator; disagreement beyond
// the gate raises NumericError with both values.
DecoherenceReport dm_decoherence(const halo::HaloModel& h,
                                 const YukawaCoupling& c, const Target& t,
                                 const Superposition& sup,
                                 const std::optional<DirectionalMode>& mode = {},
                                 const DecoherenceOptions& opts = {});

struct OffDiagonal {
    double magnitude = 1.0;
    double phase_rad = 0.0;
};

// Off-diagonal density-matrix element after the report's exposure:
// magnitude exp(-gamma t), phase phase_rate t.
OffDiagonal evolve_offdiagonal(const DecoherenceReport& report);

struct ScenarioPoint {
    halo::HaloModel halo;
    YukawaCoupling coupling;
    Target target;
    Superposition superposition;
};

struct ScenarioPreset {
    std::string name;
    std::vector<ScenarioPoint> points;
};

// Named parameter bundles: "bateman-100ev" (one point, 100 eV candidate with
// a 1e-29 cm^2 per-nucleon cross-section) and "riedel-scan" (log-spaced
// 5 x 5 lattice over 1 keV..10 MeV candidate and 10 meV..10 keV mediator
// masses).
ScenarioPreset scenario_preset(const std::string& name);

} // namespace levidm::deco
