#pragma once

#include <cmath>

#include "levidm/errors.hpp"

// Physical constants (CODATA 2018) and conversions between SI and natural
// (hbar = c = 1) units. Oscillator dynamics and spectral estimation work in
// SI; scattering integrands work in natural units with energies in eV.
// Conversion happens only at module boundaries, through the functions here.

namespace levidm::units {

namespace constants {
constexpr double hbar = 1.054571817e-34;          // J s
constexpr double k_boltzmann = 1.380649e-23;      // J/K
constexpr double c = 299792458.0;                 // m/s
constexpr double ev_to_joule = 1.602176634e-19;   // J per eV
constexpr double ev_to_kg = ev_to_joule / (c * c); // kg per eV (E = m c^2)
constexpr double amu_to_kg = 1.66053906660e-27;   // kg per u

// hbar c in eV m; converts inverse-energy lengths to meters.
constexpr double hbar_c_ev_m = hbar * c / ev_to_joule;
// hbar in eV s; converts inverse-energy times to seconds.
constexpr double hbar_ev_s = hbar / ev_to_joule;
} // namespace constants

enum class Dim {
    mass,          // natural: eV,      SI: kg
    energy,        // natural: eV,      SI: J
    length,        // natural: 1/eV,    SI: m
    time,          // natural: 1/eV,    SI: s
    inverse_time,  // natural: eV,      SI: 1/s
    cross_section, // natural: 1/eV^2,  SI: m^2
};

struct Quantity {
    double value = 0.0;
    Dim dim = Dim::energy;
};

// Multiplier taking a natural-unit value to SI for the given dimension.
inline double si_factor(Dim dim) {
    using namespace constants;
    switch (dim) {
    case Dim::mass: return ev_to_kg;
    case Dim::energy: return ev_to_joule;
    case Dim::length: return hbar_c_ev_m;
    case Dim::time: return hbar_ev_s;
    case Dim::inverse_time: return ev_to_joule / hbar;
    case Dim::cross_section: return hbar_c_ev_m * hbar_c_ev_m;
    }
    throw InvalidInput("si_factor: unsupported dimension");
}

inline Quantity to_si(Quantity q) {
    return {q.value * si_factor(q.dim), q.dim};
}

inline Quantity to_natural(Quantity q) {
    return {q.value / si_factor(q.dim), q.dim};
}

inline double ev_from_kg(double kg) { return kg / constants::ev_to_kg; }
inline double kg_from_ev(double ev) { return ev * constants::ev_to_kg; }

// Rate conversion natural (eV) -> SI (1/s).
inline double per_second_from_ev(double rate_ev) {
    return rate_ev * constants::ev_to_joule / constants::hbar;
}

} // namespace levidm::units
