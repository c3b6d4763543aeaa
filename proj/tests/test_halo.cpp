#include "doctest.h"

#include <cmath>

#include "levidm/halo.hpp"
#include "levidm/quadrature.hpp"

using namespace levidm;

namespace {
const halo::HaloModel kStandard{0.3, 220e3, 544e3, 1e9};
}

TEST_SUITE_BEGIN("halo");

TEST_CASE("number density for a 1 GeV candidate is 0.3 per cm^3") {
    CHECK(halo::number_density_m3(kStandard) == doctest::Approx(3e5).epsilon(1e-12));
}

TEST_CASE("number density scales inversely with candidate mass") {
    halo::HaloModel h = kStandard;
    h.m_chi_ev = 100.0;
    // 0.3e9 eV per cm^3 / 100 eV = 3e6 cm^-3 = 3e12 m^-3, by hand.
    CHECK(halo::number_density_m3(h) == doctest::Approx(3e12).epsilon(1e-12));

    halo::HaloModel doubled = kStandard;
    doubled.m_chi_ev *= 2.0;
    CHECK(halo::number_density_m3(doubled) ==
          doctest::Approx(0.5 * halo::number_density_m3(kStandard)).epsilon(1e-12));
}

TEST_CASE("zero density gives zero") {
    halo::HaloModel h = kStandard;
    h.rho_local_gev_cm3 = 0.0;
    CHECK(halo::number_density_m3(h) == 0.0);
}

TEST_CASE("nonpositive mass is rejected") {
    halo::HaloModel h = kStandard;
    h.m_chi_ev = 0.0;
    CHECK_THROWS_AS(halo::number_density_m3(h), InvalidInput);
}

TEST_CASE("speed pdf integrates to one") {
    const auto norm = quad::integrate(
        [&](double v) { return halo::speed_pdf(kStandard, v); }, 0.0,
        kStandard.v_escape_m_s, 1e-10);
    CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("speed pdf mean sits at the configured mean speed") {
    const auto mean = quad::integrate(
        [&](double v) { return v * halo::speed_pdf(kStandard, v); }, 0.0,
        kStandard.v_escape_m_s, 1e-10);
    CHECK(mean.value == doctest::Approx(220e3).epsilon(5e-3));
}

TEST_CASE("speed pdf vanishes beyond escape") {
    CHECK(halo::speed_pdf(kStandard, kStandard.v_escape_m_s + 1.0) == 0.0);
    CHECK(halo::speed_pdf(kStandard, -1.0) == 0.0);
}

TEST_CASE("speed pdf is non-negative") {
    for (double v = 0.0; v < 600e3; v += 7e3) {
        CHECK(halo::speed_pdf(kStandard, v) >= 0.0);
    }
}

TEST_CASE("de Broglie wavelength endpoints") {
    // 2 pi hbar / (m v) evaluated by hand: 1 keV at 220 km/s.
    CHECK(halo::de_broglie_m(1e3, 220e3) ==
          doctest::Approx(1.6895e-6).epsilon(1e-3));
    CHECK(halo::de_broglie_m(10e6, 220e3) ==
          doctest::Approx(1.6895e-10).epsilon(1e-3));
}

TEST_CASE("de Broglie wavelength halves when the mass doubles") {
    const double l1 = halo::de_broglie_m(5e4, 220e3);
    const double l2 = halo::de_broglie_m(1e5, 220e3);
    CHECK(l2 == doctest::Approx(l1 / 2.0).epsilon(1e-14));
}

TEST_CASE("de Broglie rejects nonpositive inputs") {
    CHECK_THROWS_AS(halo::de_broglie_m(0.0, 220e3), InvalidInput);
    CHECK_THROWS_AS(halo::de_broglie_m(1e3, 0.0), InvalidInput);
}

TEST_CASE("wind angle phase zero and half period") {
    halo::WindTrack w{0.1, 0.3, 100.0, 0.0};
    CHECK(halo::wind_angle(w, 0.0) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(halo::wind_angle(w, 50.0) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("wind angle never strays beyond its amplitude") {
    halo::WindTrack w{0.7, 0.25, 123.0, 4.0};
    for (int i = 0; i < 2000; ++i) {
        const double t = 0.31 * i;
        CHECK(std::abs(halo::wind_angle(w, t) - w.psi_mean_rad) <=
              w.psi_amplitude_rad + 1e-15);
    }
}

TEST_CASE("wind angle is exactly periodic") {
    halo::WindTrack w{0.05, 0.4, 3.15e7, 17.0};
    for (double t : {0.0, 1e5, 2.7e6, 3.0e7}) {
        CHECK(halo::wind_angle(w, t + w.period_s) ==
              doctest::Approx(halo::wind_angle(w, t)).epsilon(1e-12));
    }
}

TEST_CASE("zero-mean wind crosses zero exactly twice per period") {
    halo::WindTrack w{0.0, 0.3, 1000.0, 0.0};
    int flips = 0;
    double prev = halo::wind_angle(w, 0.0);
    const int n = 40000;
    for (int i = 1; i <= n; ++i) {
        const double cur = halo::wind_angle(w, w.period_s * i / n);
        if ((cur < 0.0) != (prev < 0.0)) ++flips;
        prev = cur;
    }
    CHECK(flips == 2);
}

TEST_SUITE_END();
