#include "doctest.h"

#include "levidm/rng.hpp"
#include "levidm/units.hpp"

using namespace levidm;
using units::Dim;
using units::Quantity;

TEST_SUITE_BEGIN("units");

TEST_CASE("constants are mutually consistent") {
    CHECK(units::constants::ev_to_kg ==
          doctest::Approx(units::constants::ev_to_joule /
                          (units::constants::c * units::constants::c))
              .epsilon(1e-12));
}

TEST_CASE("mass conversion: 1 GeV in kilograms") {
    const Quantity si = units::to_si({1e9, Dim::mass});
    CHECK(si.value == doctest::Approx(1.78266192e-27).epsilon(1e-8));
    CHECK(si.dim == Dim::mass);
}

TEST_CASE("inverse mass conversion recovers 1 GeV") {
    const Quantity nat = units::to_natural({1.78266192e-27, Dim::mass});
    CHECK(nat.value == doctest::Approx(1e9).epsilon(1e-8));
}

TEST_CASE("zero maps to zero") {
    CHECK(units::to_si({0.0, Dim::energy}).value == 0.0);
    CHECK(units::to_natural({0.0, Dim::mass}).value == 0.0);
}

TEST_CASE("cross-section: 1e-28 cm^2 to natural units and back") {
    // (hbar c)^2 oracle computed directly.
    const double hc = units::constants::hbar_c_ev_m;
    const double sigma_m2 = 1e-28 * 1e-4;
    const double expected = sigma_m2 / (hc * hc);
    const Quantity nat = units::to_natural({sigma_m2, Dim::cross_section});
    CHECK(nat.value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(units::to_si(nat).value == doctest::Approx(sigma_m2).epsilon(1e-12));
}

TEST_CASE("round trips hold for every dimension") {
    const Dim dims[] = {Dim::mass, Dim::energy, Dim::length,
                        Dim::time, Dim::inverse_time, Dim::cross_section};
    rng::NoiseStream stream(7, 0);
    for (Dim d : dims) {
        for (int i = 0; i < 50; ++i) {
            const double v = std::exp(40.0 * (stream.uniform() - 0.5));
            const Quantity round = units::to_natural(units::to_si({v, d}));
            CHECK(round.value == doctest::Approx(v).epsilon(1e-12));
        }
    }
}

TEST_CASE("conversions are strictly monotone") {
    const Dim dims[] = {Dim::mass, Dim::energy, Dim::length,
                        Dim::time, Dim::inverse_time, Dim::cross_section};
    for (Dim d : dims) {
        double prev = 0.0;
        for (double v : {1e-6, 1e-3, 1.0, 1e3, 1e6}) {
            const double si = units::to_si({v, d}).value;
            CHECK(si > prev);
            prev = si;
        }
    }
}

TEST_SUITE_END();
