#include "doctest.h"

#include <cmath>
#include <complex>

#include "levidm/langevin.hpp"
#include "levidm/quadrature.hpp"
#include "levidm/rng.hpp"
#include "levidm/spectra.hpp"
#include "levidm/units.hpp"

using namespace levidm;
using units::constants::k_boltzmann;

namespace {

sim::TrapConfig test_trap(double gamma_hz = 1e3, double temp_k = 300.0) {
    sim::TrapConfig t;
    t.mass_kg = 1e-18;
    t.omega_rad_s = {2 * M_PI * 1e5, 2 * M_PI * 0.98e5, 2 * M_PI * 6e4};
    t.gamma_rad_s = {2 * M_PI * gamma_hz, 2 * M_PI * gamma_hz,
                     2 * M_PI * gamma_hz};
    t.temp_k = {temp_k, temp_k, temp_k};
    return t;
}

sim::Trajectory synthetic_trajectory(const sim::TrapConfig& trap, double dt,
                                     std::size_t n) {
    sim::Trajectory traj;
    traj.trap = trap;
    traj.dt_s = dt;
    traj.n_samples = n;
    for (int j = 0; j < 3; ++j) traj.positions_m[j].assign(n, 0.0);
    return traj;
}

double band_sum(const spectra::SpectralEstimate& est,
                const std::vector<double>& s, double f_lo, double f_hi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < est.freq_hz.size(); ++k) {
        if (est.freq_hz[k] >= f_lo && est.freq_hz[k] <= f_hi) acc += s[k];
    }
    return acc * est.df_hz();
}

} // namespace

TEST_SUITE_BEGIN("spectra");

TEST_CASE("pure tone carries A^2/2 of integrated power") {
    const sim::TrapConfig trap = test_trap();
    const double fs = 1e6;
    const std::size_t n = 1 << 18;
    const std::size_t seg = 8192;
    const double f0 = 200.0 * fs / static_cast<double>(seg); // bin-centered
    const double amp = 3.7e-10;
    sim::Trajectory traj = synthetic_trajectory(trap, 1.0 / fs, n);
    for (std::size_t i = 0; i < n; ++i) {
        traj.positions_m[0][i] =
            amp * std::sin(2 * M_PI * f0 * static_cast<double>(i) / fs);
    }
    const auto est = spectra::welch_psd(traj, seg, 0.5);
    const double peak = band_sum(est, est.s_xx, f0 - 5 * est.df_hz(),
                                 f0 + 5 * est.df_hz());
    CHECK(peak == doctest::Approx(amp * amp / 2.0).epsilon(0.01));
}

TEST_CASE("thermal PSD integrates to the equipartition variance") {
    const sim::TrapConfig trap = test_trap();
    sim::SimOptions opts;
    opts.sample_every = 10;
    opts.store_velocities = false;
    const sim::Trajectory traj = sim::simulate(trap, {}, 2.0, 1e-7, 808, opts);
    const auto est = spectra::welch_psd(traj, 16384, 0.5);
    const double expected =
        k_boltzmann * 300.0 /
        (trap.mass_kg * trap.omega_rad_s[0] * trap.omega_rad_s[0]);
    CHECK(band_sum(est, est.s_xx, 0.0, est.freq_hz.back()) ==
          doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("welch satisfies Parseval against the sample variance") {
    const sim::TrapConfig trap = test_trap();
    sim::SimOptions opts;
    opts.sample_every = 10;
    opts.store_velocities = false;
    const sim::Trajectory traj = sim::simulate(trap, {}, 0.6, 1e-7, 11, opts);
    const auto est = spectra::welch_psd(traj, 8192, 0.5);

    double mean = 0.0, var = 0.0;
    for (double x : traj.positions_m[1]) mean += x;
    mean /= static_cast<double>(traj.n_samples);
    for (double x : traj.positions_m[1]) var += (x - mean) * (x - mean);
    var /= static_cast<double>(traj.n_samples);

    CHECK(band_sum(est, est.s_yy, 0.0, est.freq_hz.back()) ==
          doctest::Approx(var).epsilon(0.02));
}

TEST_CASE("welch obeys the Cauchy-Schwarz bound bin by bin") {
    const sim::TrapConfig trap = test_trap();
    sim::DirectionalStochasticForce drive{5e-35, 0.6};
    sim::SimOptions opts;
    opts.sample_every = 10;
    opts.store_velocities = false;
    const sim::Trajectory traj = sim::simulate(
        trap, std::vector<sim::ForceSignal>{drive}, 0.6, 1e-7, 21, opts);
    const auto est = spectra::welch_psd(traj, 4096, 0.5);
    for (std::size_t k = 0; k < est.freq_hz.size(); ++k) {
        CHECK(std::norm(est.s_xy[k]) <=
              est.s_xx[k] * est.s_yy[k] * (1.0 + 1e-12));
    }
}

TEST_CASE("independent white channels have a cross-spectrum consistent with zero") {
    const sim::TrapConfig trap = test_trap();
    const std::size_t n = 1 << 16;
    sim::Trajectory traj = synthetic_trajectory(trap, 1e-5, n);
    rng::NoiseStream gx(5, 0), gy(5, 1);
    for (std::size_t i = 0; i < n; ++i) {
        traj.positions_m[0][i] = gx.gaussian();
        traj.positions_m[1][i] = gy.gaussian();
    }
    const auto est = spectra::welch_psd(traj, 1024, 0.5);
    double mean_re = 0.0, var_re = 0.0;
    for (const auto& c : est.s_xy) mean_re += c.real();
    mean_re /= static_cast<double>(est.s_xy.size());
    for (const auto& c : est.s_xy) {
        var_re += (c.real() - mean_re) * (c.real() - mean_re);
    }
    var_re /= static_cast<double>(est.s_xy.size());
    const double se = std::sqrt(var_re / static_cast<double>(est.s_xy.size()));
    CHECK(std::abs(mean_re) < 3.0 * se);
}

TEST_CASE("harmonic drive shows up as a line at the drive frequency") {
    sim::TrapConfig trap = test_trap();
    sim::HarmonicForce drive;
    drive.amplitude_n = 1e-15;
    drive.freq_rad_s = 2 * M_PI * 8e4;
    drive.direction = {1.0, 0.0, 0.0};
    sim::SimOptions opts;
    opts.sample_every = 10;
    opts.store_velocities = false;
    const sim::Trajectory traj = sim::simulate(
        trap, std::vector<sim::ForceSignal>{drive}, 1.0, 1e-7, 3, opts);
    const auto est = spectra::welch_psd(traj, 16384, 0.5);

    const spectra::SusceptibilityModel model{trap};
    const auto analytic = spectra::analytic_psd(
        model, std::vector<sim::ForceSignal>{drive}, 0, est.freq_hz);
    REQUIRE(analytic.lines.size() == 1);
    CHECK(analytic.lines[0].freq_hz == doctest::Approx(8e4));

    // The measured line: integrate around the drive, subtract the thermal
    // baseline estimated from neighbouring bins.
    const double df = est.df_hz();
    const double line = band_sum(est, est.s_xx, 8e4 - 3 * df, 8e4 + 3 * df);
    const double baseline =
        band_sum(est, est.s_xx, 8e4 + 10 * df, 8e4 + 16 * df);
    CHECK(line - baseline ==
          doctest::Approx(analytic.lines[0].power_m2).epsilon(0.15));
}

TEST_CASE("analytic PSD peaks at 4 k_B T / (m gamma w^2) and integrates to equipartition") {
    const sim::TrapConfig trap = test_trap();
    const spectra::SusceptibilityModel model{trap};
    const double f0 = trap.omega_rad_s[0] / (2 * M_PI);
    std::vector<double> grid = {f0};
    const auto at_peak = spectra::analytic_psd(model, {}, 0, grid);
    const double expected_peak =
        4.0 * k_boltzmann * 300.0 /
        (trap.mass_kg * trap.gamma_rad_s[0] * trap.omega_rad_s[0] *
         trap.omega_rad_s[0]);
    CHECK(at_peak.s[0] == doctest::Approx(expected_peak).epsilon(1e-12));

    const auto var = quad::integrate(
        [&](double f) { return model.thermal_psd(0, f); }, 0.0, 40.0 * f0,
        1e-10);
    CHECK(var.value ==
          doctest::Approx(k_boltzmann * 300.0 /
                          (trap.mass_kg * trap.omega_rad_s[0] *
                           trap.omega_rad_s[0]))
              .epsilon(1e-5));
}

TEST_CASE("directional drive at psi=0 raises only the x plateau") {
    const sim::TrapConfig trap = test_trap();
    const spectra::SusceptibilityModel model{trap};
    std::vector<double> grid;
    for (double f = 5e4; f < 1.5e5; f += 1e3) grid.push_back(f);
    sim::DirectionalStochasticForce drive{3e-35, 0.0};
    const std::vector<sim::ForceSignal> drives{drive};
    const auto with_x = spectra::analytic_psd(model, drives, 0, grid);
    const auto with_y = spectra::analytic_psd(model, drives, 1, grid);
    const auto ctl_x = spectra::analytic_psd(model, {}, 0, grid);
    const auto ctl_y = spectra::analytic_psd(model, {}, 1, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(with_x.s[k] > ctl_x.s[k]);
        CHECK(with_y.s[k] == doctest::Approx(ctl_y.s[k]).epsilon(1e-14));
    }
}

TEST_CASE("doubling the signal PSD doubles the excess above thermal") {
    const sim::TrapConfig trap = test_trap();
    const spectra::SusceptibilityModel model{trap};
    std::vector<double> grid;
    for (double f = 9e4; f < 1.1e5; f += 500.0) grid.push_back(f);
    sim::DirectionalStochasticForce d1{2e-35, 0.0};
    sim::DirectionalStochasticForce d2{4e-35, 0.0};
    const auto ctl = spectra::analytic_psd(model, {}, 0, grid);
    const auto s1 = spectra::analytic_psd(
        model, std::vector<sim::ForceSignal>{d1}, 0, grid);
    const auto s2 = spectra::analytic_psd(
        model, std::vector<sim::ForceSignal>{d2}, 0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(s2.s[k] - ctl.s[k] ==
              doctest::Approx(2.0 * (s1.s[k] - ctl.s[k])).epsilon(1e-12));
    }
}

TEST_CASE("cross-spectrum vanishes at psi = 0 and pi/2, flips under psi -> -psi, "
          "and is largest at pi/4") {
    const sim::TrapConfig trap = test_trap();
    const spectra::SusceptibilityModel model{trap};
    std::vector<double> grid;
    for (double f = 9.0e4; f <= 1.12e5; f += 750.0) grid.push_back(f);

    const auto zero1 = spectra::analytic_cross_spectrum(model, 1e-34, 0.0, grid);
    const auto zero2 =
        spectra::analytic_cross_spectrum(model, 1e-34, M_PI / 2.0, grid);
    const auto ref =
        spectra::analytic_cross_spectrum(model, 1e-34, M_PI / 4.0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(zero1[k]) == 0.0);
        CHECK(std::abs(zero2[k]) < 1e-15 * std::abs(ref[k]));
    }

    const auto plus = spectra::analytic_cross_spectrum(model, 1e-34, 0.5, grid);
    const auto minus = spectra::analytic_cross_spectrum(model, 1e-34, -0.5, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(plus[k].real() == doctest::Approx(-minus[k].real()).epsilon(1e-14));
        CHECK(plus[k].imag() == doctest::Approx(-minus[k].imag()).epsilon(1e-14));
    }

    const auto best =
        spectra::analytic_cross_spectrum(model, 1e-34, M_PI / 4.0, grid);
    for (double psi : {0.1, 0.3, 0.6, 1.0, 1.3}) {
        const auto other = spectra::analytic_cross_spectrum(model, 1e-34, psi, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            CHECK(std::abs(best[k]) >= std::abs(other[k]) - 1e-60);
        }
    }
}

TEST_CASE("orientation fit recovers synthetic angles with the right quadrant") {
    sim::TrapConfig trap = test_trap(300.0);
    trap.omega_rad_s[1] = 2 * M_PI * 1.003e5; // overlapping resonances
    const spectra::SusceptibilityModel model{trap};

    const double fs = 1e6;
    const std::size_t seg = 32768;
    const std::size_t n_avg = 400;
    const double s_force = 3.0 * model.thermal_force_psd(0);

    auto make_estimate = [&](double psi, std::uint64_t seed) {
        spectra::SpectralEstimate est;
        est.segment_length = seg;
        est.n_averages = n_avg;
        const std::size_t bins = seg / 2 + 1;
        est.freq_hz.resize(bins);
        for (std::size_t k = 0; k < bins; ++k) {
            est.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(seg);
        }
        est.s_xx.resize(bins);
        est.s_yy.resize(bins);
        est.s_zz.assign(bins, 0.0);
        est.s_xy.resize(bins);
        const auto xy =
            spectra::analytic_cross_spectrum(model, s_force, psi, est.freq_hz);
        rng::NoiseStream noise(seed, 0);
        const double root_n = std::sqrt(static_cast<double>(n_avg));
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = est.freq_hz[k];
            const double cx = std::cos(psi), sy = std::sin(psi);
            const double sxx =
                model.thermal_psd(0, f) +
                s_force * cx * cx * std::norm(model.chi(0, 2 * M_PI * f));
            const double syy =
                model.thermal_psd(1, f) +
                s_force * sy * sy * std::norm(model.chi(1, 2 * M_PI * f));
            est.s_xx[k] = sxx * (1.0 + noise.gaussian() / root_n);
            est.s_yy[k] = syy * (1.0 + noise.gaussian() / root_n);
            const double sigma_q =
                std::sqrt(sxx * syy / (2.0 * static_cast<double>(n_avg)));
            est.s_xy[k] = xy[k] + std::complex<double>(
                                      sigma_q * noise.gaussian(),
                                      sigma_q * noise.gaussian());
        }
        return est;
    };

    const auto fit_plus =
        spectra::estimate_orientation(make_estimate(M_PI / 6.0, 1), model);
    CHECK(fit_plus.quadrant_sign == 1);
    CHECK(fit_plus.psi_hat_rad ==
          doctest::Approx(M_PI / 6.0)
              .epsilon(std::max(0.05, 3.0 * fit_plus.uncertainty_rad /
                                          (M_PI / 6.0))));

    const auto fit_minus =
        spectra::estimate_orientation(make_estimate(-M_PI / 6.0, 2), model);
    CHECK(fit_minus.quadrant_sign == -1);
    CHECK(fit_minus.psi_hat_rad == doctest::Approx(-M_PI / 6.0).epsilon(0.1));

    // 60 degrees must not collapse onto the sin(2 psi)-degenerate 30.
    const auto fit_steep =
        spectra::estimate_orientation(make_estimate(M_PI / 3.0, 3), model);
    CHECK(fit_steep.psi_hat_rad == doctest::Approx(M_PI / 3.0).epsilon(0.1));

    // Null data: fitted amplitude consistent with zero.
    auto null_est = make_estimate(0.0, 4);
    // remove the injected signal: rebuild with s_force = 0
    {
        rng::NoiseStream noise(9, 0);
        const double root_n = std::sqrt(400.0);
        for (std::size_t k = 0; k < null_est.freq_hz.size(); ++k) {
            const double f = null_est.freq_hz[k];
            const double sxx = model.thermal_psd(0, f);
            const double syy = model.thermal_psd(1, f);
            null_est.s_xx[k] = sxx * (1.0 + noise.gaussian() / root_n);
            null_est.s_yy[k] = syy * (1.0 + noise.gaussian() / root_n);
            const double sigma_q = std::sqrt(sxx * syy / (2.0 * 400.0));
            null_est.s_xy[k] = std::complex<double>(sigma_q * noise.gaussian(),
                                                    sigma_q * noise.gaussian());
        }
    }
    const auto fit_null = spectra::estimate_orientation(null_est, model);
    CHECK(std::abs(fit_null.amplitude) < 3.0 * fit_null.amplitude_sigma);
}

TEST_CASE("simulated directional run calibrates the fitted amplitude absolutely") {
    // Catches transform-convention mistakes the synthetic self-consistency
    // test cannot: the fitted coefficient must equal s sin(2 psi)/2 for data
    // produced by the simulator, not by the analytic model.
    sim::TrapConfig trap = test_trap(300.0);
    trap.omega_rad_s[1] = 2 * M_PI * 0.997e5;
    const spectra::SusceptibilityModel model{trap};
    const double s_force = 3.0 * model.thermal_force_psd(0);
    const double psi = -M_PI / 6.0;
    sim::DirectionalStochasticForce drive{s_force, psi};
    sim::SimOptions opts;
    opts.sample_every = 25;
    opts.store_velocities = false;
    const sim::Trajectory traj = sim::simulate(
        trap, std::vector<sim::ForceSignal>{drive}, 3.0, 1e-7, 1912, opts);
    const auto fit =
        spectra::estimate_orientation(spectra::welch_psd(traj, 16384, 0.5), model);
    const double expected = s_force * std::sin(2.0 * psi) / 2.0;
    CHECK(fit.amplitude == doctest::Approx(expected).epsilon(0.10));
    CHECK(fit.psi_hat_rad == doctest::Approx(psi).epsilon(0.05));
    CHECK(fit.s_force_hat == doctest::Approx(s_force).epsilon(0.10));
}

TEST_CASE("orientation fit demands enough averages") {
    const sim::TrapConfig trap = test_trap();
    const spectra::SusceptibilityModel model{trap};
    spectra::SpectralEstimate est;
    est.n_averages = 10;
    CHECK_THROWS_AS(spectra::estimate_orientation(est, model), InvalidInput);
}

TEST_CASE("noiseless kick is recovered exactly by the energy detector") {
    sim::TrapConfig trap = test_trap(0.0, 0.0);
    const double dp = 1e-19;
    sim::ImpulseForce kick{{0.0, dp, 0.0}, 5.1e-3};
    const sim::Trajectory traj = sim::simulate(
        trap, std::vector<sim::ForceSignal>{kick}, 0.01, 1e-7, 12);
    const auto events = spectra::detect_impulses(traj, 5.0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].delta_p_hat_ns == doctest::Approx(dp).epsilon(0.01));
    const double window_s = 2 * M_PI / trap.omega_rad_s[2] / 1e-7 * 1e-7;
    CHECK(std::abs(events[0].t_s - 5.1e-3) <= 2.0 * window_s);
}

TEST_CASE("a 10x-thermal kick is found once and sized within 20%") {
    sim::TrapConfig trap = test_trap(100.0);
    const double p_thermal = std::sqrt(trap.mass_kg * k_boltzmann * 300.0);
    const double dp = 10.0 * p_thermal;
    sim::ImpulseForce kick{{dp, 0.0, 0.0}, 6.0e-3};
    const sim::Trajectory traj = sim::simulate(
        trap, std::vector<sim::ForceSignal>{kick}, 0.012, 1e-7, 77);
    const auto events = spectra::detect_impulses(traj, 5.0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].delta_p_hat_ns == doctest::Approx(dp).epsilon(0.20));
    CHECK(std::abs(events[0].t_s - 6.0e-3) < 1e-4);
}

TEST_CASE("susceptibility magnitude peaks at the damped resonance") {
    sim::TrapConfig trap = test_trap(3e3);
    const spectra::SusceptibilityModel model{trap};
    const double w0 = trap.omega_rad_s[0];
    const double g = trap.gamma_rad_s[0];
    const double expected = w0 * std::sqrt(1.0 - g * g / (2.0 * w0 * w0));
    double best_w = 0.0, best = 0.0;
    const double step = w0 * 1e-6;
    for (double w = 0.995 * w0; w < 1.005 * w0; w += step) {
        const double mag = std::abs(model.chi(0, w));
        if (mag > best) {
            best = mag;
            best_w = w;
        }
    }
    CHECK(std::abs(best_w - expected) <= 2.0 * step);
}

TEST_CASE("a directional drive raises the measured PSD plateau") {
    const sim::TrapConfig trap = test_trap();
    sim::SimOptions opts;
    opts.sample_every = 10;
    opts.store_velocities = false;
    const spectra::SusceptibilityModel model{trap};
    sim::DirectionalStochasticForce drive{5.0 * model.thermal_force_psd(0), 0.0};
    const sim::Trajectory driven = sim::simulate(
        trap, std::vector<sim::ForceSignal>{drive}, 0.5, 1e-7, 6, opts);
    const sim::Trajectory control = sim::simulate(trap, {}, 0.5, 1e-7, 6, opts);
    const auto est_d = spectra::welch_psd(driven, 8192, 0.5);
    const auto est_c = spectra::welch_psd(control, 8192, 0.5);
    // Compare the off-resonance plateau well below the trap lines.
    const double lo = 2e4, hi = 5e4;
    CHECK(band_sum(est_d, est_d.s_xx, lo, hi) >
          3.0 * band_sum(est_c, est_c.s_xx, lo, hi));
    // The z axis sees none of it.
    CHECK(band_sum(est_d, est_d.s_zz, 8e4, 1.2e5) ==
          doctest::Approx(band_sum(est_c, est_c.s_zz, 8e4, 1.2e5)).epsilon(0.2));
}

TEST_CASE("wind-driven orientation flips quadrant when psi crosses zero") {
    sim::TrapConfig trap = test_trap(300.0);
    trap.omega_rad_s[1] = 2 * M_PI * 0.997e5;
    const spectra::SusceptibilityModel model{trap};

    // Half a modulation period fits the run: psi > 0 in the first half,
    // psi < 0 in the second.
    const double duration = 8.0;
    halo::WindTrack track{0.0, 0.5, 2.0 * duration, 0.0};
    sim::DirectionalStochasticForce drive{3.0 * model.thermal_force_psd(0), track};

    sim::SimOptions opts;
    opts.sample_every = 25;
    opts.store_velocities = false;
    const sim::Trajectory traj = sim::simulate(
        trap, std::vector<sim::ForceSignal>{drive}, duration, 1e-7, 314, opts);

    auto half = [&](bool second) {
        sim::Trajectory part;
        part.trap = trap;
        part.dt_s = traj.dt_s;
        const std::size_t n2 = traj.n_samples / 2;
        const std::size_t off = second ? n2 : 0;
        for (int j = 0; j < 3; ++j) {
            part.positions_m[j].assign(traj.positions_m[j].begin() + off,
                                       traj.positions_m[j].begin() + off + n2);
        }
        part.n_samples = n2;
        return part;
    };
    const auto fit_a = spectra::estimate_orientation(
        spectra::welch_psd(half(false), 16384, 0.5), model);
    const auto fit_b = spectra::estimate_orientation(
        spectra::welch_psd(half(true), 16384, 0.5), model);
    CHECK(fit_a.quadrant_sign == 1);
    CHECK(fit_b.quadrant_sign == -1);
    CHECK(fit_a.amplitude > 5.0 * fit_a.amplitude_sigma);
    CHECK(fit_b.amplitude < -5.0 * fit_b.amplitude_sigma);
}

TEST_CASE("thermal-only data yields no 5-sigma events over 1000 windows") {
    const sim::TrapConfig trap = test_trap(100.0);
    // Windows follow the slowest axis (60 kHz). 1100 of them.
    const double duration = 1100.0 * 2 * M_PI / trap.omega_rad_s[2];
    const sim::Trajectory traj = sim::simulate(trap, {}, duration, 1e-7, 4);
    const auto events = spectra::detect_impulses(traj, 5.0);
    // Gaussian-tail estimate: 1000 one-sided trials at 5 sigma expect
    // ~2.9e-4 events; observing more than one would be wildly inconsistent.
    CHECK(events.size() <= 1);
}

TEST_SUITE_END();
