#include "levidm/spectra.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "levidm/units.hpp"

namespace levidm::spectra {

using units::constants::k_boltzmann;

namespace {

// FFTW planning mutates global planner state; executing distinct plans is
// thread-safe, creating or destroying them is not.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftPlan {
    std::size_t n = 0;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    explicit FftPlan(std::size_t len) : n(len) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        in = fftw_alloc_real(n);
        out = fftw_alloc_complex(n / 2 + 1);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void execute() { fftw_execute(plan); }
};

} // namespace

SpectralEstimate welch_psd(const sim::Trajectory& traj,
                           std::size_t segment_length, double overlap) {
    if (segment_length < 8 || segment_length > traj.n_samples) {
        throw InvalidInput("welch_psd: segment_length must be in [8, n_samples]");
    }
    if (!(overlap >= 0.0) || overlap > 0.9) {
        throw InvalidInput("welch_psd: overlap must lie in [0, 0.9]");
    }
    if (!(traj.dt_s > 0.0)) {
        throw InvalidInput("welch_psd: trajectory has no uniform sample interval");
    }
    const std::size_t L = segment_length;
    const auto hop = std::max<std::size_t>(
        1, L - static_cast<std::size_t>(std::floor(overlap * static_cast<double>(L))));
    const std::size_t n_segments = (traj.n_samples - L) / hop + 1;
    const double fs = 1.0 / traj.dt_s;
    const std::size_t n_bins = L / 2 + 1;

    std::vector<double> window(L);
    double wpow = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                          static_cast<double>(L)));
        wpow += window[i] * window[i];
    }

    SpectralEstimate est;
    est.freq_hz.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        est.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(L);
    }
    est.s_xx.assign(n_bins, 0.0);
    est.s_yy.assign(n_bins, 0.0);
    est.s_zz.assign(n_bins, 0.0);
    est.s_xy.assign(n_bins, {0.0, 0.0});
    est.n_averages = n_segments;
    est.segment_length = L;
    est.overlap = overlap;

    FftPlan fft(L);
    std::vector<std::complex<double>> spec_x(n_bins), spec_y(n_bins);

    auto transform = [&](const std::vector<double>& data, std::size_t offset,
                         std::vector<std::complex<double>>& out_spec) {
        double mean = 0.0;
        for (std::size_t i = 0; i < L; ++i) mean += data[offset + i];
        mean /= static_cast<double>(L);
        for (std::size_t i = 0; i < L; ++i) {
            fft.in[i] = (data[offset + i] - mean) * window[i];
        }
        fft.execute();
        for (std::size_t k = 0; k < n_bins; ++k) {
            out_spec[k] = {fft.out[k][0], fft.out[k][1]};
        }
    };

    for (std::size_t s = 0; s < n_segments; ++s) {
        const std::size_t off = s * hop;
        transform(traj.positions_m[0], off, spec_x);
        transform(traj.positions_m[1], off, spec_y);
        for (std::size_t k = 0; k < n_bins; ++k) {
            est.s_xx[k] += std::norm(spec_x[k]);
            est.s_yy[k] += std::norm(spec_y[k]);
            est.s_xy[k] += std::conj(spec_x[k]) * spec_y[k];
        }
        transform(traj.positions_m[2], off, spec_x);
        for (std::size_t k = 0; k < n_bins; ++k) {
            est.s_zz[k] += std::norm(spec_x[k]);
        }
    }

    // One-sided normalization; DC and Nyquist bins are not doubled.
    const double scale = 2.0 / (fs * wpow * static_cast<double>(n_segments));
    for (std::size_t k = 0; k < n_bins; ++k) {
        const double sk = (k == 0 || (L % 2 == 0 && k == n_bins - 1)) ? scale / 2.0 : scale;
        est.s_xx[k] *= sk;
        est.s_yy[k] *= sk;
        est.s_zz[k] *= sk;
        est.s_xy[k] *= sk;
    }
    return est;
}

SpectralEstimate average_estimates(std::span<const SpectralEstimate> parts) {
    if (parts.empty()) throw InvalidInput("average_estimates: no inputs");
    SpectralEstimate out = parts[0];
    double wsum = static_cast<double>(out.n_averages);
    for (auto& v : out.s_xx) v *= wsum;
    for (auto& v : out.s_yy) v *= wsum;
    for (auto& v : out.s_zz) v *= wsum;
    for (auto& v : out.s_xy) v *= wsum;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto& p = parts[i];
        if (p.freq_hz.size() != out.freq_hz.size() ||
            std::abs(p.df_hz() - out.df_hz()) > 1e-12 * out.df_hz()) {
            throw InvalidInput("average_estimates: inconsistent frequency grids");
        }
        const double w = static_cast<double>(p.n_averages);
        for (std::size_t k = 0; k < out.s_xx.size(); ++k) {
            out.s_xx[k] += w * p.s_xx[k];
            out.s_yy[k] += w * p.s_yy[k];
            out.s_zz[k] += w * p.s_zz[k];
            out.s_xy[k] += w * p.s_xy[k];
        }
        wsum += w;
        out.n_averages += p.n_averages;
    }
    for (auto& v : out.s_xx) v /= wsum;
    for (auto& v : out.s_yy) v /= wsum;
    for (auto& v : out.s_zz) v /= wsum;
    for (auto& v : out.s_xy) v /= wsum;
    return out;
}

double cross_band_covariance(const SpectralEstimate& est) {
    double acc = 0.0;
    for (const auto& c : est.s_xy) acc += c.real();
    return acc * est.df_hz();
}

std::complex<double> SusceptibilityModel::chi(int axis, double omega_rad_s) const {
    const double wj = trap.omega_rad_s[axis];
    const double gj = trap.gamma_rad_s[axis];
    const std::complex<double> denom(wj * wj - omega_rad_s * omega_rad_s,
                                     -gj * omega_rad_s);
    return 1.0 / (trap.mass_kg * denom);
}

double SusceptibilityModel::thermal_force_psd(int axis) const {
    return 4.0 * k_boltzmann * trap.temp_k[axis] * trap.mass_kg *
           trap.gamma_rad_s[axis];
}

double SusceptibilityModel::thermal_psd(int axis, double f_hz) const {
    return thermal_force_psd(axis) * std::norm(chi(axis, 2.0 * M_PI * f_hz));
}

AnalyticPsd analytic_psd(const SusceptibilityModel& model,
                         std::span<const sim::ForceSignal> drives, int axis,
                         std::span<const double> freq_hz) {
    if (axis < 0 || axis > 2) throw InvalidInput("analytic_psd: bad axis");
    double s_flat = model.thermal_force_psd(axis);
    AnalyticPsd out;
    out.freq_hz.assign(freq_hz.begin(), freq_hz.end());
    for (const auto& d : drives) {
        std::visit(
            [&](const auto& sig) {
                using T = std::decay_t<decltype(sig)>;
                if constexpr (std::is_same_v<T, sim::DirectionalStochasticForce>) {
                    const double psi = sim::signal_psi(sig, 0.0);
                    const double proj[3] = {std::cos(psi) * std::cos(psi),
                                            std::sin(psi) * std::sin(psi), 0.0};
                    s_flat += sig.s_force_n2_hz * proj[axis];
                } else if constexpr (std::is_same_v<T, sim::UncorrelatedBathForce>) {
                    s_flat += sig.s_force_n2_hz[axis];
                } else if constexpr (std::is_same_v<T, sim::HarmonicForce>) {
                    const double fd = sig.freq_rad_s / (2.0 * M_PI);
                    const double amp =
                        sig.amplitude_n * sig.direction[axis] *
                        std::abs(model.chi(axis, sig.freq_rad_s));
                    out.lines.push_back({fd, amp * amp / 2.0});
                } else {
                    throw InvalidInput(
                        "analytic_psd: only stochastic and harmonic drives are supported");
                }
            },
            d);
    }
    out.s.resize(out.freq_hz.size());
    for (std::size_t k = 0; k < out.freq_hz.size(); ++k) {
        out.s[k] =
            s_flat * std::norm(model.chi(axis, 2.0 * M_PI * out.freq_hz[k]));
    }
    return out;
}

std::vector<std::complex<double>> analytic_cross_spectrum(
    const SusceptibilityModel& model, double s_force_n2_hz, double psi_rad,
    std::span<const double> freq_hz) {
    if (!(s_force_n2_hz >= 0.0)) {
        throw InvalidInput("analytic_cross_spectrum: s_force must be >= 0");
    }
    const double geometry = std::cos(psi_rad) * std::sin(psi_rad);
    std::vector<std::complex<double>> out(freq_hz.size());
    for (std::size_t k = 0; k < freq_hz.size(); ++k) {
        const double w = 2.0 * M_PI * freq_hz[k];
        out[k] = geometry * s_force_n2_hz * model.chi(0, w) *
                 std::conj(model.chi(1, w));
    }
    return out;
}

namespace {

// Indices of the fit band around both resonances.
std::vector<std::size_t> fit_band(const SpectralEstimate& est,
                                  const sim::TrapConfig& trap) {
    const double fx = trap.omega_rad_s[0] / (2.0 * M_PI);
    const double fy = trap.omega_rad_s[1] / (2.0 * M_PI);
    const double half_width =
        5.0 * std::max(trap.gamma_rad_s[0], trap.gamma_rad_s[1]) / (2.0 * M_PI);
    const double lo = std::min(fx, fy) - half_width;
    const double hi = std::max(fx, fy) + half_width;
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k < est.freq_hz.size(); ++k) {
        if (est.freq_hz[k] >= lo && est.freq_hz[k] <= hi) idx.push_back(k);
    }
    return idx;
}

struct ScalarFit {
    double value = 0.0;
    double variance = 0.0;
};

} // namespace

OrientationFit estimate_orientation(const SpectralEstimate& est,
                                    const SusceptibilityModel& model) {
    if (est.n_averages < 50) {
        throw InvalidInput("estimate_orientation: needs n_averages >= 50");
    }
    const auto band = fit_band(est, model.trap);
    if (band.size() < 4) {
        throw EstimationError("estimate_orientation: fit band has too few bins");
    }
    const double n_avg = static_cast<double>(est.n_averages);

    // Cross-spectrum amplitude: s_xy ~ a * T(f) with real a. The estimator
    // variance of each quadrature is approximately s_xx s_yy / (2 n_avg).
    double num = 0.0, den = 0.0;
    for (std::size_t k : band) {
        const double w = 2.0 * M_PI * est.freq_hz[k];
        const std::complex<double> tmpl =
            model.chi(0, w) * std::conj(model.chi(1, w));
        const double var_q =
            std::max(est.s_xx[k] * est.s_yy[k], 1e-300) / (2.0 * n_avg);
        num += (tmpl.real() * est.s_xy[k].real() +
                tmpl.imag() * est.s_xy[k].imag()) /
               var_q;
        den += std::norm(tmpl) / var_q;
    }
    if (!(den > 0.0) || !std::isfinite(den)) {
        throw EstimationError("estimate_orientation: singular cross-spectrum fit");
    }
    ScalarFit amp{num / den, 1.0 / den};

    // Auto-spectral excess over the thermal model, per axis.
    auto fit_excess = [&](int axis, const std::vector<double>& s_meas) {
        double n2 = 0.0, d2 = 0.0;
        for (std::size_t k : band) {
            const double chi2 =
                std::norm(model.chi(axis, 2.0 * M_PI * est.freq_hz[k]));
            const double resid = s_meas[k] - model.thermal_psd(axis, est.freq_hz[k]);
            const double var_k =
                std::max(s_meas[k] * s_meas[k], 1e-300) / n_avg;
            n2 += chi2 * resid / var_k;
            d2 += chi2 * chi2 / var_k;
        }
        if (!(d2 > 0.0) || !std::isfinite(d2)) {
            throw EstimationError("estimate_orientation: singular auto-spectrum fit");
        }
        return ScalarFit{n2 / d2, 1.0 / d2};
    };
    const ScalarFit ex = fit_excess(0, est.s_xx);
    const ScalarFit ey = fit_excess(1, est.s_yy);

    OrientationFit fit;
    fit.amplitude = amp.value;
    fit.amplitude_sigma = std::sqrt(amp.variance);
    fit.excess_x = ex.value;
    fit.excess_y = ey.value;
    fit.quadrant_sign = amp.value >= 0.0 ? +1 : -1;
    fit.s_force_hat = std::max(ex.value, 0.0) + std::max(ey.value, 0.0);

    // |psi| from the excess ratio; the cross amplitude's sign fixes the
    // quadrant. Negative excesses are floored at zero.
    const double px = std::max(ex.value, 0.0);
    const double py = std::max(ey.value, 0.0);
    double psi_mag = 0.0;
    if (px + py > 0.0) {
        psi_mag = std::atan2(std::sqrt(py), std::sqrt(px));
    }
    fit.psi_hat_rad = fit.quadrant_sign >= 0 ? psi_mag : -psi_mag;

    // Delta-method uncertainty from the two excess fits. For
    // psi = atan(sqrt(ey/ex)), d psi/d ey = sqrt(ex) / (2 sqrt(ey) (ex+ey));
    // excesses are floored at one standard error so the estimate stays
    // finite at psi = 0 or pi/2.
    const double fx = std::max(px, std::sqrt(ex.variance));
    const double fy = std::max(py, std::sqrt(ey.variance));
    if (fx + fy > 0.0) {
        const double d_ey = std::sqrt(fx) / (2.0 * std::sqrt(fy) * (fx + fy));
        const double d_ex = -std::sqrt(fy) / (2.0 * std::sqrt(fx) * (fx + fy));
        fit.uncertainty_rad = std::sqrt(d_ey * d_ey * ey.variance +
                                        d_ex * d_ex * ex.variance);
    } else {
        fit.uncertainty_rad = M_PI / 2.0;
    }
    return fit;
}

std::vector<ImpulseEvent> detect_impulses(const sim::Trajectory& traj,
                                          double threshold_sigma) {
    if (!(threshold_sigma > 0.0)) {
        throw InvalidInput("detect_impulses: threshold_sigma must be > 0");
    }
    if (!traj.has_velocities()) {
        throw InvalidInput("detect_impulses: trajectory must carry velocities");
    }
    const double omega_min = std::min(
        {traj.trap.omega_rad_s[0], traj.trap.omega_rad_s[1], traj.trap.omega_rad_s[2]});
    const auto win = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(2.0 * M_PI / omega_min / traj.dt_s)));
    const std::size_t n_win = traj.n_samples / win;
    std::vector<ImpulseEvent> events;
    if (n_win < 3) return events;

    const double m = traj.trap.mass_kg;
    std::vector<double> energy(n_win, 0.0);
    for (std::size_t w = 0; w < n_win; ++w) {
        double acc = 0.0;
        for (std::size_t i = w * win; i < (w + 1) * win; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double vj = traj.velocities_m_s[j][i];
                const double xj = traj.positions_m[j][i];
                acc += 0.5 * m *
                       (vj * vj + traj.trap.omega_rad_s[j] *
                                      traj.trap.omega_rad_s[j] * xj * xj);
            }
        }
        energy[w] = acc / static_cast<double>(win);
    }

    // Window-to-window jumps, variance-stabilized: an oscillator at energy E
    // in thermal contact has jump fluctuations scaling like sqrt(E), so a
    // kick's ring-down would otherwise trip a global threshold. The floor on
    // the normalisation keeps the noiseless case finite.
    const auto e_max_it = std::max_element(energy.begin(), energy.end());
    const double e_floor = std::max(*e_max_it * 1e-6, 1e-300);
    std::vector<double> diffs(n_win - 1), z(n_win - 1);
    for (std::size_t w = 0; w + 1 < n_win; ++w) {
        diffs[w] = energy[w + 1] - energy[w];
        z[w] = diffs[w] /
               std::sqrt(std::max(std::max(energy[w], energy[w + 1]), e_floor));
    }

    // Robust spread via the median absolute deviation.
    std::vector<double> tmp = z;
    auto median_of = [](std::vector<double>& v) {
        std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    const double med = median_of(tmp);
    for (auto& d : tmp) d = std::abs(d - med);
    const double sigma = 1.4826 * median_of(tmp);

    // Residual floor: in near-noiseless data the MAD collapses while the
    // integrator's discrete-energy wiggle survives; demand a percent of the
    // largest normalized jump.
    double z_peak = 0.0;
    for (double v : z) z_peak = std::max(z_peak, std::abs(v));
    const double thresh = std::max(threshold_sigma * sigma, 1e-2 * z_peak);

    // A kick landing mid-window raises two consecutive diffs; merge runs of
    // super-threshold diffs into a single event bounded by quiet windows.
    std::size_t w = 0;
    while (w + 1 < n_win) {
        if (z[w] > thresh && diffs[w] > 0.0) {
            std::size_t last = w;
            while (last + 2 < n_win && z[last + 1] > thresh) ++last;
            const double jump = energy[last + 1] - energy[w];
            ImpulseEvent ev;
            ev.t_s = static_cast<double>((w + 1) * win) * traj.dt_s;
            ev.delta_p_hat_ns = std::sqrt(2.0 * m * std::max(jump, 0.0));
            events.push_back(ev);
            w = last + 1;
        } else {
            ++w;
        }
    }
    return events;
}

} // namespace levidm::spectra
