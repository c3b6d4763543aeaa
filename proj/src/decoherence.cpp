#include "levidm/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>

#include "levidm/quadrature.hpp"
#include "levidm/rng.hpp"
#include "levidm/units.hpp"

namespace levidm::deco {

using units::constants::amu_to_kg;
using units::constants::c;
using units::constants::hbar;
using units::constants::hbar_c_ev_m;
using units::constants::k_boltzmann;

namespace {

double one_minus_sinc(double z) {
    const double z2 = z * z;
    if (std::abs(z) < 1e-2) {
        return z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0));
    }
    return 1.0 - std::sin(z) / z;
}

// Uniform-sphere form factor 3 (sin x - x cos x) / x^3.
double sphere_form_factor(double x) {
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        return 1.0 - x2 / 10.0 + x2 * x2 / 280.0;
    }
    return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

// Angular integral over outgoing directions at fixed incoming momentum q:
//   2 pi / q^2  int_0^{2q} dq' q' dcs(q, mu(q')) w(q')
// where q' is the momentum transfer and w an arbitrary weight. Panels follow
// both a geometric ladder (forward peaks) and the oscillation scale of w.
template <typename W>
quad::Result transfer_integral(const DifferentialCrossSection& dcs, double q,
                               const W& weight, double osc_period,
                               std::span<const double> extra_breaks,
                               double rel_tol) {
    const double top = 2.0 * q;
    std::vector<double> breaks = quad::oscillation_breakpoints(top, osc_period);
    for (double b : extra_breaks) {
        if (b > 0.0 && b < top) breaks.push_back(b);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    auto integrand = [&](double dq) {
        const double mu = 1.0 - dq * dq / (2.0 * q * q);
        return dq * dcs(q, mu) * weight(dq);
    };
    quad::Result r = quad::integrate_panels(integrand, breaks, rel_tol, 400);
    r.value *= 2.0 * M_PI / (q * q);
    r.abs_error *= 2.0 * M_PI / (q * q);
    return r;
}

// int du f(u) u g(q(u)) over the environment's speed support.
template <typename G>
quad::Result speed_integral(const Environment& env, const G& g,
                            double rel_tol, double abs_tol = 0.0) {
    return quad::integrate(
        [&](double u) {
            const double f = env.speed_pdf(u);
            if (f <= 0.0) return 0.0;
            return f * u * g(env.mass_ev * u, u);
        },
        0.0, env.v_max, rel_tol, abs_tol, 400);
}

void require_converged(const quad::Result& r, const char* what,
                       double rel_tol) {
    const double achieved =
        std::abs(r.value) > 0.0 ? r.abs_error / std::abs(r.value) : 0.0;
    if (!r.converged && achieved > rel_tol) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (achieved relative error "
           << achieved << ", requested " << rel_tol << ")";
        throw NumericError(os.str());
    }
}

} // namespace

Environment environment_from_halo(const halo::HaloModel& h) {
    h.validate();
    Environment env;
    env.n0_ev3 = halo::number_density_m3(h) * hbar_c_ev_m * hbar_c_ev_m *
                 hbar_c_ev_m;
    env.mass_ev = h.m_chi_ev;
    env.v_max = h.v_escape_m_s / c;
    const halo::HaloModel copy = h;
    env.speed_pdf = [copy](double u) { return halo::speed_pdf(copy, u * c) * c; };
    env.label = "halo";
    return env;
}

Environment environment_from_gas(double pressure_pa, double gas_mass_kg,
                                 double mean_speed_m_s) {
    if (!(pressure_pa > 0.0) || !(gas_mass_kg > 0.0) || !(mean_speed_m_s > 0.0)) {
        throw InvalidInput("environment_from_gas: inputs must be > 0");
    }
    // Temperature from the Maxwell-Boltzmann mean speed.
    const double kt = M_PI * gas_mass_kg * mean_speed_m_s * mean_speed_m_s / 8.0;
    const double n_si = pressure_pa / kt;
    const double vp = mean_speed_m_s * std::sqrt(M_PI) / 2.0; // most probable
    Environment env;
    env.n0_ev3 = n_si * hbar_c_ev_m * hbar_c_ev_m * hbar_c_ev_m;
    env.mass_ev = units::ev_from_kg(gas_mass_kg);
    env.v_max = std::min(1.0, 8.0 * vp / c);
    env.speed_pdf = [vp](double u) {
        const double x = u * c / vp;
        return 4.0 / std::sqrt(M_PI) * x * x * std::exp(-x * x) * c / vp;
    };
    env.label = "gas";
    return env;
}

DifferentialCrossSection hard_sphere_dcs(double sigma_tot_m2) {
    const double sigma_nat = sigma_tot_m2 / (hbar_c_ev_m * hbar_c_ev_m);
    return [sigma_nat](double, double) { return sigma_nat / (4.0 * M_PI); };
}

void YukawaCoupling::validate() const {
    if (!(g_chi >= 0.0) || !(g_m >= 0.0) || !(m_mediator_ev >= 0.0)) {
        throw InvalidInput("coupling: g_chi, g_m and m_mediator must be >= 0");
    }
}

void Target::validate() const {
    if (!(n_nucleons >= 1.0)) throw InvalidInput("target.n_nucleons: must be >= 1");
    if (!(radius_m > 0.0)) throw InvalidInput("target.radius_m: must be > 0");
    if (!(mass_kg > 0.0)) throw InvalidInput("target.mass_kg: must be > 0");
    const double expected = n_nucleons * amu_to_kg;
    if (std::abs(mass_kg - expected) > 0.10 * expected) {
        throw InvalidInput("target.mass_kg: inconsistent with n_nucleons "
                           "(beyond 10% of N nucleon masses)");
    }
}

void Superposition::validate() const {
    if (!(delta_x_m >= 0.0)) throw InvalidInput("superposition.delta_x_m: must be >= 0");
    if (!(exposure_s >= 0.0)) throw InvalidInput("superposition.exposure_s: must be >= 0");
}

double localisation_rate_per_s(const Environment& env,
                               const DifferentialCrossSection& dcs,
                               double delta_x_m, double rel_tol) {
    if (!(delta_x_m >= 0.0)) {
        throw InvalidInput("localisation_rate: delta_x must be >= 0");
    }
    if (delta_x_m == 0.0) return 0.0;
    const double d = delta_x_m / hbar_c_ev_m;
    const double inner_tol = rel_tol / 3.0;
    auto inner = [&](double q, double) {
        return transfer_integral(
                   dcs, q, [d](double dq) { return one_minus_sinc(dq * d); },
                   M_PI / d, {}, inner_tol)
            .value;
    };
    quad::Result r = speed_integral(env, inner, rel_tol / 3.0);
    require_converged(r, "localisation_rate", rel_tol);
    return units::per_second_from_ev(env.n0_ev3 * r.value);
}

double short_wavelength_rate_per_s(const Environment& env,
                                   const DifferentialCrossSection& dcs) {
    auto inner = [&](double q, double) {
        return transfer_integral(dcs, q, [](double) { return 1.0; }, 0.0, {},
                                 1e-6)
            .value;
    };
    quad::Result r = speed_integral(env, inner, 1e-6);
    require_converged(r, "short_wavelength_rate", 1e-5);
    return units::per_second_from_ev(env.n0_ev3 * r.value);
}

double long_wavelength_coefficient(const Environment& env,
                                   const DifferentialCrossSection& dcs) {
    auto inner = [&](double q, double) {
        return transfer_integral(dcs, q, [](double dq) { return dq * dq / 6.0; },
                                 0.0, {}, 1e-6)
            .value;
    };
    quad::Result r = speed_integral(env, inner, 1e-6);
    require_converged(r, "long_wavelength_coefficient", 1e-5);
    // eV^3 (natural Lambda) -> 1/(m^2 s).
    return units::per_second_from_ev(env.n0_ev3 * r.value) /
           (hbar_c_ev_m * hbar_c_ev_m);
}

AirRates air_rates(double pressure_pa, double gas_mass_kg,
                   double gas_velocity_m_s, double radius_m) {
    if (!(pressure_pa > 0.0) || !(gas_mass_kg > 0.0) ||
        !(gas_velocity_m_s > 0.0) || !(radius_m > 0.0)) {
        throw InvalidInput("air_rates: all inputs must be > 0");
    }
    const double r2 = radius_m * radius_m;
    AirRates out;
    out.lambda_lwr_per_m2_s = 8.0 * std::sqrt(2.0 * M_PI) * gas_mass_kg *
                              gas_velocity_m_s * pressure_pa * r2 /
                              (3.0 * std::sqrt(3.0) * hbar * hbar);
    out.gamma_swr_per_s = 16.0 * M_PI * std::sqrt(2.0 * M_PI) * pressure_pa *
                          r2 / (std::sqrt(3.0) * gas_mass_kg * gas_velocity_m_s);
    return out;
}

double yukawa_dcs_ev2(const YukawaCoupling& coupling, double m_chi_ev,
                      double q_transfer_ev) {
    coupling.validate();
    if (!(q_transfer_ev >= 0.0)) {
        throw InvalidInput("yukawa_dcs: q_transfer must be >= 0");
    }
    const double mm2 = coupling.m_mediator_ev * coupling.m_mediator_ev;
    const double denom = q_transfer_ev * q_transfer_ev + mm2;
    if (denom == 0.0) {
        throw InvalidInput(
            "yukawa_dcs: q = 0 with a massless mediator is singular");
    }
    const double g2g2 = coupling.g_chi * coupling.g_chi * coupling.g_m *
                        coupling.g_m;
    return g2g2 * m_chi_ev * m_chi_ev / (4.0 * M_PI * M_PI * denom * denom);
}

double yukawa_dcs_cm2(const YukawaCoupling& coupling, double m_chi_ev,
                      double q_transfer_ev) {
    return yukawa_dcs_ev2(coupling, m_chi_ev, q_transfer_ev) * hbar_c_ev_m *
           hbar_c_ev_m * 1e4;
}

double yukawa_total_cross_section_ev2(const YukawaCoupling& coupling,
                                      double m_chi_ev, double q_ev) {
    coupling.validate();
    const double mm2 = coupling.m_mediator_ev * coupling.m_mediator_ev;
    if (mm2 == 0.0) {
        throw InvalidInput("yukawa_total_cross_section: massless mediator has "
                           "no finite total cross-section");
    }
    const double g2g2 = coupling.g_chi * coupling.g_chi * coupling.g_m *
                        coupling.g_m;
    return g2g2 * m_chi_ev * m_chi_ev /
           (M_PI * mm2 * (4.0 * q_ev * q_ev + mm2));
}

double structure_factor(const Target& target, double q_transfer_ev) {
    if (!(q_transfer_ev >= 0.0)) {
        throw InvalidInput("structure_factor: q_transfer must be >= 0");
    }
    const double x = q_transfer_ev * target.radius_m / hbar_c_ev_m;
    const double ff = sphere_form_factor(x);
    const double ff2 = ff * ff;
    const double n = target.n_nucleons;
    return n * n * ff2 + n * (1.0 - ff2);
}

namespace {

struct ComplexRate {
    double gamma_ev = 0.0;      // Re part of the localisation functional
    double phase_ev = 0.0;      // +sin part (coherent phase rate)
    double gamma_err = 0.0;
    double phase_err = 0.0;
};

// Inverse-CDF sampler over the environment speed distribution.
struct SpeedSampler {
    std::vector<double> u, cdf;

    explicit SpeedSampler(const Environment& env, std::size_t n = 4096) {
        u.resize(n + 1);
        cdf.resize(n + 1);
        const double du = env.v_max / static_cast<double>(n);
        double acc = 0.0;
        double prev = 0.0;
        u[0] = 0.0;
        cdf[0] = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            u[i] = static_cast<double>(i) * du;
            const double f = env.speed_pdf(u[i]);
            acc += 0.5 * (prev + f) * du;
            cdf[i] = acc;
            prev = f;
        }
        for (auto& v : cdf) v /= acc;
    }

    double sample(double unif) const {
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), unif);
        if (it == cdf.begin()) return u.front();
        if (it == cdf.end()) return u.back();
        const auto hi = static_cast<std::size_t>(it - cdf.begin());
        const std::size_t lo = hi - 1;
        const double span = cdf[hi] - cdf[lo];
        const double frac = span > 0.0 ? (unif - cdf[lo]) / span : 0.0;
        return u[lo] + frac * (u[hi] - u[lo]);
    }
};

struct Vec3 {
    double x, y, z;
};

Vec3 orthonormal_partner(const Vec3& n) {
    if (std::abs(n.z) < 0.9) {
        const double norm = std::hypot(n.y, n.x);
        return {-n.y / norm, n.x / norm, 0.0};
    }
    const double norm = std::hypot(n.z, n.y);
    return {0.0, -n.z / norm, n.y / norm};
}

// Quadrature evaluation of the directional (cone-restricted) kernel for one
// incoming momentum q. Returns gamma and phase parts of the angular average.
std::complex<double> directional_kernel(
    const DifferentialCrossSection& dcs_eff, double q, double d,
    double cos_psi, double sin_psi, double cone_cos, double rel_tol,
    std::span<const double> extra_breaks, const std::vector<double>& gl_x,
    const std::vector<double>& gl_w) {
    // Average over the incoming cone (mu_n in [cone_cos, 1], azimuth in
    // [0, pi] by symmetry), Gauss-Legendre in both variables.
    std::complex<double> acc = 0.0;
    const double mu_half = 0.5 * (1.0 - cone_cos);
    const double mu_mid = 0.5 * (1.0 + cone_cos);
    for (std::size_t a = 0; a < gl_x.size(); ++a) {
        const double mu_n = mu_mid + mu_half * gl_x[a];
        const double sin_n = std::sqrt(std::max(0.0, 1.0 - mu_n * mu_n));
        for (std::size_t b = 0; b < gl_x.size(); ++b) {
            const double phi_n = 0.5 * M_PI * (gl_x[b] + 1.0);
            const double cos_alpha =
                mu_n * cos_psi - sin_n * sin_psi * std::cos(phi_n);
            const double sin_alpha =
                std::sqrt(std::max(0.0, 1.0 - cos_alpha * cos_alpha));

            auto integrand_re = [&](double dq) {
                const double mu = 1.0 - dq * dq / (2.0 * q * q);
                const double sin_th = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                const double phase = q * d * cos_alpha * (1.0 - mu);
                const double bessel =
                    std::cyl_bessel_j(0.0, q * d * sin_th * sin_alpha);
                return dq * dcs_eff(q, mu) *
                       (1.0 - std::cos(phase) * bessel);
            };
            auto integrand_im = [&](double dq) {
                const double mu = 1.0 - dq * dq / (2.0 * q * q);
                const double sin_th = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                const double phase = q * d * cos_alpha * (1.0 - mu);
                const double bessel =
                    std::cyl_bessel_j(0.0, q * d * sin_th * sin_alpha);
                return dq * dcs_eff(q, mu) * std::sin(phase) * bessel;
            };

            std::vector<double> breaks =
                quad::oscillation_breakpoints(2.0 * q, d > 0.0 ? M_PI / d : 0.0);
            for (double e : extra_breaks) {
                if (e > 0.0 && e < 2.0 * q) breaks.push_back(e);
            }
            std::sort(breaks.begin(), breaks.end());
            breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

            const double re = quad::integrate_panels(integrand_re, breaks,
                                                     rel_tol, 200)
                                  .value;
            const double im = quad::integrate_panels(integrand_im, breaks,
                                                     rel_tol, 200)
                                  .value;
            const double w = gl_w[a] * gl_w[b];
            acc += w * std::complex<double>(re, im);
        }
    }
    // Normalisations: GL weights integrate over mu_n and phi_n spans; the
    // cone average divides by (1 - cone_cos) and pi. Momentum-transfer
    // measure carries 2 pi / q^2.
    const double norm = mu_half * (0.5 * M_PI) / ((1.0 - cone_cos) * M_PI);
    return acc * norm * 2.0 * M_PI / (q * q);
}

struct McResult {
    double gamma_ev = 0.0, gamma_se = 0.0;
    double phase_ev = 0.0, phase_se = 0.0;
    std::size_t n_samples = 0;
};

// Monte-Carlo estimate of the same functional, sampling incoming speeds from
// the environment distribution, incoming directions uniformly (over the
// sphere or the cone) and momentum transfers from a propagator-shaped
// mixture so forward-peaked cross-sections stay low-variance.
McResult mc_rate(const Environment& env, const DifferentialCrossSection& dcs_eff,
                 double d, double m_mediator_ev, bool directional,
                 double cos_psi, double sin_psi, double cone_cos,
                 const DecoherenceOptions& opts) {
    SpeedSampler sampler(env);
    rng::NoiseStream stream(opts.mc_seed, directional ? 2 : 1);

    double sum_g = 0.0, sum_g2 = 0.0;
    double sum_p = 0.0, sum_p2 = 0.0;
    std::size_t n_total = 0;

    const Vec3 wind{cos_psi, sin_psi, 0.0};
    const Vec3 e1 = directional ? orthonormal_partner(wind) : Vec3{0.0, 1.0, 0.0};
    const Vec3 e2 = directional
                        ? Vec3{wind.y * e1.z - wind.z * e1.y,
                               wind.z * e1.x - wind.x * e1.z,
                               wind.x * e1.y - wind.y * e1.x}
                        : Vec3{0.0, 0.0, 1.0};

    while (n_total < opts.mc_max_samples) {
        for (std::size_t i = 0; i < opts.mc_batch; ++i) {
            const double u = sampler.sample(stream.uniform());
            const double q = env.mass_ev * u;
            if (q <= 0.0) continue;
            const double t_top = 4.0 * q * q;

            // Incoming direction.
            double mu_n;
            if (directional) {
                mu_n = cone_cos + (1.0 - cone_cos) * stream.uniform();
            } else {
                mu_n = 1.0 - 2.0 * stream.uniform();
            }
            const double phi_n = 2.0 * M_PI * stream.uniform();
            const double sin_nv = std::sqrt(std::max(0.0, 1.0 - mu_n * mu_n));
            Vec3 n{};
            if (directional) {
                n = {mu_n * wind.x + sin_nv * (std::cos(phi_n) * e1.x + std::sin(phi_n) * e2.x),
                     mu_n * wind.y + sin_nv * (std::cos(phi_n) * e1.y + std::sin(phi_n) * e2.y),
                     mu_n * wind.z + sin_nv * (std::cos(phi_n) * e1.z + std::sin(phi_n) * e2.z)};
            } else {
                n = {sin_nv * std::cos(phi_n), sin_nv * std::sin(phi_n), mu_n};
            }

            // Momentum transfer t = dq^2 from a propagator/log-uniform mix.
            const double mm2 = m_mediator_ev * m_mediator_ev;
            const double t_floor = t_top * 1e-16;
            double t;
            double pdf_t;
            const double log_span = std::log(t_top / t_floor);
            const double u1 = stream.uniform();
            if (mm2 > 0.0) {
                const double a_norm = t_top / (mm2 * (t_top + mm2));
                if (stream.uniform() < 0.5) {
                    // Inverse CDF of 1/(t+mm2)^2, cancellation-free form.
                    const double x = u1 * a_norm;
                    t = x * mm2 * mm2 / (1.0 - x * mm2);
                } else {
                    t = t_floor * std::exp(u1 * log_span);
                }
                t = std::clamp(t, 0.0, t_top);
                const double p_prop =
                    1.0 / (a_norm * (t + mm2) * (t + mm2));
                const double p_log =
                    (t >= t_floor) ? 1.0 / (t * log_span) : 0.0;
                pdf_t = 0.5 * p_prop + 0.5 * p_log;
            } else {
                t = t_floor * std::exp(u1 * log_span);
                pdf_t = 1.0 / (t * log_span);
            }
            if (!(pdf_t > 0.0)) continue;

            const double mu = 1.0 - t / (2.0 * q * q);
            const double sin_th = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            const double phi_s = 2.0 * M_PI * stream.uniform();

            // Outgoing direction in the frame of n.
            const Vec3 p1 = orthonormal_partner(n);
            const Vec3 p2{n.y * p1.z - n.z * p1.y, n.z * p1.x - n.x * p1.z,
                          n.x * p1.y - n.y * p1.x};
            const Vec3 np{
                mu * n.x + sin_th * (std::cos(phi_s) * p1.x + std::sin(phi_s) * p2.x),
                mu * n.y + sin_th * (std::cos(phi_s) * p1.y + std::sin(phi_s) * p2.y),
                mu * n.z + sin_th * (std::cos(phi_s) * p1.z + std::sin(phi_s) * p2.z)};

            const double z = q * d * (n.x - np.x); // superposition along x
            const double kernel_re = 1.0 - std::cos(z);
            const double kernel_im = std::sin(z);

            // d Omega' = dphi dmu = dphi dt / (2 q^2).
            const double jac = 2.0 * M_PI / (2.0 * q * q) / pdf_t;
            const double common = u * dcs_eff(q, mu) * jac;
            const double gw = common * kernel_re;
            const double pw = common * kernel_im;
            sum_g += gw;
            sum_g2 += gw * gw;
            sum_p += pw;
            sum_p2 += pw * pw;
        }
        n_total += opts.mc_batch;

        const double nn = static_cast<double>(n_total);
        const double mean_g = sum_g / nn;
        const double se_g =
            std::sqrt(std::max(0.0, sum_g2 / nn - mean_g * mean_g) / nn);
        if (mean_g != 0.0 && se_g / std::abs(mean_g) < opts.mc_target_rel_se) {
            break;
        }
    }

    const double nn = static_cast<double>(n_total);
    McResult out;
    out.n_samples = n_total;
    const double mean_g = sum_g / nn;
    const double mean_p = sum_p / nn;
    out.gamma_ev = env.n0_ev3 * mean_g;
    out.phase_ev = env.n0_ev3 * mean_p;
    out.gamma_se = env.n0_ev3 *
                   std::sqrt(std::max(0.0, sum_g2 / nn - mean_g * mean_g) / nn);
    out.phase_se = env.n0_ev3 *
                   std::sqrt(std::max(0.0, sum_p2 / nn - mean_p * mean_p) / nn);
    return out;
}

} // namespace

DecoherenceReport dm_decoherence(const halo::HaloModel& h,
                                 const YukawaCoupling& coupling,
                                 const Target& target, const Superposition& sup,
                                 const std::optional<DirectionalMode>& mode,
                                 const DecoherenceOptions& opts) {
    h.validate();
    coupling.validate();
    target.validate();
    sup.validate();

    Environment env = environment_from_halo(h);
    const double m_chi = h.m_chi_ev;
    auto dcs_eff = [&](double q, double mu) {
        const double t = std::max(0.0, 2.0 * q * q * (1.0 - mu));
        const double dq = std::sqrt(t);
        return yukawa_dcs_ev2(coupling, m_chi, dq) * structure_factor(target, dq);
    };

    DecoherenceReport report;
    report.exposure_s = sup.exposure_s;
    if (sup.delta_x_m == 0.0) {
        report.visibility = 1.0;
        return report;
    }

    const double d = sup.delta_x_m / hbar_c_ev_m;
    const double mm = coupling.m_mediator_ev;
    const std::array<double, 3> extra_breaks = {mm, 3.0 * mm, 10.0 * mm};
    const double inner_tol = opts.quad_rel_tol / 3.0;

    double gamma_nat = 0.0;
    double phase_nat = 0.0;

    if (!mode.has_value()) {
        auto inner = [&](double q, double) {
            return transfer_integral(
                       dcs_eff, q,
                       [d](double dq) { return one_minus_sinc(dq * d); },
                       M_PI / d, extra_breaks, inner_tol)
                .value;
        };
        quad::Result r = speed_integral(env, inner, inner_tol);
        require_converged(r, "dm_decoherence", opts.quad_rel_tol);
        gamma_nat = env.n0_ev3 * r.value;
        phase_nat = 0.0; // full angular average is real by construction
    } else {
        const double cos_psi = std::cos(mode->psi_rad);
        const double sin_psi = std::sin(mode->psi_rad);
        const double cone_cos = std::cos(mode->half_width_rad);
        std::vector<double> gl_x, gl_w;
        quad::gauss_legendre(8, gl_x, gl_w);

        std::map<double, std::complex<double>> cache;
        auto kernel = [&](double u) {
            const auto it = cache.find(u);
            if (it != cache.end()) return it->second;
            const double q = env.mass_ev * u;
            const std::complex<double> k = directional_kernel(
                dcs_eff, q, d, cos_psi, sin_psi, cone_cos, inner_tol,
                extra_breaks, gl_x, gl_w);
            cache.emplace(u, k);
            return k;
        };

        quad::Result rg = quad::integrate(
            [&](double u) {
                const double f = env.speed_pdf(u);
                if (f <= 0.0) return 0.0;
                return f * u * kernel(u).real();
            },
            0.0, env.v_max, inner_tol, 0.0, 300);
        require_converged(rg, "dm_decoherence(directional)", opts.quad_rel_tol);
        quad::Result rp = quad::integrate(
            [&](double u) {
                const double f = env.speed_pdf(u);
                if (f <= 0.0) return 0.0;
                return f * u * kernel(u).imag();
            },
            0.0, env.v_max, inner_tol, inner_tol * std::abs(rg.value), 300);
        gamma_nat = env.n0_ev3 * rg.value;
        phase_nat = env.n0_ev3 * rp.value;
    }

    if (opts.cross_validate) {
        const McResult mc =
            mc_rate(env, dcs_eff, d, coupling.m_mediator_ev, mode.has_value(),
                    mode ? std::cos(mode->psi_rad) : 1.0,
                    mode ? std::sin(mode->psi_rad) : 0.0,
                    mode ? std::cos(mode->half_width_rad) : -1.0, opts);
        report.mc_gamma_rate_per_s = units::per_second_from_ev(mc.gamma_ev);
        report.mc_phase_rate_per_s = units::per_second_from_ev(mc.phase_ev);
        report.mc_gamma_se_per_s = units::per_second_from_ev(mc.gamma_se);
        report.mc_samples = mc.n_samples;
        const double dg = std::abs(gamma_nat - mc.gamma_ev);
        if (dg > opts.agreement * std::max(std::abs(gamma_nat), 1e-300) &&
            dg > 4.0 * mc.gamma_se) {
            std::ostringstream os;
            os << "dm_decoherence: quadrature/Monte-Carlo disagreement on the "
                  "decoherence rate: quadrature "
               << units::per_second_from_ev(gamma_nat) << " 1/s vs Monte-Carlo "
               << units::per_second_from_ev(mc.gamma_ev) << " 1/s ("
               << mc.n_samples << " samples)";
            throw NumericError(os.str());
        }
        if (mode.has_value()) {
            const double dp = std::abs(phase_nat - mc.phase_ev);
            if (dp > opts.agreement * std::max(std::abs(phase_nat), 1e-300) &&
                dp > 4.0 * mc.phase_se) {
                std::ostringstream os;
                os << "dm_decoherence: quadrature/Monte-Carlo disagreement on "
                      "the phase rate: quadrature "
                   << units::per_second_from_ev(phase_nat)
                   << " 1/s vs Monte-Carlo "
                   << units::per_second_from_ev(mc.phase_ev) << " 1/s";
                throw NumericError(os.str());
            }
        }
    }

    report.gamma_rate_per_s = units::per_second_from_ev(gamma_nat);
    report.phase_rate_per_s = units::per_second_from_ev(phase_nat);
    report.visibility = std::exp(-report.gamma_rate_per_s * report.exposure_s);
    report.phase_rad = report.phase_rate_per_s * report.exposure_s;
    return report;
}

OffDiagonal evolve_offdiagonal(const DecoherenceReport& report) {
    if (!(report.exposure_s >= 0.0)) {
        throw InvalidInput("evolve_offdiagonal: exposure must be >= 0");
    }
    OffDiagonal out;
    out.magnitude = std::exp(-report.gamma_rate_per_s * report.exposure_s);
    out.phase_rad = report.phase_rate_per_s * report.exposure_s;
    return out;
}

namespace {

// Couplings normalized so the angle-integrated per-nucleon cross-section at
// reference momentum m_chi * v_mean equals sigma_n.
YukawaCoupling coupling_for_cross_section(double sigma_n_cm2, double m_chi_ev,
                                          double m_mediator_ev,
                                          double v_mean_m_s) {
    const double sigma_nat = sigma_n_cm2 * 1e-4 / (hbar_c_ev_m * hbar_c_ev_m);
    const double q_ref = m_chi_ev * v_mean_m_s / c;
    const double mm2 = m_mediator_ev * m_mediator_ev;
    const double g4 = sigma_nat * M_PI * mm2 * (4.0 * q_ref * q_ref + mm2) /
                      (m_chi_ev * m_chi_ev);
    const double g = std::pow(g4, 0.25);
    return {g, g, m_mediator_ev};
}

Target silica_sphere(double radius_m) {
    const double density = 2200.0; // kg/m^3, fused silica
    const double mass =
        density * 4.0 / 3.0 * M_PI * radius_m * radius_m * radius_m;
    const double n = std::round(mass / amu_to_kg);
    return {n, radius_m, mass};
}

} // namespace

ScenarioPreset scenario_preset(const std::string& name) {
    ScenarioPreset preset;
    preset.name = name;
    const halo::HaloModel base_halo{0.3, 220e3, 544e3, 1e9};
    const Target target = silica_sphere(70e-9);

    if (name == "bateman-100ev") {
        halo::HaloModel h = base_halo;
        h.m_chi_ev = 100.0;
        const YukawaCoupling c =
            coupling_for_cross_section(1e-29, h.m_chi_ev, 1e3, h.v_mean_m_s);
        preset.points.push_back({h, c, target, {100e-9, 1.0}});
        return preset;
    }
    if (name == "riedel-scan") {
        // 5 x 5 log lattice, 1 keV..10 MeV x 10 meV..10 keV.
        for (int i = 0; i < 5; ++i) {
            const double m_chi = 1e3 * std::pow(10.0, i);
            for (int j = 0; j < 5; ++j) {
                const double m_med = 1e-2 * std::pow(10.0, 1.5 * j);
                halo::HaloModel h = base_halo;
                h.m_chi_ev = m_chi;
                const YukawaCoupling c = coupling_for_cross_section(
                    1e-29, m_chi, m_med, h.v_mean_m_s);
                preset.points.push_back({h, c, target, {10e-9, 1.0}});
            }
        }
        return preset;
    }
    throw InvalidInput("scenario_preset: unknown preset '" + name +
                       "' (expected bateman-100ev or riedel-scan)");
}

} // namespace levidm::deco
