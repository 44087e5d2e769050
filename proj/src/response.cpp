#include "omitlab/response.hpp"

#include "omitlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace omitlab::response {

namespace {

constexpr complex i_unit{0.0, 1.0};

complex probe_phase_reference(const complex& probe) {
    const double mag = std::abs(probe);
    return mag > 0.0 ? std::conj(probe) / mag : complex{1.0, 0.0};
}

double golden_extremum(const std::function<double(double)>& f, double lo, double hi,
                       bool maximize) {
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto g = [&](double x) { return maximize ? -f(x) : f(x); };
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(lo)); ++i) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = g(x2);
        }
    }
    return 0.5 * (lo + hi);
}

// Bisection for f(x) = 0 with f(a), f(b) of opposite sign.
double bisect(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if ((fm < 0) == (fa < 0)) {
            a = mid; fa = fm;
        } else {
            b = mid;
        }
        if (std::fabs(b - a) <= 1e-13 * std::max(1.0, std::fabs(a))) break;
    }
    return 0.5 * (a + b);
}

} // namespace

double ResponseModel::eta_prime() const {
    return 2.0 * std::sqrt(kappa0 * kappa2) / kappa_t();
}

double ResponseModel::cooperativity() const {
    return model::cooperativity(g_coupling, kappa_t(), gamma_m);
}

double ResponseModel::omega_m_tilde() const {
    return std::sqrt(omega_m * omega_m + h_shift * omega_m);
}

ResponseModel make_response_model(const model::MechanicalMode& mechanics,
                                  const model::CavityOptics& optics,
                                  const model::DerivedCoupling& coupling, double delta_ref) {
    ResponseModel m;
    m.omega_m = mechanics.omega_m;
    m.gamma_m = mechanics.gamma_m;
    m.h_shift = coupling.h_shift;
    m.g_coupling = coupling.g_coupling;
    m.kappa0 = optics.kappa0;
    m.kappa2 = optics.kappa2;
    m.alpha_s = coupling.alpha_s;
    m.delta_ref = delta_ref;
    return m;
}

LocalCoupling at_detuning(const ResponseModel& m, double delta) {
    double scale = 1.0;
    if (m.track_detuning) {
        const double k = m.kappa_t();
        scale = std::sqrt((k * k + m.delta_ref * m.delta_ref) / (k * k + delta * delta));
    }
    const double h = m.h_shift * scale * scale;
    const double omega_sq = m.omega_m * m.omega_m + h * m.omega_m;
    if (!(omega_sq > 0.0)) throw DomainError("h_shift", "mechanical frequency collapses");
    return {m.g_coupling * scale, m.alpha_s * scale, std::sqrt(omega_sq)};
}

complex chi_eff(const ResponseModel& m, double delta, double omega) {
    if (!(m.kappa_t() > 0.0)) throw DomainError("kappa_t", "must be positive");
    const auto local = at_detuning(m, delta);
    const complex cavity = std::pow(complex(m.kappa_t(), -omega), 2) + delta * delta;
    const complex bracket = local.omega_m_tilde * local.omega_m_tilde - omega * omega -
                            i_unit * omega * m.gamma_m -
                            local.g_coupling * local.g_coupling * delta * m.omega_m / cavity;
    if (std::abs(bracket) < 1e-30 * m.omega_m * m.omega_m) {
        std::ostringstream msg;
        msg << "effective susceptibility is singular at omega = " << omega << " rad/s";
        throw SingularityError(msg.str());
    }
    return m.omega_m / bracket;
}

Sidebands sideband_amplitudes(const ResponseModel& m, const model::DriveConfig& drive) {
    const double delta = drive.delta;
    const double omega = drive.probe_offset;
    const double kt = m.kappa_t();
    const auto local = at_detuning(m, delta);
    const double g2 = local.g_coupling * local.g_coupling;

    const complex d_minus(kt, delta - omega);
    const complex d_plus(kt, delta + omega);
    const complex bare = std::sqrt(2.0 * m.kappa0) * drive.probe_amp / d_minus;
    const complex chi = chi_eff(m, delta, omega);

    Sidebands s;
    s.a_minus = bare * (1.0 + i_unit * g2 * chi / (2.0 * d_minus));
    // The exp(+i Omega t) sideband is driven by the conjugate probe through the
    // real position coordinate; chi(-Omega) = conj(chi(Omega)) for real Omega.
    s.a_plus = std::conj(bare) * i_unit * g2 * std::conj(chi) / (2.0 * d_plus);
    s.x_mech = local.g_coupling * std::sqrt(m.kappa0) * drive.probe_amp * chi / d_minus;
    return s;
}

complex beat_amplitude(const ResponseModel& m, const model::DriveConfig& drive) {
    const auto local = at_detuning(m, drive.delta);
    const auto s = sideband_amplitudes(m, drive);
    return 2.0 * m.kappa2 * local.alpha_s * s.a_minus * probe_phase_reference(drive.probe_amp);
}

complex probe_transmission(const ResponseModel& m, const model::DriveConfig& drive) {
    if (std::abs(drive.probe_amp) == 0.0) throw DomainError("probe_amp", "must be non-zero");
    return std::sqrt(2.0 * m.kappa2) * sideband_amplitudes(m, drive).a_minus / drive.probe_amp;
}

complex probe_reflection(const ResponseModel& m, const model::DriveConfig& drive) {
    if (std::abs(drive.probe_amp) == 0.0) throw DomainError("probe_amp", "must be non-zero");
    return std::sqrt(2.0 * m.kappa0) * sideband_amplitudes(m, drive).a_minus / drive.probe_amp -
           1.0;
}

model::DriveConfig drive_at(const model::DriveConfig& base, double omega, SweepMode mode) {
    model::DriveConfig d = base;
    d.probe_offset = omega;
    if (mode == SweepMode::locked) d.delta = omega;
    return d;
}

double effective_linewidth_estimate(const ResponseModel& m, double delta) {
    const auto local = at_detuning(m, delta);
    const double c = model::cooperativity(local.g_coupling, m.kappa_t(), m.gamma_m);
    double factor = 1.0;
    if (delta > 0.0) factor = std::fabs(1.0 + c);
    if (delta < 0.0) factor = std::fabs(1.0 - c);
    return m.gamma_m * std::max(factor, 1e-3);
}

double group_delay(const ResponseModel& m, const model::DriveConfig& drive, SweepMode mode,
                   Observable observable) {
    if (std::abs(drive.probe_amp) == 0.0) throw DomainError("probe_amp", "must be non-zero");
    const double omega0 = drive.probe_offset;
    const auto observe = [&](double omega) {
        const auto d = drive_at(drive, omega, mode);
        return observable == Observable::transmitted_beat ? beat_amplitude(m, d)
                                                          : probe_reflection(m, d);
    };
    const complex reference = observe(omega0);
    if (std::abs(reference) == 0.0)
        throw NumericalError("observable vanishes at the evaluation point; phase undefined");
    const auto phase = [&](double omega) { return std::arg(observe(omega) / reference); };
    const auto stencil = [&](double h) {
        return (phase(omega0 - 2 * h) - 8 * phase(omega0 - h) + 8 * phase(omega0 + h) -
                phase(omega0 + 2 * h)) /
               (12 * h);
    };

    double h = effective_linewidth_estimate(m, drive.delta) / 100.0;
    double previous = stencil(h);
    for (int i = 0; i < 40; ++i) {
        h *= 0.5;
        const double current = stencil(h);
        if (std::fabs(current - previous) <= 1e-3 * std::fabs(current) + 1e-15) return current;
        previous = current;
    }
    throw NumericalError("group delay step adaptation did not converge");
}

std::vector<ResponsePoint> spectrum_sweep(const ResponseModel& m,
                                          const model::DriveConfig& drive_template,
                                          std::span<const double> omega_grid, SweepMode mode) {
    if (omega_grid.empty()) throw DomainError("omega_grid", "must not be empty");
    for (std::size_t i = 1; i < omega_grid.size(); ++i)
        if (!(omega_grid[i] > omega_grid[i - 1]))
            throw DomainError("omega_grid", "must be strictly increasing");

    std::vector<ResponsePoint> out;
    out.reserve(omega_grid.size());
    for (double omega : omega_grid) {
        const auto drive = drive_at(drive_template, omega, mode);
        const auto s = sideband_amplitudes(m, drive);
        ResponsePoint p;
        p.omega_probe_offset = omega;
        p.delta = drive.delta;
        p.a_plus = s.a_plus;
        p.a_minus = s.a_minus;
        p.x_mech = s.x_mech;
        p.a_beat = beat_amplitude(m, drive);
        p.group_delay = group_delay(m, drive, mode);
        out.push_back(p);
    }
    return out;
}

StabilityReport stability_check(const ResponseModel& m, const model::DriveConfig& drive) {
    if (drive.delta == 0.0)
        throw DomainError("delta", "stability check needs a red (> 0) or blue (< 0) detuning");
    const auto local = at_detuning(m, drive.delta);
    const double c = model::cooperativity(local.g_coupling, m.kappa_t(), m.gamma_m);
    StabilityReport r;
    if (drive.delta > 0.0) {
        r.sideband = Sideband::red;
        r.margin = m.gamma_m * (1.0 + c);
        r.stable = true;
    } else {
        r.sideband = Sideband::blue;
        r.margin = m.gamma_m * (1.0 - c);
        r.stable = c < 1.0;
    }
    return r;
}

double tau_transmission_max(double cooperativity, double gamma_m) {
    return -2.0 * cooperativity / (gamma_m * (1.0 + cooperativity));
}

double tau_reflection_max(double cooperativity, double gamma_m, double eta) {
    // removable 0/0 at C = 0 with a critically coupled input (eta = 1)
    if (cooperativity == 0.0) return 0.0;
    return 2.0 * eta * cooperativity /
           (gamma_m * (1.0 + cooperativity) * (1.0 - eta + cooperativity));
}

double amplifier_gain(double cooperativity, double eta_prime) {
    return eta_prime / (1.0 - cooperativity);
}

WindowMetrics window_metrics(const ResponseModel& m, const model::DriveConfig& drive_template,
                             Sideband sideband) {
    const double sign = sideband == Sideband::red ? 1.0 : -1.0;
    // Omega~_m depends on the detuning only through tracked pump build-up.
    double centre_guess = sign * m.omega_m_tilde();
    centre_guess = sign * at_detuning(m, centre_guess).omega_m_tilde;
    const auto local = at_detuning(m, centre_guess);
    const double c = model::cooperativity(local.g_coupling, m.kappa_t(), m.gamma_m);

    WindowMetrics w;
    w.sideband = sideband;
    w.cooperativity = c;
    if (sideband == Sideband::red) {
        w.stable = true;
        w.gamma_eff = m.gamma_m * (1.0 + c);
        w.tau_t_max = tau_transmission_max(c, m.gamma_m);
        w.tau_r_max = tau_reflection_max(c, m.gamma_m, m.eta());
        w.gain = m.eta_prime() / (1.0 + c);
    } else {
        w.stable = c < 1.0;
        w.gamma_eff = m.gamma_m * (1.0 - c);
        if (w.stable) w.gain = amplifier_gain(c, m.eta_prime());
    }
    if (!w.stable) return w;

    const double width = w.gamma_eff;
    const auto modulus = [&](double omega) {
        return std::abs(beat_amplitude(m, drive_at(drive_template, omega, SweepMode::locked)));
    };
    const bool peak = sideband == Sideband::blue;

    // Coarse scan, then golden-section refinement between neighbours.
    constexpr int scan = 240;
    const double lo = centre_guess - 3.0 * width;
    const double hi = centre_guess + 3.0 * width;
    int best = 0;
    double best_value = modulus(lo);
    for (int i = 1; i <= scan; ++i) {
        const double v = modulus(lo + (hi - lo) * i / scan);
        if (peak ? v > best_value : v < best_value) {
            best_value = v;
            best = i;
        }
    }
    const double step = (hi - lo) / scan;
    const double centre = golden_extremum(modulus, lo + (best - 1) * step,
                                          lo + (best + 1) * step, peak);
    const double extremum = modulus(centre);
    const double baseline =
        0.5 * (modulus(centre_guess - 20.0 * width) + modulus(centre_guess + 20.0 * width));

    const double level_sq = 0.5 * (baseline * baseline + extremum * extremum);
    const auto crossing = [&](double omega) {
        const double v = modulus(omega);
        return v * v - level_sq;
    };
    const double left = bisect(crossing, centre - 20.0 * width, centre);
    const double right = bisect(crossing, centre, centre + 20.0 * width);

    w.centre = centre;
    w.fwhm = right - left;
    w.dip_depth = extremum / baseline;

    const auto probe = drive_at(drive_template, centre, SweepMode::locked);
    w.tau_numeric = group_delay(m, probe, SweepMode::locked);
    w.tau_r_numeric = group_delay(m, probe, SweepMode::locked, Observable::reflected_probe);
    return w;
}

} // namespace omitlab::response
