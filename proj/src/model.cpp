#include "omitlab/model.hpp"

#include "omitlab/constants.hpp"
#include "omitlab/errors.hpp"

#include <cmath>
#include <limits>

namespace omitlab::model {

namespace {

void require_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw DomainError(field, "must be positive and finite");
}

} // namespace

MechanicalMode derive_mechanics(double omega_m, double q_factor, double mass,
                                double overlap_theta) {
    require_positive(omega_m, "omega_m");
    require_positive(q_factor, "q_factor");
    require_positive(mass, "mass");
    require_positive(overlap_theta, "overlap_theta");
    if (overlap_theta > 1.0) throw DomainError("overlap_theta", "must not exceed 1");

    MechanicalMode m;
    m.omega_m = omega_m;
    m.q_factor = q_factor;
    m.gamma_m = omega_m / q_factor;
    m.mass = mass;
    m.overlap_theta = overlap_theta;
    m.x0 = std::sqrt(constants::hbar / (mass * omega_m));
    return m;
}

double laser_angular_frequency(double wavelength) {
    require_positive(wavelength, "wavelength");
    return constants::two_pi * constants::speed_of_light / wavelength;
}

CavityOptics make_optics(double kappa0, double kappa2, double wavelength,
                         double cavity_length) {
    require_positive(kappa0, "kappa0");
    require_positive(kappa2, "kappa2");
    require_positive(cavity_length, "cavity_length");

    CavityOptics o;
    o.kappa0 = kappa0;
    o.kappa2 = kappa2;
    o.kappa_t = kappa0 + kappa2;
    o.omega_laser = laser_angular_frequency(wavelength);
    o.cavity_length = cavity_length;
    o.eta = 2.0 * kappa0 / o.kappa_t;
    o.eta_prime = 2.0 * std::sqrt(kappa0 * kappa2) / o.kappa_t;
    return o;
}

std::vector<std::string> validate_drive(const DriveConfig& drive, const CavityOptics& optics) {
    if (!(drive.pump_power >= 0.0) || !std::isfinite(drive.pump_power))
        throw DomainError("pump_power", "must be non-negative and finite");
    if (!std::isfinite(drive.delta)) throw DomainError("delta", "must be finite");
    if (!std::isfinite(drive.probe_offset)) throw DomainError("probe_offset", "must be finite");

    std::vector<std::string> warnings;
    const double probe_power = std::norm(drive.probe_amp) * constants::hbar * optics.omega_laser;
    if (drive.pump_power > 0.0 && probe_power > 0.0 &&
        probe_power / drive.pump_power > weak_probe_ratio_limit) {
        warnings.push_back("probe power is not small compared with the pump (ratio " +
                           std::to_string(probe_power / drive.pump_power) +
                           "); the linearized response assumes a weak probe");
    }
    return warnings;
}

double cooperativity(double g_coupling, double kappa_t, double gamma_m) {
    return g_coupling * g_coupling / (2.0 * kappa_t * gamma_m);
}

double steady_amplitude(const CavityOptics& optics, double pump_power, double delta) {
    const double photon_flux = pump_power / (constants::hbar * optics.omega_laser);
    return std::sqrt(2.0 * optics.kappa0 * photon_flux) /
           std::hypot(optics.kappa_t, delta);
}

DerivedCoupling steady_state(const MechanicalMode& mechanics, const CavityOptics& optics,
                             const DriveConfig& drive, double dispersion_slope,
                             double dispersion_curvature) {
    validate_drive(drive, optics);

    // z0(q) = z0 + x0 Theta q, so d/dq = x0 Theta d/dz0.
    const double length_scale = mechanics.x0 * mechanics.overlap_theta;
    const double d_omega_dq = dispersion_slope * length_scale;
    const double d2_omega_dq2 = dispersion_curvature * length_scale * length_scale;

    DerivedCoupling c;
    c.alpha_s = steady_amplitude(optics, drive.pump_power, drive.delta);
    c.g_coupling = -std::sqrt(2.0) * d_omega_dq * c.alpha_s;
    c.h_shift = d2_omega_dq2 * c.alpha_s * c.alpha_s;
    const double omega_sq = mechanics.omega_m * mechanics.omega_m + c.h_shift * mechanics.omega_m;
    if (!(omega_sq > 0.0))
        throw DomainError("dispersion_curvature",
                          "second-order shift drives the mechanical frequency to zero");
    c.omega_m_tilde = std::sqrt(omega_sq);
    c.cooperativity = cooperativity(c.g_coupling, optics.kappa_t, mechanics.gamma_m);
    return c;
}

DerivedCoupling explicit_coupling(const MechanicalMode& mechanics, const CavityOptics& optics,
                                  const DriveConfig& drive, double g_coupling, double h_shift) {
    validate_drive(drive, optics);
    if (!std::isfinite(g_coupling)) throw DomainError("g_coupling", "must be finite");

    DerivedCoupling c;
    c.alpha_s = steady_amplitude(optics, drive.pump_power, drive.delta);
    c.g_coupling = g_coupling;
    c.h_shift = h_shift;
    const double omega_sq = mechanics.omega_m * mechanics.omega_m + h_shift * mechanics.omega_m;
    if (!(omega_sq > 0.0))
        throw DomainError("h_shift", "drives the mechanical frequency to zero");
    c.omega_m_tilde = std::sqrt(omega_sq);
    c.cooperativity = cooperativity(g_coupling, optics.kappa_t, mechanics.gamma_m);
    return c;
}

double slope_for_coupling(const MechanicalMode& mechanics, const CavityOptics& optics,
                          const DriveConfig& drive, double g_coupling) {
    const double alpha = steady_amplitude(optics, drive.pump_power, drive.delta);
    if (!(alpha > 0.0)) throw DomainError("pump_power", "zero drive cannot produce coupling");
    return -g_coupling / (std::sqrt(2.0) * alpha * mechanics.x0 * mechanics.overlap_theta);
}

ThermalEnvironment thermal_occupancy(double temperature, const MechanicalMode& mechanics) {
    require_positive(temperature, "temperature");
    const double x = constants::hbar * mechanics.omega_m / (constants::k_boltzmann * temperature);
    // expm1 keeps full precision in the classical (x << 1) limit; overflows to
    // inf (occupancy 0) as T -> 0.
    return {temperature, 1.0 / std::expm1(x)};
}

double quantum_storage_margin(double cooperativity, double n_th) {
    if (n_th == 0.0) return std::numeric_limits<double>::infinity();
    return cooperativity / n_th;
}

double quantum_storage_margin(const ThermalEnvironment& env, const DerivedCoupling& coupling) {
    return quantum_storage_margin(coupling.cooperativity, env.n_th);
}

} // namespace omitlab::model
