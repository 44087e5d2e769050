#pragma once

#include <complex>
#include <string>
#include <vector>

// Physical parameters of the membrane-in-the-middle system and the scalar
// quantities derived from them. All rates are angular (rad/s); SI elsewhere.
namespace omitlab::model {

struct MechanicalMode {
    double omega_m = 0.0;       // rad/s
    double q_factor = 0.0;
    double gamma_m = 0.0;       // rad/s, omega_m / q_factor
    double mass = 0.0;          // kg
    double overlap_theta = 1.0; // transverse overlap, (0, 1]
    double x0 = 0.0;            // m, sqrt(hbar / (mass * omega_m))
};

// Throws DomainError naming the first non-positive input.
MechanicalMode derive_mechanics(double omega_m, double q_factor, double mass,
                                double overlap_theta = 1.0);

struct CavityOptics {
    double kappa0 = 0.0;        // input mirror amplitude decay rate
    double kappa2 = 0.0;        // back mirror amplitude decay rate
    double kappa_t = 0.0;       // kappa0 + kappa2
    double omega_laser = 0.0;   // rad/s
    double cavity_length = 0.0; // m
    double eta = 0.0;           // 2 kappa0 / kappa_t
    double eta_prime = 0.0;     // 2 sqrt(kappa0 kappa2) / kappa_t
};

CavityOptics make_optics(double kappa0, double kappa2, double wavelength,
                         double cavity_length);

double laser_angular_frequency(double wavelength);

struct DriveConfig {
    double pump_power = 0.0;               // W
    double delta = 0.0;                    // cavity - pump detuning, rad/s
    std::complex<double> probe_amp{0.0};   // sqrt(photons/s)
    double probe_offset = 0.0;             // pump-probe detuning, rad/s
};

// Threshold on |s_p|^2 hbar omega_L / P above which the probe is no longer weak.
inline constexpr double weak_probe_ratio_limit = 1e-2;

// Throws on invalid drive (negative power); returns advisory warnings
// (currently only the weak-probe check).
std::vector<std::string> validate_drive(const DriveConfig& drive, const CavityOptics& optics);

struct DerivedCoupling {
    double alpha_s = 0.0;       // sqrt(photons), real >= 0
    double g_coupling = 0.0;    // rad/s, signed
    double h_shift = 0.0;       // rad/s
    double omega_m_tilde = 0.0; // rad/s
    double cooperativity = 0.0;
};

double cooperativity(double g_coupling, double kappa_t, double gamma_m);

// Intracavity steady amplitude for the given pump.
double steady_amplitude(const CavityOptics& optics, double pump_power, double delta);

// Radiation-pressure coupling from the dispersion slope/curvature (in z0 units,
// rad/(s m) and rad/(s m^2)).
DerivedCoupling steady_state(const MechanicalMode& mechanics, const CavityOptics& optics,
                             const DriveConfig& drive, double dispersion_slope,
                             double dispersion_curvature);

// Coupling specified directly (as fitted values are reported): alpha_s still
// follows from the pump; G and h are taken as given.
DerivedCoupling explicit_coupling(const MechanicalMode& mechanics, const CavityOptics& optics,
                                  const DriveConfig& drive, double g_coupling, double h_shift);

// Dispersion slope that yields a target |G| at the given drive (inverse of the
// coupling relation). Useful to pin a quoted coupling.
double slope_for_coupling(const MechanicalMode& mechanics, const CavityOptics& optics,
                          const DriveConfig& drive, double g_coupling);

struct ThermalEnvironment {
    double temperature = 0.0; // K
    double n_th = 0.0;        // Bose occupancy
};

ThermalEnvironment thermal_occupancy(double temperature, const MechanicalMode& mechanics);

// C / n_th. Values > 1 mean a quantum state outlives thermal decoherence during
// storage. Returns +infinity when n_th == 0.
double quantum_storage_margin(double cooperativity, double n_th);
double quantum_storage_margin(const ThermalEnvironment& env, const DerivedCoupling& coupling);

} // namespace omitlab::model
