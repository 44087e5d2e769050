#pragma once

#include "omitlab/model.hpp"

#include <complex>
#include <optional>
#include <span>
#include <vector>

// Analytic frequency-domain response of the linearized optomechanical system
// to a weak probe: effective susceptibility, sideband amplitudes, transmitted
// beat note, group delay and the transparency/amplification window.
namespace omitlab::response {

using complex = std::complex<double>;

// Operating point of the coupled system. g_coupling, alpha_s and h_shift are
// the values at detuning delta_ref; with track_detuning they are rescaled with
// the pump build-up 1/sqrt(kappa_t^2 + delta^2) as the detuning moves.
struct ResponseModel {
    double omega_m = 0.0;    // bare mechanical frequency, rad/s
    double gamma_m = 0.0;    // rad/s
    double h_shift = 0.0;    // rad/s
    double g_coupling = 0.0; // rad/s
    double kappa0 = 0.0;
    double kappa2 = 0.0;
    double alpha_s = 0.0;    // sqrt(photons)
    double delta_ref = 0.0;
    bool track_detuning = false;

    double kappa_t() const { return kappa0 + kappa2; }
    double eta() const { return 2.0 * kappa0 / kappa_t(); }
    double eta_prime() const;
    double cooperativity() const;
    double omega_m_tilde() const;
};

ResponseModel make_response_model(const model::MechanicalMode& mechanics,
                                  const model::CavityOptics& optics,
                                  const model::DerivedCoupling& coupling, double delta_ref);

// Coupling quantities at a given cavity-pump detuning.
struct LocalCoupling {
    double g_coupling;
    double alpha_s;
    double omega_m_tilde;
};
LocalCoupling at_detuning(const ResponseModel& m, double delta);

// Omega_m [Omega~_m^2 - w^2 - i w gamma_m - G^2 Delta Omega_m / ((kappa_T - i w)^2 + Delta^2)]^-1
// Throws SingularityError when the bracket vanishes to 1e-30 of Omega_m^2.
complex chi_eff(const ResponseModel& m, double delta, double omega);

struct Sidebands {
    complex a_plus;  // exp(+i Omega t) component of the intracavity fluctuation
    complex a_minus; // exp(-i Omega t) component
    complex x_mech;  // position amplitude, dq = X exp(-i Omega t) + c.c.
};

// The pump field is real (alpha_s > 0); drive.pump_power is not used here.
Sidebands sideband_amplitudes(const ResponseModel& m, const model::DriveConfig& drive);

// 2 kappa2 alpha_s A_- with the phase referred to the probe phase.
complex beat_amplitude(const ResponseModel& m, const model::DriveConfig& drive);

// Probe transmission sqrt(2 kappa2) A_- / s_p and reflection sqrt(2 kappa0) A_- / s_p - 1.
complex probe_transmission(const ResponseModel& m, const model::DriveConfig& drive);
complex probe_reflection(const ResponseModel& m, const model::DriveConfig& drive);

enum class SweepMode {
    locked,      // probe offset and cavity detuning swept together, Omega = Delta
    fixed_delta, // only the probe offset sweeps
};

// The drive at grid value omega for the chosen protocol.
model::DriveConfig drive_at(const model::DriveConfig& base, double omega, SweepMode mode);

struct ResponsePoint {
    double omega_probe_offset = 0.0;
    double delta = 0.0;
    complex a_plus;
    complex a_minus;
    complex x_mech;
    complex a_beat;
    double group_delay = 0.0; // s, negative = advance
};

// One point per grid value (strictly increasing, non-empty).
std::vector<ResponsePoint> spectrum_sweep(const ResponseModel& m,
                                          const model::DriveConfig& drive_template,
                                          std::span<const double> omega_grid,
                                          SweepMode mode = SweepMode::locked);

// Scale used for numerical steps: gamma_m |1 + C| (red) or gamma_m |1 - C|
// (blue), floored at 1e-3 gamma_m.
double effective_linewidth_estimate(const ResponseModel& m, double delta);

enum class Observable { transmitted_beat, reflected_probe };

// d(phase)/d(Omega) at the drive's probe offset: five-point stencil, step
// halved from gamma_eff/100 until successive estimates agree to 1e-3.
double group_delay(const ResponseModel& m, const model::DriveConfig& drive,
                   SweepMode mode = SweepMode::locked,
                   Observable observable = Observable::transmitted_beat);

enum class Sideband { red, blue };

struct StabilityReport {
    bool stable = true;
    double margin = 0.0; // effective mechanical damping, rad/s
    Sideband sideband = Sideband::red;
};

// Red sideband (Delta > 0): always stable, margin gamma_m (1 + C).
// Blue sideband (Delta < 0): stable iff C < 1, margin gamma_m (1 - C).
StabilityReport stability_check(const ResponseModel& m, const model::DriveConfig& drive);

struct WindowMetrics {
    Sideband sideband = Sideband::red;
    bool stable = true;
    double cooperativity = 0.0;
    double gamma_eff = 0.0;              // closed form gamma_m (1 +- C)
    std::optional<double> tau_t_max;     // red only
    std::optional<double> tau_r_max;     // red only
    std::optional<double> gain;          // eta' / (1 +- C); empty when unstable

    // Extracted from a local locked sweep (empty when unstable).
    std::optional<double> centre;        // probe offset of the extremum
    std::optional<double> fwhm;          // full width at half extremum of |A_beat|^2
    std::optional<double> dip_depth;     // |A_beat(centre)| / |A_beat(baseline)|
    std::optional<double> tau_numeric;   // transmitted group delay at the centre
    std::optional<double> tau_r_numeric; // reflected group delay at the centre
};

// Closed forms plus numerical extraction around Omega = Delta = +-Omega~_m.
// The baseline is |A_beat| at |Omega - Omega~_m| = 20 gamma_eff (mean of both sides).
WindowMetrics window_metrics(const ResponseModel& m, const model::DriveConfig& drive_template,
                             Sideband sideband);

// Closed forms.
double tau_transmission_max(double cooperativity, double gamma_m);
double tau_reflection_max(double cooperativity, double gamma_m, double eta);
double amplifier_gain(double cooperativity, double eta_prime); // blue sideband

} // namespace omitlab::response
