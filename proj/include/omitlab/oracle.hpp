#pragma once

#include "omitlab/model.hpp"
#include "omitlab/response.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Brute-force time-domain check of the analytic response: fixed-step RK4 on the
// classical, noise-free linearized equations in the frame rotating at the pump,
// followed by least-squares demodulation of the intracavity field.
namespace omitlab::oracle {

using complex = std::complex<double>;

struct ClassicalState {
    double q = 0.0;
    double p = 0.0;
    double a_re = 0.0;
    double a_im = 0.0;

    complex field() const { return {a_re, a_im}; }
    double norm() const;
};

struct IntegrateOptions {
    ClassicalState initial{};
    double record_from = 0.0;    // s; earlier samples are not stored
    std::size_t sample_stride = 1;
};

struct Trajectory {
    std::vector<double> time;
    std::vector<ClassicalState> states;
    double dt = 0.0;
    double t_end = 0.0;
    bool diverged = false;
    bool hit_hard_limit = false; // norm exceeded 1e12 x drive scale; integration stopped
    double growth_rate = 0.0;    // fitted envelope rate over the second half, 1/s
};

// Largest step accepted for a given model and drive: 2 pi / (50 max rate).
double max_stable_step(const response::ResponseModel& m, const model::DriveConfig& drive);
// Default step 2 pi / (200 Omega_m), reduced if a faster rate requires it.
double default_step(const response::ResponseModel& m, const model::DriveConfig& drive);

// Integrates from t = 0 to t_end. Divergence is reported, not thrown: the
// norm is tracked in blocks of three mechanical periods, ln(block max) is
// fitted over the second half of the run, and the run is flagged when the
// fitted growth exceeds three e-folds over that half while the last three
// blocks increase strictly.
Trajectory integrate(const response::ResponseModel& m, const model::DriveConfig& drive,
                     double t_end, double dt, const IntegrateOptions& options = {});

struct DemodResult {
    complex beat_complex; // 2 kappa2 alpha_s A_-, phase referred to the probe
    complex a_minus;
    complex a_plus;
    double residual = 0.0; // rms misfit / rms fitted tone
    bool diverged = false;
    double growth_rate = 0.0;
};

// Projects a complex signal onto {cos wt, sin wt, 1} over [t_last - window, t_last].
// The window must span at least 20 periods and lie within the samples.
DemodResult demodulate_signal(std::span<const double> time, std::span<const complex> signal,
                              double omega, double window);

// Same projection on the intracavity field of a trajectory; beat_complex is
// A_- times beat_scale.
DemodResult demodulate(const Trajectory& trajectory, double omega, double window,
                       complex beat_scale = 1.0);

struct OracleSettings {
    double dt = 0.0;                 // 0 selects default_step
    double settle_gamma_eff = 45.0;  // settle time in units of 1/gamma_eff
    double window_periods = 40.0;    // demodulation window in probe periods
};

// Integrate + demodulate at the drive's probe offset.
DemodResult oracle_point(const response::ResponseModel& m, const model::DriveConfig& drive,
                         const OracleSettings& settings = {});

// One result per grid value, same grid semantics as response::spectrum_sweep.
std::vector<DemodResult> oracle_sweep(const response::ResponseModel& m,
                                      const model::DriveConfig& drive_template,
                                      std::span<const double> omega_grid,
                                      response::SweepMode mode = response::SweepMode::locked,
                                      const OracleSettings& settings = {});

// Largest real part among the eigenvalues of the homogeneous system, 1/s.
// Positive means the state grows without bound.
double exact_growth_rate(const response::ResponseModel& m, double delta);

} // namespace omitlab::oracle
