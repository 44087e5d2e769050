#pragma once

#include "omitlab/response.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Damped least-squares estimation of coupling, linewidths and readout scale
// from beat spectra.
namespace omitlab::fit {

using complex = std::complex<double>;

struct SpectrumData {
    std::vector<double> omega;       // rad/s, strictly increasing
    std::vector<double> modulus;     // |A_beat|, arbitrary units
    std::vector<double> phase;       // rad, optional (empty = absent)
    std::vector<double> sigma;       // modulus uncertainty, optional
    std::vector<double> sigma_phase; // rad, optional

    bool has_phase() const { return !phase.empty(); }
    std::size_t size() const { return omega.size(); }
    void validate() const; // DomainError on inconsistent content
};

// Parameters of the forward model. g_coupling is reported as a magnitude.
enum Param : std::size_t { g_coupling, kappa_t, gamma_m, scale, phase_offset, centre, param_count };

inline constexpr std::array<const char*, param_count> param_names = {
    "g_coupling", "kappa_t", "gamma_m", "scale", "phase_offset", "omega_m_tilde"};

using ParamVector = std::array<double, param_count>;

// Which parameters move. The default matches the recommended analysis:
// kappa_T is held (it is nearly degenerate with G deep in the resolved-sideband
// limit) and the window centre is held at the model's Omega~_m.
struct FreeMask {
    std::array<bool, param_count> free = {true, false, true, true, true, false};
    std::size_t count(bool with_phase) const;
    static FreeMask from_names(std::span<const std::string> names); // DomainError on unknown name
};

// Everything the forward model needs besides the fitted parameters: the
// mechanical frequency, the kappa0/kappa2 split and the sweep protocol.
struct FitModel {
    response::ResponseModel base;
    model::DriveConfig drive_template;
    response::SweepMode mode = response::SweepMode::locked;

    // Parameter vector taken from the base model (scale 1, phase 0).
    ParamVector nominal() const;
    // S e^{i phi0} A_beat(omega) / A_beat(omega = Delta, G = 0).
    complex evaluate(const ParamVector& p, double omega) const;
    response::ResponseModel with(const ParamVector& p) const;
};

SpectrumData synthesize(const FitModel& model, const ParamVector& p, std::span<const double> grid,
                        bool with_phase = true);

struct FitOptions {
    int max_iterations = 500;
    double relative_tolerance = 1e-10;
    double fd_step = 1e-6;  // in internal coordinates (log or scaled linear)
    int restarts = 1;       // 1..5 seeds, see fit_spectrum
};

struct FitResult {
    ParamVector values{};
    ParamVector sigma{};             // 1-sigma from the local quadratic model
    bool uncertainties_available = false;
    FreeMask mask;
    double objective = 0.0;          // sum of squared weighted residuals
    double chi2_reduced = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string message;
    std::vector<double> objective_history; // one entry per accepted step
};

// Minimises weighted squared residuals of |A_beat| (and wrapped phase when
// present). Without sigma the modulus residual is normalised by the median
// of the data, which keeps the fit invariant under data rescaling, and the
// covariance is scaled by chi2_reduced. With restarts > 1 the free
// parameters G and gamma_m are reseeded by factors 0.5, 2, 0.8, 1.25 and the
// lowest objective wins.
FitResult fit_spectrum(const SpectrumData& data, const FitModel& model, const ParamVector& initial,
                       const FreeMask& mask = {}, const FitOptions& options = {});

struct JointResult {
    double kappa_t = 0.0, kappa_t_sigma = 0.0;
    double gamma_m = 0.0, gamma_m_sigma = 0.0;
    std::vector<double> g_coupling, g_sigma;
    std::vector<double> scale;
    bool converged = false;
    bool uncertainties_available = false;
    int iterations = 0;
    double chi2_reduced = 0.0;
    std::string message;
};

// Several spectra with shared (kappa_T, gamma_m) and per-dataset (G, scale,
// and phase offset where phase is present). kappa_T is fitted only when
// fit_kappa is set.
JointResult fit_joint(std::span<const SpectrumData> data, std::span<const FitModel> models,
                      std::span<const ParamVector> initial, bool fit_kappa = false,
                      const FitOptions& options = {});

// Seeds from the extremum and its full width at the half-extremum power level.
// gamma_m and kappa_T come from the model unless the spectrum constrains them
// (kappa_T from the baseline curvature in fixed-detuning sweeps). A dip selects
// the transparency branch, a peak the amplification branch.
// The centre stays at the model's Omega~_m unless seed_centre is set, in which
// case it is taken from the extremum. Throws DomainError when no extremum
// stands 3 sigma above the noise.
ParamVector initial_guess(const SpectrumData& data, const FitModel& model,
                          bool seed_centre = false);

// Counter-based seeding: replica i always draws from the same stream.
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t index);

struct MonteCarloSpec {
    ParamVector truth{};
    std::vector<double> grid;
    double relative_noise = 0.01; // multiplicative Gaussian on the modulus
    double phase_noise = 0.01;    // additive Gaussian on the phase, rad
    bool with_phase = false;
    int replicas = 100;
    std::uint64_t seed = 1;
    FreeMask mask;
    FitOptions options;
};

// Synthesises noisy replicas and fits each from the truth-independent seed of
// initial_guess. Replicas run concurrently; results are in replica order.
std::vector<FitResult> monte_carlo(const FitModel& model, const MonteCarloSpec& spec);

// Noisy copy of a clean spectrum (used by monte_carlo and the tests).
SpectrumData add_noise(const SpectrumData& clean, double relative_noise, double phase_noise,
                       std::uint64_t seed);

} // namespace omitlab::fit
