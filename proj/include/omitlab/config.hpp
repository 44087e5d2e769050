#pragma once

#include "omitlab/dispersion.hpp"
#include "omitlab/fit.hpp"
#include "omitlab/model.hpp"
#include "omitlab/oracle.hpp"
#include "omitlab/response.hpp"

#include "json.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

// Run configuration: one JSON document fully specifies a run. Unknown keys are
// rejected so that typos surface as input errors; optional fields are emitted
// only when set, so parse -> emit -> parse is lossless.
namespace omitlab::config {

struct MechanicsSection {
    double omega_m_over_2pi_hz = 355.6e3;
    double q_factor = 122000.0;
    double mass_kg = 45e-12;
    double overlap_theta = 1.0;
};

struct OpticsSection {
    double kappa0_per_s = 4.25e4;
    double kappa2_per_s = 4.25e4;
    double wavelength_m = 1064e-9;
    double cavity_length_m = 0.093;
    double finesse = 60000.0;
};

struct MembraneSection {
    double thickness_m = 50e-9;
    double n_real = 2.0;
    double n_imag = 2e-6;
    double z0_m = 4e-9;
};

struct DriveSection {
    double pump_power_w = 3e-3;
    double delta_over_omega_m = 1.0;
    std::complex<double> probe_amplitude{1e5, 0.0}; // sqrt(photons/s)
};

struct CouplingSection {
    std::string source = "explicit"; // explicit | dispersion
    double g_over_omega_m = 9.4e-3;  // explicit only, signed
    double h_shift_per_s = 0.0;      // explicit only
    bool track_detuning = false;
};

struct SweepSection {
    double start_hz = 354.6e3;
    double stop_hz = 356.6e3;
    std::size_t count = 401;
    std::string mode = "locked"; // locked | fixed-delta
};

struct DispersionGridSection {
    double start_m = 0.0;
    double stop_m = 532e-9;
    std::size_t count = 101;
};

struct OracleSection {
    std::optional<double> dt_s;
    double settle_gamma_eff = 45.0;
    double window_periods = 40.0;
    std::optional<double> surrogate_q;
    std::optional<double> surrogate_cooperativity;
};

struct FitSection {
    std::vector<std::string> free = {"g_coupling", "gamma_m", "scale", "phase_offset"};
    bool use_phase = true;
    int restarts = 1;
};

struct RunConfig {
    MechanicsSection mechanics;
    OpticsSection optics;
    MembraneSection membrane;
    DriveSection drive;
    CouplingSection coupling;
    SweepSection sweep;
    DispersionGridSection dispersion_grid;
    OracleSection oracle;
    FitSection fit;
    std::optional<double> temperature_k;
    std::optional<std::string> output;

    void validate() const; // DomainError naming the dotted field
};

// Parses a RunConfig or a RunRecord (whose "config" member is used).
RunConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig parse(const std::string& text);
std::string emit(const RunConfig& c); // pretty-printed, trailing newline
RunConfig load(const std::string& path);

response::SweepMode sweep_mode(const std::string& name);
std::vector<double> linear_grid(double start, double stop, std::size_t count);

// Physical objects assembled from a config.
struct Scenario {
    model::MechanicalMode mechanics;
    model::CavityOptics optics;
    model::DriveConfig drive;        // probe_offset = delta
    model::DerivedCoupling coupling;
    response::ResponseModel response;
    std::optional<dispersion::Derivatives> dispersion; // set when source == dispersion
    std::optional<model::ThermalEnvironment> thermal;
    std::vector<std::string> warnings;
};

Scenario build_scenario(const RunConfig& c);

// Response model for the oracle: surrogate Q replaces gamma_m, surrogate
// cooperativity resets |G| (sign kept) at that gamma_m.
response::ResponseModel oracle_model(const RunConfig& c, const Scenario& s);
oracle::OracleSettings oracle_settings(const RunConfig& c);

dispersion::MembraneCavity make_cavity(const RunConfig& c);

} // namespace omitlab::config
