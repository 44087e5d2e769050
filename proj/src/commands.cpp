#include "omitlab/commands.hpp"

#include "omitlab/config.hpp"
#include "omitlab/constants.hpp"
#include "omitlab/csv.hpp"
#include "omitlab/errors.hpp"
#include "omitlab/fit.hpp"
#include "omitlab/oracle.hpp"
#include "omitlab/response.hpp"
#include "omitlab/run_record.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace omitlab::cli {

namespace {

using constants::two_pi;

struct Options {
    std::string config;
    std::string out;
    double grid_start = 0.0;
    double grid_stop = 0.0;
    std::size_t grid_count = 0;
    std::string mode;
    std::string spectrum;
    std::string kv;
    std::string trajectory;
    std::size_t trajectory_stride = 50;

    CLI::Option* start_opt = nullptr;
    CLI::Option* stop_opt = nullptr;
    CLI::Option* count_opt = nullptr;
    CLI::Option* mode_opt = nullptr;
};

// A physics failure that should map to exit code 3.
struct PhysicsFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* sub, Options& o, const std::string& grid_unit) {
    sub->add_option("--config", o.config, "Run config (JSON) or a previous run record")
        ->required();
    sub->add_option("--out", o.out, "Output path; a <out>.run.json record is written beside it");
    o.start_opt = sub->add_option("--grid-start", o.grid_start, "Grid start override (" + grid_unit + ")");
    o.stop_opt = sub->add_option("--grid-stop", o.grid_stop, "Grid stop override (" + grid_unit + ")");
    o.count_opt = sub->add_option("--grid-count", o.grid_count, "Grid point count override");
}

void add_mode(CLI::App* sub, Options& o) {
    o.mode_opt = sub->add_option("--mode", o.mode, "Sweep protocol: locked (Omega = Delta) or fixed-delta")
                     ->check(CLI::IsMember({"locked", "fixed-delta"}));
}

// Applies grid and mode overrides to the frequency sweep.
void apply_sweep_overrides(config::RunConfig& c, const Options& o) {
    if (o.start_opt && o.start_opt->count()) c.sweep.start_hz = o.grid_start;
    if (o.stop_opt && o.stop_opt->count()) c.sweep.stop_hz = o.grid_stop;
    if (o.count_opt && o.count_opt->count()) c.sweep.count = o.grid_count;
    if (o.mode_opt && o.mode_opt->count()) c.sweep.mode = o.mode;
    c.validate();
}

std::vector<double> omega_grid(const config::RunConfig& c) {
    auto g = config::linear_grid(c.sweep.start_hz, c.sweep.stop_hz, c.sweep.count);
    for (double& v : g) v *= two_pi;
    return g;
}

std::string output_path(const config::RunConfig& c, const Options& o) {
    if (!o.out.empty()) return o.out;
    return c.output.value_or("");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("--out", "cannot write " + path);
    f << content;
    if (!f) throw DomainError("--out", "write failed for " + path);
}

// CSV goes to the file when one is named, else to `out`; the report then goes
// to `err` so that stdout stays machine-readable.
struct Sink {
    std::ostream& out;
    std::ostream& err;
    std::string path;
    std::ostream& report() const { return path.empty() ? err : out; }
};

std::string g(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

void report_scenario(std::ostream& r, const config::Scenario& s) {
    const double omega_m = s.mechanics.omega_m;
    r << "Omega_m/2pi        " << g(omega_m / two_pi) << " Hz\n"
      << "gamma_m            " << g(s.mechanics.gamma_m) << " rad/s\n"
      << "kappa_T            " << g(s.optics.kappa_t) << " rad/s\n"
      << "alpha_s            " << g(s.coupling.alpha_s) << "\n"
      << "G/Omega_m          " << g(s.coupling.g_coupling / omega_m) << "\n"
      << "Omega~_m/2pi       " << g(s.coupling.omega_m_tilde / two_pi) << " Hz\n"
      << "cooperativity      " << g(s.coupling.cooperativity) << "\n";
    if (s.dispersion)
        r << "dispersion slope   " << g(s.dispersion->slope) << " rad/(s m)\n"
          << "dispersion curv.   " << g(s.dispersion->curvature) << " rad/(s m^2)\n";
    if (s.thermal)
        r << "n_th               " << g(s.thermal->n_th) << "\n"
          << "C / n_th           "
          << g(model::quantum_storage_margin(s.coupling.cooperativity, s.thermal->n_th)) << "\n";
}

int cmd_respond(config::RunConfig c, const Options& o, std::ostream& out, std::ostream& err) {
    apply_sweep_overrides(c, o);
    const auto s = config::build_scenario(c);
    for (const auto& w : s.warnings) err << "warning: " << w << '\n';
    if (s.drive.delta != 0.0) {
        const auto st = response::stability_check(s.response, s.drive);
        if (!st.stable)
            throw PhysicsFailure("blue-sideband drive with C = " + g(s.coupling.cooperativity) +
                                 " >= 1 has no stable steady state");
    }
    const auto grid = omega_grid(c);
    const auto points = response::spectrum_sweep(s.response, s.drive, grid,
                                                 config::sweep_mode(c.sweep.mode));

    std::ostringstream text;
    csv::Writer w(text, {"omega_over_2pi_hz", "beat_modulus", "beat_phase_rad", "group_delay_s"});
    for (const auto& p : points) {
        const double row[] = {p.omega_probe_offset / two_pi, std::abs(p.a_beat), std::arg(p.a_beat),
                              p.group_delay};
        w.row(row);
    }
    Sink sink{out, err, output_path(c, o)};
    if (sink.path.empty()) {
        out << text.str();
    } else {
        write_file(sink.path, text.str());
        run_record::write(c, "respond", {sink.path});
    }
    auto& r = sink.report();
    report_scenario(r, s);
    if (s.drive.delta != 0.0) {
        const auto side = s.drive.delta > 0 ? response::Sideband::red : response::Sideband::blue;
        const double c_op = s.coupling.cooperativity;
        const double gm = s.mechanics.gamma_m;
        if (side == response::Sideband::red) {
            r << "gamma_eff          " << g(gm * (1 + c_op)) << " rad/s\n"
              << "tau_T max          " << g(response::tau_transmission_max(c_op, gm)) << " s\n"
              << "tau_R max          " << g(response::tau_reflection_max(c_op, gm, s.optics.eta))
              << " s\n";
        } else {
            r << "gamma_eff          " << g(gm * (1 - c_op)) << " rad/s\n"
              << "gain t_p           " << g(response::amplifier_gain(c_op, s.optics.eta_prime))
              << "\n";
        }
    }
    r << "points             " << points.size() << "\n";
    return exit_ok;
}

int cmd_dispersion(config::RunConfig c, const Options& o, std::ostream& out, std::ostream& err) {
    if (o.start_opt->count()) c.dispersion_grid.start_m = o.grid_start;
    if (o.stop_opt->count()) c.dispersion_grid.stop_m = o.grid_stop;
    if (o.count_opt->count()) c.dispersion_grid.count = o.grid_count;
    c.validate();
    const auto cavity = config::make_cavity(c);
    const auto grid = config::linear_grid(c.dispersion_grid.start_m, c.dispersion_grid.stop_m,
                                          c.dispersion_grid.count);
    const auto curve = dispersion::dispersion_curve(cavity, grid);

    std::ostringstream text;
    csv::Writer w(text, {"z0_m", "delta_omega_rad_s", "slope", "curvature"});
    for (std::size_t i = 0; i < curve.z0.size(); ++i) {
        const double row[] = {curve.z0[i], curve.delta_omega[i], curve.slope[i], curve.curvature[i]};
        w.row(row);
    }
    Sink sink{out, err, output_path(c, o)};
    if (sink.path.empty()) {
        out << text.str();
    } else {
        write_file(sink.path, text.str());
        run_record::write(c, "dispersion", {sink.path});
    }
    auto& r = sink.report();
    const auto loss = cavity.loss_diagnostic(c.membrane.z0_m);
    r << "membrane |r|^2     " << g(std::norm(cavity.slab_coefficients().r)) << "\n"
      << "cavity length      " << g(cavity.length()) << " m (mode " << cavity.mode_index() << ")\n"
      << "FSR                " << g(cavity.free_spectral_range()) << " rad/s\n"
      << "bulk shift         " << g(cavity.bulk_shift()) << " rad/s\n"
      << "linewidth at z0    " << g(loss.linewidth) << " rad/s (absorption share "
      << g(loss.absorption_rate) << ")\n"
      << "points             " << curve.z0.size() << "\n";
    return exit_ok;
}

int cmd_oracle(config::RunConfig c, const Options& o, std::ostream& out, std::ostream& err) {
    apply_sweep_overrides(c, o);
    const auto s = config::build_scenario(c);
    for (const auto& w : s.warnings) err << "warning: " << w << '\n';
    const auto m = config::oracle_model(c, s);
    const auto settings = config::oracle_settings(c);
    const auto mode = config::sweep_mode(c.sweep.mode);
    const auto grid = omega_grid(c);

    const auto results = oracle::oracle_sweep(m, s.drive, grid, mode, settings);
    std::ostringstream text;
    csv::Writer w(text, {"omega_over_2pi_hz", "oracle_re", "oracle_im", "analytic_re",
                         "analytic_im", "relative_deviation", "diverged", "growth_rate_per_s"});
    double worst = 0.0;
    std::size_t stable_points = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto analytic = response::beat_amplitude(m, response::drive_at(s.drive, grid[i], mode));
        const auto& res = results[i];
        const double dev = std::abs(res.beat_complex - analytic) / std::abs(analytic);
        if (!res.diverged) {
            ++stable_points;
            worst = std::max(worst, dev);
        }
        const double row[] = {grid[i] / two_pi, res.beat_complex.real(), res.beat_complex.imag(),
                              analytic.real(), analytic.imag(), dev,
                              res.diverged ? 1.0 : 0.0, res.growth_rate};
        w.row(row);
    }

    Sink sink{out, err, output_path(c, o)};
    std::vector<std::string> files;
    if (sink.path.empty()) {
        out << text.str();
    } else {
        write_file(sink.path, text.str());
        files.push_back(sink.path);
    }
    if (!o.trajectory.empty()) {
        const auto drive = response::drive_at(s.drive, grid.front(), mode);
        const double dt = settings.dt > 0 ? settings.dt : oracle::default_step(m, drive);
        const double t_end = settings.settle_gamma_eff /
                                 response::effective_linewidth_estimate(m, drive.delta) +
                             settings.window_periods * two_pi / std::fabs(grid.front());
        oracle::IntegrateOptions io;
        io.sample_stride = o.trajectory_stride;
        const auto traj = oracle::integrate(m, drive, t_end, dt, io);
        std::ostringstream tt;
        csv::Writer tw(tt, {"t_s", "q", "p", "a_re", "a_im"});
        for (std::size_t i = 0; i < traj.time.size(); ++i) {
            const auto& st = traj.states[i];
            const double row[] = {traj.time[i], st.q, st.p, st.a_re, st.a_im};
            tw.row(row);
        }
        write_file(o.trajectory, tt.str());
        files.push_back(o.trajectory);
    }
    if (!files.empty() && !sink.path.empty()) run_record::write(c, "oracle", files);

    auto& r = sink.report();
    r << "oracle gamma_m     " << g(m.gamma_m) << " rad/s\n"
      << "oracle C           " << g(m.cooperativity()) << "\n"
      << "exact growth rate  " << g(oracle::exact_growth_rate(m, s.drive.delta)) << " 1/s\n"
      << "stable points      " << stable_points << " of " << grid.size() << "\n";
    if (stable_points == 0) {
        r << "all points diverged\n";
        return exit_physics;
    }
    r << "max deviation      " << g(worst) << "\n";
    if (!(worst < 1e-3)) {
        err << "error: oracle deviates from the analytic response by " << g(worst)
            << " (limit 1e-3)\n";
        return exit_numerical;
    }
    return exit_ok;
}

int cmd_fit(config::RunConfig c, const Options& o, std::ostream& out, std::ostream& err) {
    if (o.mode_opt->count()) c.sweep.mode = o.mode;
    c.validate();
    const auto table = csv::read_file(o.spectrum);
    const long col_w = table.column("omega_over_2pi_hz");
    const long col_m = table.column("beat_modulus");
    if (col_w < 0 || col_m < 0)
        throw DomainError("csv", "columns omega_over_2pi_hz and beat_modulus are required");
    if (table.rows.empty()) throw DomainError("csv", "no data rows");
    const long col_p = c.fit.use_phase ? table.column("beat_phase_rad") : -1;
    const long col_s = table.column("sigma_modulus");
    const long col_sp = col_p >= 0 ? table.column("sigma_phase_rad") : -1;

    fit::SpectrumData data;
    for (const auto& row : table.rows) {
        data.omega.push_back(two_pi * row[static_cast<std::size_t>(col_w)]);
        data.modulus.push_back(row[static_cast<std::size_t>(col_m)]);
        if (col_p >= 0) data.phase.push_back(row[static_cast<std::size_t>(col_p)]);
        if (col_s >= 0) data.sigma.push_back(row[static_cast<std::size_t>(col_s)]);
        if (col_sp >= 0) data.sigma_phase.push_back(row[static_cast<std::size_t>(col_sp)]);
    }
    data.validate();

    const auto s = config::build_scenario(c);
    fit::FitModel fm;
    fm.base = s.response;
    fm.drive_template = s.drive;
    fm.mode = config::sweep_mode(c.sweep.mode);
    const auto mask = fit::FreeMask::from_names(c.fit.free);
    if (mask.count(data.has_phase()) == 0)
        throw DomainError("fit.free", "no free parameters for this data");
    fit::FitOptions options;
    options.restarts = c.fit.restarts;
    const auto seed = fit::initial_guess(data, fm, mask.free[fit::centre]);
    const auto result = fit::fit_spectrum(data, fm, seed, mask, options);

    const double omega_m = s.mechanics.omega_m;
    const double coop = model::cooperativity(result.values[fit::g_coupling],
                                             result.values[fit::kappa_t],
                                             result.values[fit::gamma_m]);
    std::ostringstream report, kv;
    report << "converged          " << (result.converged ? "true" : "false") << " ("
           << result.message << ")\n"
           << "iterations         " << result.iterations << "\n"
           << "points             " << data.size() << (data.has_phase() ? " (with phase)" : "")
           << "\n"
           << "chi2 reduced       " << g(result.chi2_reduced) << "\n";
    kv << "converged=" << (result.converged ? "true" : "false") << "\n"
       << "iterations=" << result.iterations << "\n"
       << "chi2_reduced=" << csv::format_number(result.chi2_reduced) << "\n"
       << "uncertainties_available=" << (result.uncertainties_available ? "true" : "false")
       << "\n";
    for (std::size_t k = 0; k < fit::param_count; ++k) {
        const bool used = mask.free[k] && (k != fit::phase_offset || data.has_phase());
        report << std::left << std::setw(19) << fit::param_names[k] << g(result.values[k]);
        if (used && result.uncertainties_available) report << " +- " << g(result.sigma[k]);
        report << (used ? "" : " (fixed)") << "\n";
        kv << fit::param_names[k] << "=" << csv::format_number(result.values[k]) << "\n";
        kv << fit::param_names[k] << "_free=" << (used ? "true" : "false") << "\n";
        if (used && result.uncertainties_available)
            kv << fit::param_names[k] << "_sigma=" << csv::format_number(result.sigma[k]) << "\n";
    }
    report << "|G|/Omega_m        " << g(result.values[fit::g_coupling] / omega_m) << "\n"
           << "cooperativity      " << g(coop) << "\n";
    if (!result.uncertainties_available)
        report << "uncertainties      unavailable (singular curvature)\n";
    kv << "g_over_omega_m=" << csv::format_number(result.values[fit::g_coupling] / omega_m) << "\n"
       << "cooperativity=" << csv::format_number(coop) << "\n";

    const std::string path = output_path(c, o);
    std::vector<std::string> files;
    if (!path.empty()) {
        write_file(path, report.str());
        files.push_back(path);
    }
    std::string kv_path = o.kv;
    if (kv_path.empty() && !path.empty()) kv_path = path + ".kv";
    if (!kv_path.empty()) {
        write_file(kv_path, kv.str());
        files.push_back(kv_path);
    }
    out << report.str();
    if (!files.empty()) run_record::write(c, "fit", files);
    if (!result.converged) {
        err << "error: fit did not converge: " << result.message << "\n";
        return exit_numerical;
    }
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optomechanically induced transparency toolkit: analytic response, "
                 "membrane dispersion, time-domain oracle and spectrum fitting.",
                 "omitlab"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 2 input error, 3 unstable operating point, "
               "4 numerical non-convergence or oracle deviation >= 1e-3.\n"
               "OMITLAB_THREADS caps the number of worker threads.");

    Options o;
    auto* respond = app.add_subcommand("respond", "Beat spectrum |A_beat|, phase and group delay vs probe offset (CSV)");
    add_common(respond, o, "Hz");
    add_mode(respond, o);

    Options od;
    auto* disp = app.add_subcommand("dispersion", "Cavity frequency shift and its derivatives vs membrane position (CSV)");
    add_common(disp, od, "m");

    Options oo;
    auto* orc = app.add_subcommand("oracle", "Time-domain integration compared against the analytic beat (CSV)");
    add_common(orc, oo, "Hz");
    add_mode(orc, oo);
    orc->add_option("--trajectory", oo.trajectory, "Also write the trajectory of the first grid point");
    orc->add_option("--trajectory-stride", oo.trajectory_stride, "Keep every n-th trajectory sample")
        ->check(CLI::PositiveNumber);

    Options of;
    auto* fitc = app.add_subcommand("fit", "Fit coupling, linewidth and scale to a spectrum CSV");
    fitc->add_option("--config", of.config, "Run config (JSON) or a previous run record")->required();
    fitc->add_option("--spectrum", of.spectrum, "Spectrum CSV (omega_over_2pi_hz, beat_modulus[, beat_phase_rad, sigma_modulus, sigma_phase_rad])")
        ->required();
    fitc->add_option("--out", of.out, "Text report path");
    fitc->add_option("--kv", of.kv, "Key=value result path (default <out>.kv)");
    add_mode(fitc, of);

    auto* version = app.add_subcommand("version", "Print the toolkit version");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*version) {
            out << "omitlab " << run_record::toolkit_version() << "\n";
            return exit_ok;
        }
        if (*respond) return cmd_respond(config::load(o.config), o, out, err);
        if (*disp) return cmd_dispersion(config::load(od.config), od, out, err);
        if (*orc) return cmd_oracle(config::load(oo.config), oo, out, err);
        if (*fitc) return cmd_fit(config::load(of.config), of, out, err);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const PhysicsFailure& e) {
        err << "error: " << e.what() << "\n";
        return exit_physics;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_input;
}

} // namespace omitlab::cli
