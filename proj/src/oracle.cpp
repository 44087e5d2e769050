#include "omitlab/oracle.hpp"

#include "omitlab/constants.hpp"
#include "omitlab/errors.hpp"
#include "omitlab/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace omitlab::oracle {

namespace {

using constants::two_pi;

struct Rates {
    double omega_m;
    double spring; // Omega~_m^2 / Omega_m
    double gamma_m;
    double kappa;
    double delta;
    double g_half; // G / sqrt(2)
    double omega;
    complex drive; // sqrt(2 kappa0) s_p
};

ClassicalState derivative(const Rates& r, double t, const ClassicalState& s) {
    const complex probe = r.drive * std::exp(complex(0.0, -r.omega * t));
    ClassicalState d;
    d.q = r.omega_m * s.p;
    d.p = -r.spring * s.q - r.gamma_m * s.p + 2.0 * r.g_half * s.a_re;
    d.a_re = -r.kappa * s.a_re + r.delta * s.a_im + probe.real();
    d.a_im = -r.kappa * s.a_im - r.delta * s.a_re + r.g_half * s.q + probe.imag();
    return d;
}

ClassicalState axpy(const ClassicalState& s, double h, const ClassicalState& d) {
    return {s.q + h * d.q, s.p + h * d.p, s.a_re + h * d.a_re, s.a_im + h * d.a_im};
}

double fastest_rate(const response::ResponseModel& m, const model::DriveConfig& drive) {
    return std::max({m.omega_m, m.kappa_t(), std::fabs(drive.delta),
                     std::fabs(drive.probe_offset)});
}

// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

} // namespace

double ClassicalState::norm() const {
    return std::sqrt(q * q + p * p + a_re * a_re + a_im * a_im);
}

double max_stable_step(const response::ResponseModel& m, const model::DriveConfig& drive) {
    return two_pi / (50.0 * fastest_rate(m, drive));
}

double default_step(const response::ResponseModel& m, const model::DriveConfig& drive) {
    return two_pi / (200.0 * fastest_rate(m, drive));
}

Trajectory integrate(const response::ResponseModel& m, const model::DriveConfig& drive,
                     double t_end, double dt, const IntegrateOptions& options) {
    if (!(m.omega_m > 0.0)) throw DomainError("omega_m", "must be positive");
    if (!(m.kappa_t() > 0.0)) throw DomainError("kappa_t", "must be positive");
    if (!(dt > 0.0)) throw DomainError("dt", "must be positive");
    if (dt > max_stable_step(m, drive) * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "step " << dt << " s exceeds 2 pi / (50 max rate) = " << max_stable_step(m, drive)
            << " s";
        throw DomainError("dt", msg.str());
    }
    if (!(t_end > 0.0)) throw DomainError("t_end", "must be positive");
    if (options.sample_stride == 0) throw DomainError("sample_stride", "must be >= 1");

    const auto local = response::at_detuning(m, drive.delta);
    const Rates r{m.omega_m,
                  local.omega_m_tilde * local.omega_m_tilde / m.omega_m,
                  m.gamma_m,
                  m.kappa_t(),
                  drive.delta,
                  local.g_coupling / std::sqrt(2.0),
                  drive.probe_offset,
                  std::sqrt(2.0 * m.kappa0) * drive.probe_amp};

    double scale = std::abs(r.drive) / r.kappa;
    if (scale == 0.0) scale = options.initial.norm();
    if (scale == 0.0) scale = 1.0;
    const double hard_limit = 1e12 * scale;

    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double block_length = 3.0 * two_pi / m.omega_m;
    std::vector<double> block_time;
    std::vector<double> block_max;
    double current_max = 0.0;
    std::size_t current_block = 0;

    Trajectory traj;
    traj.dt = dt;
    ClassicalState s = options.initial;
    const auto record = [&](std::size_t i, double t) {
        if (t >= options.record_from && i % options.sample_stride == 0) {
            traj.time.push_back(t);
            traj.states.push_back(s);
        }
    };
    record(0, 0.0);

    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const auto k1 = derivative(r, t, s);
        const auto k2 = derivative(r, t + 0.5 * dt, axpy(s, 0.5 * dt, k1));
        const auto k3 = derivative(r, t + 0.5 * dt, axpy(s, 0.5 * dt, k2));
        const auto k4 = derivative(r, t + dt, axpy(s, dt, k3));
        s.q += dt / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
        s.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
        s.a_re += dt / 6.0 * (k1.a_re + 2 * k2.a_re + 2 * k3.a_re + k4.a_re);
        s.a_im += dt / 6.0 * (k1.a_im + 2 * k2.a_im + 2 * k3.a_im + k4.a_im);

        const double t_next = static_cast<double>(i + 1) * dt;
        record(i + 1, t_next);
        traj.t_end = t_next;

        const double n = s.norm();
        if (!std::isfinite(n) || n > hard_limit) {
            traj.diverged = true;
            traj.hit_hard_limit = true;
            break;
        }
        const auto block = static_cast<std::size_t>(t_next / block_length);
        if (block != current_block) {
            block_time.push_back((static_cast<double>(current_block) + 0.5) * block_length);
            block_max.push_back(current_max);
            current_block = block;
            current_max = 0.0;
        }
        current_max = std::max(current_max, n);
    }

    // Growth analysis over complete blocks in the second half of the run.
    std::vector<double> xs, ys;
    for (std::size_t b = 0; b < block_time.size(); ++b) {
        if (block_time[b] < 0.5 * traj.t_end || !(block_max[b] > 0.0)) continue;
        xs.push_back(block_time[b]);
        ys.push_back(std::log(block_max[b]));
    }
    if (xs.size() >= 3) {
        traj.growth_rate = fitted_slope(xs, ys);
        const std::size_t k = ys.size();
        const bool rising = ys[k - 1] > ys[k - 2] && ys[k - 2] > ys[k - 3];
        if (traj.growth_rate * 0.5 * traj.t_end > 3.0 && rising) traj.diverged = true;
    } else if (traj.hit_hard_limit && block_max.size() >= 2) {
        std::vector<double> all_y;
        for (double v : block_max) all_y.push_back(std::log(std::max(v, 1e-300)));
        traj.growth_rate = fitted_slope(block_time, all_y);
    }
    return traj;
}

DemodResult demodulate_signal(std::span<const double> time, std::span<const complex> signal,
                              double omega, double window) {
    if (time.size() != signal.size()) throw DomainError("signal", "length differs from time");
    if (omega == 0.0) throw DomainError("omega", "demodulation frequency must be non-zero");
    const double period = two_pi / std::fabs(omega);
    if (window < 20.0 * period * (1.0 - 1e-9)) {
        std::ostringstream msg;
        msg << "window " << window << " s is shorter than 20 periods (" << 20.0 * period
            << " s)";
        throw DomainError("window", msg.str());
    }
    if (time.empty()) throw DomainError("window", "no samples");
    const double t_last = time.back();
    const double t_first = t_last - window;
    if (time.front() > t_first + 1e-9 * window)
        throw DomainError("window", "extends before the first recorded sample");

    const auto begin = std::lower_bound(time.begin(), time.end(), t_first - 1e-12 * window);
    const auto offset = static_cast<std::size_t>(begin - time.begin());
    const std::size_t n = time.size() - offset;
    if (n < 6) throw DomainError("window", "too few samples");

    Eigen::MatrixXd design(n, 3);
    Eigen::MatrixXd values(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = time[offset + i];
        design(i, 0) = std::cos(omega * t);
        design(i, 1) = std::sin(omega * t);
        design(i, 2) = 1.0;
        values(i, 0) = signal[offset + i].real();
        values(i, 1) = signal[offset + i].imag();
    }
    const Eigen::MatrixXd coef = design.colPivHouseholderQr().solve(values);
    const complex c_cos(coef(0, 0), coef(0, 1));
    const complex c_sin(coef(1, 0), coef(1, 1));

    const Eigen::MatrixXd tone = design.leftCols(2) * coef.topRows(2);
    const Eigen::MatrixXd misfit = values - design * coef;
    const double tone_rms = std::sqrt(tone.squaredNorm() / static_cast<double>(n));
    const double misfit_rms = std::sqrt(misfit.squaredNorm() / static_cast<double>(n));

    DemodResult out;
    out.a_minus = 0.5 * (c_cos + complex(0.0, 1.0) * c_sin);
    out.a_plus = 0.5 * (c_cos - complex(0.0, 1.0) * c_sin);
    out.beat_complex = out.a_minus;
    out.residual = tone_rms > 0.0 ? misfit_rms / tone_rms : misfit_rms;
    return out;
}

DemodResult demodulate(const Trajectory& trajectory, double omega, double window,
                       complex beat_scale) {
    std::vector<complex> field;
    field.reserve(trajectory.states.size());
    for (const auto& s : trajectory.states) field.push_back(s.field());
    auto out = demodulate_signal(trajectory.time, field, omega, window);
    out.beat_complex = beat_scale * out.a_minus;
    out.diverged = trajectory.diverged;
    out.growth_rate = trajectory.growth_rate;
    return out;
}

DemodResult oracle_point(const response::ResponseModel& m, const model::DriveConfig& drive,
                         const OracleSettings& settings) {
    if (drive.probe_offset == 0.0)
        throw DomainError("probe_offset", "oracle needs a non-zero probe offset");
    if (!(settings.settle_gamma_eff > 0.0))
        throw DomainError("settle_gamma_eff", "must be positive");
    if (!(settings.window_periods >= 20.0))
        throw DomainError("window_periods", "must be at least 20");

    const double dt = settings.dt > 0.0 ? settings.dt : default_step(m, drive);
    const double gamma_eff = response::effective_linewidth_estimate(m, drive.delta);
    const double settle = settings.settle_gamma_eff / gamma_eff;
    const double window = settings.window_periods * two_pi / std::fabs(drive.probe_offset);

    IntegrateOptions options;
    options.record_from = settle - 2.0 * dt;
    const auto traj = integrate(m, drive, settle + window, dt, options);

    const auto local = response::at_detuning(m, drive.delta);
    const double probe = std::abs(drive.probe_amp);
    const complex reference = probe > 0.0 ? std::conj(drive.probe_amp) / probe : complex{1.0};
    const complex scale = 2.0 * m.kappa2 * local.alpha_s * reference;

    if (traj.hit_hard_limit) {
        DemodResult out;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.beat_complex = out.a_minus = out.a_plus = complex(nan, nan);
        out.residual = nan;
        out.diverged = true;
        out.growth_rate = traj.growth_rate;
        return out;
    }
    return demodulate(traj, drive.probe_offset, window, scale);
}

std::vector<DemodResult> oracle_sweep(const response::ResponseModel& m,
                                      const model::DriveConfig& drive_template,
                                      std::span<const double> omega_grid,
                                      response::SweepMode mode, const OracleSettings& settings) {
    if (omega_grid.empty()) throw DomainError("omega_grid", "must not be empty");
    for (std::size_t i = 1; i < omega_grid.size(); ++i)
        if (!(omega_grid[i] > omega_grid[i - 1]))
            throw DomainError("omega_grid", "must be strictly increasing");
    return parallel_map<DemodResult>(omega_grid.size(), [&](std::size_t i) {
        return oracle_point(m, response::drive_at(drive_template, omega_grid[i], mode),
                            settings);
    });
}

double exact_growth_rate(const response::ResponseModel& m, double delta) {
    const auto local = response::at_detuning(m, delta);
    const double g_half = local.g_coupling / std::sqrt(2.0);
    Eigen::Matrix4d a;
    a << 0.0, m.omega_m, 0.0, 0.0,
        -local.omega_m_tilde * local.omega_m_tilde / m.omega_m, -m.gamma_m, 2.0 * g_half, 0.0,
        0.0, 0.0, -m.kappa_t(), delta,
        g_half, 0.0, -delta, -m.kappa_t();
    const Eigen::EigenSolver<Eigen::Matrix4d> solver(a, false);
    return solver.eigenvalues().real().maxCoeff();
}

} // namespace omitlab::oracle
