#include "omitlab/fit.hpp"

#include "omitlab/constants.hpp"
#include "omitlab/errors.hpp"
#include "omitlab/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace omitlab::fit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ResidualFn = std::function<VectorXd(const VectorXd&)>;

double wrap_phase(double x) { return std::remainder(x, constants::two_pi); }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

struct LmOutcome {
    VectorXd u;
    double objective = std::numeric_limits<double>::infinity();
    MatrixXd jtj;
    bool converged = false;
    int iterations = 0;
    std::string message;
    std::vector<double> history;
};

// Objective and residuals, or nothing when the model cannot be evaluated there.
std::optional<VectorXd> try_residual(const ResidualFn& f, const VectorXd& u) {
    try {
        VectorXd r = f(u);
        if (!r.allFinite()) return std::nullopt;
        return r;
    } catch (const NumericalError&) {
        return std::nullopt;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

MatrixXd jacobian(const ResidualFn& f, const VectorXd& u, const VectorXd& r0, double h) {
    MatrixXd j(r0.size(), u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        VectorXd up = u, dn = u;
        up[k] += h;
        dn[k] -= h;
        const auto rp = try_residual(f, up);
        const auto rm = try_residual(f, dn);
        if (rp && rm) {
            j.col(k) = (*rp - *rm) / (2.0 * h);
        } else if (rp) {
            j.col(k) = (*rp - r0) / h;
        } else if (rm) {
            j.col(k) = (r0 - *rm) / h;
        } else {
            throw NumericalError("jacobian: model undefined on both sides of parameter " +
                                 std::to_string(k));
        }
    }
    return j;
}

// Internal coordinates are logarithmic or scaled to order one.
constexpr double step_tolerance = 1e-9;

LmOutcome levenberg_marquardt(const ResidualFn& f, VectorXd u, const FitOptions& options) {
    LmOutcome out;
    auto r = try_residual(f, u);
    if (!r) throw DomainError("initial", "model cannot be evaluated at the initial parameters");
    double objective = r->squaredNorm();
    double lambda = 1e-3;

    for (int it = 0; it < options.max_iterations; ++it) {
        out.iterations = it + 1;
        const MatrixXd j = jacobian(f, u, *r, options.fd_step);
        const MatrixXd jtj = j.transpose() * j;
        const VectorXd grad = j.transpose() * *r;
        out.jtj = jtj;

        bool accepted = false;
        while (!accepted) {
            MatrixXd damped = jtj;
            for (Eigen::Index k = 0; k < damped.rows(); ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
            const VectorXd step = damped.ldlt().solve(-grad);
            const VectorXd trial = u + step;
            const auto rt = step.allFinite() ? try_residual(f, trial) : std::nullopt;
            const double trial_objective = rt ? rt->squaredNorm() : HUGE_VAL;
            if (trial_objective < objective) {
                const double change = (objective - trial_objective) / std::max(objective, 1e-300);
                u = trial;
                r = rt;
                objective = trial_objective;
                out.history.push_back(objective);
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                // The objective flattens before the parameters settle; also
                // require a small step so equivalent fits end at the same point.
                if ((change < options.relative_tolerance &&
                     step.cwiseAbs().maxCoeff() < step_tolerance) ||
                    objective < 1e-28 * static_cast<double>(r->size())) {
                    out.converged = true;
                    out.message = "relative objective change below tolerance";
                }
            } else {
                lambda *= 10.0;
                if (lambda > 1e12) {
                    out.converged = true;
                    out.message = "no further descent; stationary point";
                    break;
                }
            }
        }
        if (out.converged) break;
    }
    if (!out.converged) out.message = "iteration limit reached";
    out.u = u;
    out.objective = objective;
    // Curvature at the final point.
    out.jtj = [&] {
        const MatrixXd j = jacobian(f, u, *r, options.fd_step);
        return MatrixXd(j.transpose() * j);
    }();
    return out;
}

// Inverse of J^T J, or nothing when numerically singular.
std::optional<MatrixXd> inverse_curvature(const MatrixXd& jtj) {
    if (jtj.size() == 0) return std::nullopt;
    // Scale to unit diagonal before judging the conditioning.
    VectorXd d = jtj.diagonal().cwiseAbs().cwiseSqrt();
    if ((d.array() <= 0.0).any()) return std::nullopt;
    const MatrixXd scaled = d.asDiagonal().inverse() * jtj * d.asDiagonal().inverse();
    Eigen::JacobiSVD<MatrixXd> svd(scaled);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) < 1e-12 * s(0)) return std::nullopt;
    const MatrixXd inv = scaled.inverse();
    return MatrixXd(d.asDiagonal().inverse() * inv * d.asDiagonal().inverse());
}

bool is_log_param(std::size_t k) {
    return k == g_coupling || k == kappa_t || k == gamma_m || k == scale;
}

// Per-dataset residual weights.
struct Weights {
    std::vector<double> modulus;
    std::vector<double> phase;
    bool sigma_given = false;
};

Weights make_weights(const SpectrumData& d) {
    Weights w;
    w.sigma_given = !d.sigma.empty();
    if (w.sigma_given) {
        w.modulus = d.sigma;
    } else {
        std::vector<double> mags(d.modulus.begin(), d.modulus.end());
        for (double& v : mags) v = std::fabs(v);
        const double norm = median(mags);
        w.modulus.assign(d.size(), norm > 0.0 ? norm : 1.0);
    }
    if (d.has_phase()) {
        if (!d.sigma_phase.empty()) w.phase = d.sigma_phase;
        else w.phase.assign(d.size(), 1.0);
    }
    return w;
}

void append_residuals(const SpectrumData& d, const Weights& w, const FitModel& model,
                      const ParamVector& p, VectorXd& r, Eigen::Index& at) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        const complex v = model.evaluate(p, d.omega[i]);
        r[at++] = (std::abs(v) - d.modulus[i]) / w.modulus[i];
        if (d.has_phase()) r[at++] = wrap_phase(std::arg(v) - d.phase[i]) / w.phase[i];
    }
}

Eigen::Index residual_count(const SpectrumData& d) {
    return static_cast<Eigen::Index>(d.size() * (d.has_phase() ? 2 : 1));
}

} // namespace

void SpectrumData::validate() const {
    if (omega.empty()) throw DomainError("spectrum", "no data points");
    if (modulus.size() != omega.size())
        throw DomainError("spectrum", "modulus and grid lengths differ");
    if (!phase.empty() && phase.size() != omega.size())
        throw DomainError("spectrum", "phase and grid lengths differ");
    if (!sigma.empty() && sigma.size() != omega.size())
        throw DomainError("spectrum", "sigma and grid lengths differ");
    if (!sigma_phase.empty() && sigma_phase.size() != omega.size())
        throw DomainError("spectrum", "sigma_phase and grid lengths differ");
    if (!sigma_phase.empty() && phase.empty())
        throw DomainError("spectrum", "sigma_phase given without phase");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!std::isfinite(omega[i]) || !std::isfinite(modulus[i]))
            throw DomainError("spectrum", "non-finite value at row " + std::to_string(i));
        if (i > 0 && !(omega[i] > omega[i - 1]))
            throw DomainError("spectrum", "grid is not strictly increasing");
        if (!phase.empty() && !std::isfinite(phase[i]))
            throw DomainError("spectrum", "non-finite phase at row " + std::to_string(i));
        if (!sigma.empty() && !(sigma[i] > 0.0))
            throw DomainError("spectrum", "sigma must be positive");
        if (!sigma_phase.empty() && !(sigma_phase[i] > 0.0))
            throw DomainError("spectrum", "sigma_phase must be positive");
    }
}

std::size_t FreeMask::count(bool with_phase) const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < param_count; ++k)
        if (free[k] && (k != phase_offset || with_phase)) ++n;
    return n;
}

FreeMask FreeMask::from_names(std::span<const std::string> names) {
    FreeMask mask;
    mask.free.fill(false);
    for (const auto& name : names) {
        const auto it = std::find_if(param_names.begin(), param_names.end(),
                                     [&](const char* p) { return name == p; });
        if (it == param_names.end()) throw DomainError("fit.free", "unknown parameter " + name);
        mask.free[static_cast<std::size_t>(it - param_names.begin())] = true;
    }
    return mask;
}

ParamVector FitModel::nominal() const {
    return {std::fabs(base.g_coupling), base.kappa_t(), base.gamma_m, 1.0, 0.0,
            base.omega_m_tilde()};
}

response::ResponseModel FitModel::with(const ParamVector& p) const {
    response::ResponseModel m = base;
    const double split = base.kappa_t() > 0.0 ? base.kappa0 / base.kappa_t() : 0.5;
    m.g_coupling = p[g_coupling];
    m.kappa0 = split * p[kappa_t];
    m.kappa2 = (1.0 - split) * p[kappa_t];
    m.gamma_m = p[gamma_m];
    m.h_shift = (p[centre] * p[centre] - m.omega_m * m.omega_m) / m.omega_m;
    return m;
}

complex FitModel::evaluate(const ParamVector& p, double omega) const {
    const auto m = with(p);
    auto drive = drive_template;
    if (std::abs(drive.probe_amp) == 0.0) drive.probe_amp = 1.0;
    const complex beat = response::beat_amplitude(m, response::drive_at(drive, omega, mode));
    const auto local = response::at_detuning(m, drive.delta);
    const double bare = 2.0 * m.kappa2 * local.alpha_s * std::sqrt(2.0 * m.kappa0) *
                        std::abs(drive.probe_amp) / m.kappa_t();
    if (!(bare > 0.0)) throw DomainError("fit", "reference beat vanishes (alpha_s or kappa2 = 0)");
    return p[scale] * std::polar(1.0, p[phase_offset]) * beat / bare;
}

SpectrumData synthesize(const FitModel& model, const ParamVector& p, std::span<const double> grid,
                        bool with_phase) {
    SpectrumData d;
    d.omega.assign(grid.begin(), grid.end());
    for (double w : grid) {
        const complex v = model.evaluate(p, w);
        d.modulus.push_back(std::abs(v));
        if (with_phase) d.phase.push_back(std::arg(v));
    }
    return d;
}

FitResult fit_spectrum(const SpectrumData& data, const FitModel& model, const ParamVector& initial,
                       const FreeMask& mask, const FitOptions& options) {
    data.validate();
    const bool with_phase = data.has_phase();
    const std::size_t n_free = mask.count(with_phase);
    if (n_free == 0) throw DomainError("fit.free", "no free parameters");
    if (data.size() < 3 * n_free) {
        std::ostringstream msg;
        msg << data.size() << " points for " << n_free << " free parameters (need >= 3x)";
        throw DomainError("spectrum", msg.str());
    }
    if (options.restarts < 1 || options.restarts > 5)
        throw DomainError("fit.restarts", "must be between 1 and 5");

    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < param_count; ++k)
        if (mask.free[k] && (k != phase_offset || with_phase)) index.push_back(k);

    const Weights weights = make_weights(data);
    ParamVector start = initial;
    start[g_coupling] = std::fabs(start[g_coupling]);
    for (std::size_t k : index)
        if (is_log_param(k) && !(start[k] > 0.0))
            throw DomainError(param_names[k], "initial value must be positive");
    const double centre_unit = std::max(start[gamma_m], 1e-12);

    const auto run = [&](const ParamVector& seed) {
        const auto to_params = [&](const VectorXd& u) {
            ParamVector p = seed;
            for (std::size_t j = 0; j < index.size(); ++j) {
                const std::size_t k = index[j];
                const double x = u[static_cast<Eigen::Index>(j)];
                if (is_log_param(k)) p[k] = std::exp(x);
                else if (k == centre) p[k] = seed[centre] + centre_unit * x;
                else p[k] = x;
            }
            return p;
        };
        VectorXd u0(static_cast<Eigen::Index>(index.size()));
        for (std::size_t j = 0; j < index.size(); ++j) {
            const std::size_t k = index[j];
            u0[static_cast<Eigen::Index>(j)] =
                is_log_param(k) ? std::log(seed[k]) : (k == centre ? 0.0 : seed[k]);
        }
        const ResidualFn f = [&](const VectorXd& u) {
            VectorXd r(residual_count(data));
            Eigen::Index at = 0;
            append_residuals(data, weights, model, to_params(u), r, at);
            return r;
        };
        const auto lm = levenberg_marquardt(f, u0, options);

        FitResult result;
        result.mask = mask;
        result.values = to_params(lm.u);
        result.objective = lm.objective;
        result.converged = lm.converged;
        result.iterations = lm.iterations;
        result.message = lm.message;
        result.objective_history = lm.history;
        const double dof =
            static_cast<double>(residual_count(data)) - static_cast<double>(index.size());
        result.chi2_reduced = dof > 0 ? lm.objective / dof : 0.0;
        if (const auto cov = inverse_curvature(lm.jtj)) {
            const double factor = weights.sigma_given ? 1.0 : result.chi2_reduced;
            result.uncertainties_available = true;
            for (std::size_t j = 0; j < index.size(); ++j) {
                const std::size_t k = index[j];
                const auto jj = static_cast<Eigen::Index>(j);
                const double su = std::sqrt(std::max((*cov)(jj, jj) * factor, 0.0));
                if (is_log_param(k)) result.sigma[k] = result.values[k] * su;
                else if (k == centre) result.sigma[k] = centre_unit * su;
                else result.sigma[k] = su;
            }
        }
        return result;
    };

    static constexpr std::array<double, 5> factors = {1.0, 0.5, 2.0, 0.8, 1.25};
    FitResult best;
    bool have = false;
    for (int s = 0; s < options.restarts; ++s) {
        ParamVector seed = start;
        if (mask.free[g_coupling]) seed[g_coupling] *= factors[static_cast<std::size_t>(s)];
        if (mask.free[gamma_m]) seed[gamma_m] *= factors[static_cast<std::size_t>(s)];
        FitResult r;
        try {
            r = run(seed);
        } catch (const DomainError&) {
            if (s == 0) throw;
            continue;
        } catch (const NumericalError&) {
            if (s == 0) throw;
            continue;
        }
        if (!have || r.objective < best.objective) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

JointResult fit_joint(std::span<const SpectrumData> data, std::span<const FitModel> models,
                      std::span<const ParamVector> initial, bool fit_kappa,
                      const FitOptions& options) {
    const std::size_t sets = data.size();
    if (sets == 0) throw DomainError("spectrum", "no datasets");
    if (models.size() != sets || initial.size() != sets)
        throw DomainError("spectrum", "datasets, models and seeds differ in number");
    std::vector<Weights> weights;
    Eigen::Index rows = 0;
    for (const auto& d : data) {
        d.validate();
        weights.push_back(make_weights(d));
        rows += residual_count(d);
    }

    // Layout: [log kappa_T]?, log gamma_m, then per set log G, log S, [phi0]?
    const Eigen::Index shared = fit_kappa ? 2 : 1;
    std::vector<Eigen::Index> offset(sets);
    Eigen::Index cols = shared;
    for (std::size_t s = 0; s < sets; ++s) {
        offset[s] = cols;
        cols += data[s].has_phase() ? 3 : 2;
    }
    if (rows < 3 * cols) throw DomainError("spectrum", "too few points for the joint fit");

    VectorXd u0(cols);
    if (fit_kappa) u0[0] = std::log(initial[0][kappa_t]);
    u0[shared - 1] = std::log(initial[0][gamma_m]);
    for (std::size_t s = 0; s < sets; ++s) {
        u0[offset[s]] = std::log(std::fabs(initial[s][g_coupling]));
        u0[offset[s] + 1] = std::log(initial[s][scale]);
        if (data[s].has_phase()) u0[offset[s] + 2] = initial[s][phase_offset];
    }
    const auto params_for = [&](const VectorXd& u, std::size_t s) {
        ParamVector p = initial[s];
        if (fit_kappa) p[kappa_t] = std::exp(u[0]);
        p[gamma_m] = std::exp(u[shared - 1]);
        p[g_coupling] = std::exp(u[offset[s]]);
        p[scale] = std::exp(u[offset[s] + 1]);
        if (data[s].has_phase()) p[phase_offset] = u[offset[s] + 2];
        return p;
    };
    const ResidualFn f = [&](const VectorXd& u) {
        VectorXd r(rows);
        Eigen::Index at = 0;
        for (std::size_t s = 0; s < sets; ++s)
            append_residuals(data[s], weights[s], models[s], params_for(u, s), r, at);
        return r;
    };
    const auto lm = levenberg_marquardt(f, u0, options);

    JointResult out;
    out.converged = lm.converged;
    out.iterations = lm.iterations;
    out.message = lm.message;
    out.chi2_reduced = rows > cols ? lm.objective / static_cast<double>(rows - cols) : 0.0;
    out.kappa_t = fit_kappa ? std::exp(lm.u[0]) : initial[0][kappa_t];
    out.gamma_m = std::exp(lm.u[shared - 1]);
    for (std::size_t s = 0; s < sets; ++s) {
        out.g_coupling.push_back(std::exp(lm.u[offset[s]]));
        out.scale.push_back(std::exp(lm.u[offset[s] + 1]));
    }
    out.g_sigma.assign(sets, 0.0);
    const bool sigma_given = std::all_of(weights.begin(), weights.end(),
                                         [](const Weights& w) { return w.sigma_given; });
    if (const auto cov = inverse_curvature(lm.jtj)) {
        const double factor = sigma_given ? 1.0 : out.chi2_reduced;
        const auto sd = [&](Eigen::Index k) { return std::sqrt(std::max((*cov)(k, k) * factor, 0.0)); };
        out.uncertainties_available = true;
        if (fit_kappa) out.kappa_t_sigma = out.kappa_t * sd(0);
        out.gamma_m_sigma = out.gamma_m * sd(shared - 1);
        for (std::size_t s = 0; s < sets; ++s) out.g_sigma[s] = out.g_coupling[s] * sd(offset[s]);
    }
    return out;
}

ParamVector initial_guess(const SpectrumData& data, const FitModel& model, bool seed_centre) {
    data.validate();
    const std::size_t n = data.size();
    if (n < 7) throw DomainError("spectrum", "at least 7 points are needed to seed a fit");
    const auto& y = data.modulus;

    const std::size_t edge = std::max<std::size_t>(2, n / 20);
    double baseline = 0.0;
    for (std::size_t i = 0; i < edge; ++i) baseline += y[i] + y[n - 1 - i];
    baseline /= static_cast<double>(2 * edge);

    // Robust noise level from second differences.
    std::vector<double> d2;
    for (std::size_t i = 1; i + 1 < n; ++i) d2.push_back(y[i + 1] - 2.0 * y[i] + y[i - 1]);
    const double centre_d2 = median(d2);
    for (double& v : d2) v = std::fabs(v - centre_d2);
    const double noise = 1.4826 * median(d2) / std::sqrt(6.0);

    std::size_t ext = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs(y[i] - baseline) > std::fabs(y[ext] - baseline)) ext = i;
    const double depth = y[ext] - baseline;
    if (!(std::fabs(depth) > 3.0 * noise + 1e-9 * std::fabs(baseline))) {
        std::ostringstream msg;
        msg << "featureless spectrum: largest excursion " << std::fabs(depth)
            << " is within 3 sigma of the noise (" << noise << ")";
        throw DomainError("spectrum", msg.str());
    }
    const bool peak = depth > 0.0;

    const double level_sq = 0.5 * (baseline * baseline + y[ext] * y[ext]);
    const auto crossing = [&](int dir) -> std::optional<double> {
        for (std::size_t i = ext;;) {
            const std::size_t j = dir > 0 ? i + 1 : i - 1;
            if ((dir > 0 && j >= n) || (dir < 0 && i == 0)) return std::nullopt;
            const double fi = y[i] * y[i] - level_sq;
            const double fj = y[j] * y[j] - level_sq;
            if ((fi < 0) != (fj < 0) || fj == 0.0) {
                const double t = fi / (fi - fj);
                return data.omega[i] + t * (data.omega[j] - data.omega[i]);
            }
            i = j;
        }
    };
    const auto left = crossing(-1);
    const auto right = crossing(+1);
    double fwhm;
    if (left && right) fwhm = *right - *left;
    else if (left) fwhm = 2.0 * (data.omega[ext] - *left);
    else if (right) fwhm = 2.0 * (*right - data.omega[ext]);
    else fwhm = data.omega.back() - data.omega.front();

    ParamVector p = model.nominal();
    if (model.mode == response::SweepMode::fixed_delta) {
        // |A|^2 ~ 1 / (kappa^2 + (Delta - w)^2) away from the window.
        const double d1 = model.drive_template.delta - data.omega.front();
        const double d2v = model.drive_template.delta - data.omega.back();
        const double m1 = y.front() * y.front(), m2 = y.back() * y.back();
        const double k2 = (m2 * d2v * d2v - m1 * d1 * d1) / (m1 - m2);
        if (std::isfinite(k2) && k2 > 0.0 && std::fabs(m1 - m2) > 1e-3 * std::max(m1, m2))
            p[kappa_t] = std::sqrt(k2);
    }
    const double gamma = p[gamma_m];
    const double ratio = fwhm / gamma;
    const double coop = std::max(peak ? 1.0 - ratio : ratio - 1.0, 1e-2);
    p[g_coupling] = std::sqrt(coop * 2.0 * p[kappa_t] * gamma);
    if (seed_centre) p[centre] = std::fabs(data.omega[ext]);
    p[scale] = 1.0;
    p[phase_offset] = 0.0;

    std::vector<double> ratios;
    double s_sin = 0.0, s_cos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const complex v = model.evaluate(p, data.omega[i]);
        if (std::abs(v) > 0.0) ratios.push_back(y[i] / std::abs(v));
        if (data.has_phase()) {
            const double dphi = wrap_phase(data.phase[i] - std::arg(v));
            s_sin += std::sin(dphi);
            s_cos += std::cos(dphi);
        }
    }
    p[scale] = median(ratios);
    if (!(p[scale] > 0.0)) p[scale] = 1.0;
    if (data.has_phase()) p[phase_offset] = std::atan2(s_sin, s_cos);
    return p;
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SpectrumData add_noise(const SpectrumData& clean, double relative_noise, double phase_noise,
                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectrumData d = clean;
    for (std::size_t i = 0; i < d.size(); ++i) {
        d.modulus[i] *= 1.0 + relative_noise * normal(rng);
        if (d.has_phase()) d.phase[i] = wrap_phase(d.phase[i] + phase_noise * normal(rng));
    }
    return d;
}

std::vector<FitResult> monte_carlo(const FitModel& model, const MonteCarloSpec& spec) {
    if (spec.replicas < 1) throw DomainError("replicas", "must be >= 1");
    const auto clean = synthesize(model, spec.truth, spec.grid, spec.with_phase);
    return parallel_map<FitResult>(static_cast<std::size_t>(spec.replicas), [&](std::size_t i) {
        const auto noisy = add_noise(clean, spec.relative_noise, spec.phase_noise,
                                     replica_seed(spec.seed, i));
        return fit_spectrum(noisy, model, initial_guess(noisy, model, spec.mask.free[centre]),
                            spec.mask, spec.options);
    });
}

} // namespace omitlab::fit
