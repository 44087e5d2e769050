#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "omitlab/errors.hpp"
#include "omitlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace omitlab;
using namespace omitlab::fit;

namespace {

const double omega_m = 2 * M_PI * 355.6e3;
constexpr double kappa_half = 4.25e4;

FitModel make_model(double q, double coop, double delta_sign = 1.0) {
    FitModel f;
    auto& m = f.base;
    m.omega_m = omega_m;
    m.gamma_m = omega_m / q;
    m.kappa0 = kappa_half;
    m.kappa2 = kappa_half;
    m.g_coupling = std::sqrt(2 * m.kappa_t() * m.gamma_m * coop);
    m.alpha_s = 1e4;
    m.delta_ref = delta_sign * omega_m;
    f.drive_template = {1e-3, delta_sign * omega_m, {1e5, 0.0}, delta_sign * omega_m};
    return f;
}

std::vector<double> window_grid(const FitModel& f, double half_span_gamma_eff, int n, double sign = 1.0) {
    const double c = f.base.cooperativity();
    const double ge = f.base.gamma_m * (sign > 0 ? 1 + c : 1 - c);
    const double w0 = sign * f.base.omega_m_tilde();
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = w0 - half_span_gamma_eff * ge + 2 * half_span_gamma_eff * ge * i / (n - 1.0);
    return g;
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

double percentile90(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(std::ceil(0.9 * v.size())) - 1];
}

double variance(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / (v.size() - 1);
}

} // namespace

TEST_CASE("noiseless recovery") {
    const auto model = make_model(24000, 100.0);
    auto truth = model.nominal();
    truth[scale] = 3.7;
    truth[phase_offset] = 0.4;
    const auto grid = window_grid(model, 3, 200);
    for (bool with_phase : {false, true}) {
        const auto data = synthesize(model, truth, grid, with_phase);
        const auto res = fit_spectrum(data, model, initial_guess(data, model));
        CHECK(res.converged);
        CHECK(rel(res.values[g_coupling], truth[g_coupling]) < 1e-6);
        CHECK(rel(res.values[gamma_m], truth[gamma_m]) < 1e-6);
        CHECK(rel(res.values[scale], truth[scale]) < 1e-6);
        if (with_phase) CHECK(std::fabs(res.values[phase_offset] - 0.4) < 1e-6);
        CHECK(res.values[kappa_t] == model.base.kappa_t()); // held
    }
}

TEST_CASE("noiseless recovery with kappa_T free") {
    const auto model = make_model(24000, 30.0);
    auto truth = model.nominal();
    truth[kappa_t] *= 1.1;
    truth[g_coupling] *= std::sqrt(1.1);
    // asymmetric wide span for the cavity baseline, merged with a dense window
    std::vector<double> grid = window_grid(model, 3, 200);
    for (int i = 0; i < 200; ++i) grid.push_back(omega_m - 3e5 + 4.5e5 * i / 199.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    FitModel fixed = model;
    fixed.mode = response::SweepMode::fixed_delta;
    const auto data = synthesize(fixed, truth, grid, true);
    FreeMask mask;
    mask.free[kappa_t] = true;
    const auto res = fit_spectrum(data, fixed, initial_guess(data, fixed), mask);
    CHECK(res.converged);
    CHECK(rel(res.values[kappa_t], truth[kappa_t]) < 1e-6);
    CHECK(rel(res.values[g_coupling], truth[g_coupling]) < 1e-6);
}

TEST_CASE("objective decreases across accepted steps") {
    const auto model = make_model(24000, 100.0);
    const auto data = add_noise(synthesize(model, model.nominal(), window_grid(model, 3, 200), true),
                                0.01, 0.01, 11);
    auto seed = initial_guess(data, model);
    seed[g_coupling] *= 1.6;
    const auto res = fit_spectrum(data, model, seed);
    REQUIRE(res.objective_history.size() >= 2);
    for (std::size_t i = 1; i < res.objective_history.size(); ++i)
        CHECK(res.objective_history[i] <= res.objective_history[i - 1]);
    CHECK(res.objective == res.objective_history.back());
}

TEST_CASE("amplitude rescaling leaves the physics unchanged") {
    // Rounding of the objective moves a parameter by about sqrt(eps) of its
    // 1-sigma width; at C = 100 without phase gamma_m is barely constrained
    // (sigma ~ gamma_m), so all parameters are compared at C = 10 and the
    // coupling alone at C = 100.
    for (double c : {10.0, 100.0}) {
        const auto model = make_model(24000, c);
        const auto data = add_noise(synthesize(model, model.nominal(), window_grid(model, 3, 200), false),
                                    0.01, 0.0, 5);
        auto scaled = data;
        for (double& v : scaled.modulus) v *= 7.3e4;
        const auto a = fit_spectrum(data, model, initial_guess(data, model));
        const auto b = fit_spectrum(scaled, model, initial_guess(scaled, model));
        CHECK(rel(b.values[g_coupling], a.values[g_coupling]) < 1e-8);
        CHECK(rel(b.values[scale], 7.3e4 * a.values[scale]) < 1e-8);
        if (c <= 10.0) CHECK(rel(b.values[gamma_m], a.values[gamma_m]) < 1e-8);
    }
}

TEST_CASE("non-convergence keeps the best parameters") {
    const auto model = make_model(24000, 100.0);
    const auto data = synthesize(model, model.nominal(), window_grid(model, 3, 200), false);
    auto seed = initial_guess(data, model);
    seed[g_coupling] *= 2.0;
    FitOptions opt;
    opt.max_iterations = 1;
    const auto res = fit_spectrum(data, model, seed, {}, opt);
    CHECK(!res.converged);
    CHECK(res.message == "iteration limit reached");
    CHECK(std::isfinite(res.values[g_coupling]));
    CHECK(res.objective <= res.objective_history.front());
}

TEST_CASE("uncertainties follow the local curvature") {
    const auto model = make_model(24000, 100.0);
    const auto clean = synthesize(model, model.nominal(), window_grid(model, 3, 200), true);
    std::vector<double> g;
    for (int i = 0; i < 40; ++i) {
        const auto noisy = add_noise(clean, 0.01, 0.01, 100 + i);
        g.push_back(fit_spectrum(noisy, model, initial_guess(noisy, model)).values[g_coupling]);
    }
    const auto one = fit_spectrum(add_noise(clean, 0.01, 0.01, 1), model, initial_guess(clean, model));
    REQUIRE(one.uncertainties_available);
    // spread of replicas against the quoted 1-sigma, within a factor of two
    const double ratio = std::sqrt(variance(g)) / one.sigma[g_coupling];
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
}

TEST_CASE("singular curvature flags uncertainties") {
    auto model = make_model(24000, 100.0);
    // coupling so weak that no parameter but the scale is visible
    model.base.g_coupling = 1e-6;
    model.base.gamma_m = omega_m / 24000;
    const auto grid = window_grid(model, 3, 60);
    const auto data = synthesize(model, model.nominal(), grid, false);
    const auto res = fit_spectrum(data, model, model.nominal());
    CHECK(!res.uncertainties_available);
}

TEST_CASE("Monte Carlo recovery of the coupling") {
    const auto model = make_model(24000, 100.0);
    MonteCarloSpec spec;
    spec.truth = model.nominal();
    spec.grid = window_grid(model, 3, 200);
    spec.replicas = 100;
    const auto runs = monte_carlo(model, spec);
    REQUIRE(runs.size() == 100);
    std::vector<double> err;
    for (const auto& r : runs) {
        CHECK(r.converged);
        err.push_back(rel(r.values[g_coupling], spec.truth[g_coupling]));
    }
    CHECK(percentile90(err) < 0.02);

    // reproducible, replica by replica
    const auto again = monte_carlo(model, spec);
    for (std::size_t i = 0; i < runs.size(); ++i) CHECK(again[i].values == runs[i].values);
}

TEST_CASE("phase data reduce the parameter variance") {
    const auto model = make_model(24000, 100.0);
    MonteCarloSpec spec;
    spec.truth = model.nominal();
    spec.grid = window_grid(model, 3, 200);
    spec.replicas = 100;
    const auto collect = [&](bool phase) {
        spec.with_phase = phase;
        std::vector<double> g, s;
        for (const auto& r : monte_carlo(model, spec)) {
            g.push_back(r.values[g_coupling]);
            s.push_back(r.values[scale]);
        }
        return std::pair{variance(g), variance(s)};
    };
    const auto modulus_only = collect(false);
    const auto joint = collect(true);
    CHECK(joint.first < modulus_only.first);
    CHECK(joint.second < modulus_only.second);
}

TEST_CASE("joint fit of four couplings") {
    const double ratios[] = {1.0, 1.4, 3.1, 4.2};
    std::vector<FitModel> models;
    std::vector<SpectrumData> data;
    std::vector<ParamVector> seeds;
    std::vector<double> grid;
    for (int i = 0; i < 1201; ++i) grid.push_back(2 * M_PI * (325.6e3 + 60e3 * i / 1200.0));
    for (int k = 0; k < 4; ++k) {
        auto m = make_model(24000, 0.0);
        m.base.g_coupling = 1e-2 * ratios[k] * omega_m;
        models.push_back(m);
        data.push_back(add_noise(synthesize(m, m.nominal(), grid, false), 0.01, 0.0, 40 + k));
        seeds.push_back(initial_guess(data.back(), m));
    }
    // the shared linewidth starts away from the truth
    for (auto& s : seeds) s[gamma_m] *= 1.3;
    const auto res = fit_joint(data, models, seeds);
    CHECK(res.converged);
    REQUIRE(res.g_coupling.size() == 4);
    for (int k = 0; k < 4; ++k)
        CHECK(rel(res.g_coupling[k] / res.g_coupling[0], ratios[k]) < 0.05);
    // gamma_m only enters through the 1 in 1 + C here, so it is loosely pinned
    CHECK(rel(res.gamma_m, omega_m / 24000) < 0.15);
}

TEST_CASE("seeding") {
    const auto model = make_model(24000, 100.0);
    const auto data = synthesize(model, model.nominal(), window_grid(model, 3, 200), false);
    const auto seed = initial_guess(data, model);
    CHECK(rel(seed[g_coupling], model.base.g_coupling) < 0.3);
    CHECK(seed[centre] == model.nominal()[centre]);
    CHECK(std::fabs(initial_guess(data, model, true)[centre] - model.base.omega_m_tilde()) <
          0.05 * model.base.gamma_m * 101);

    SpectrumData flat;
    flat.omega = window_grid(model, 3, 50);
    flat.modulus.assign(50, 1.0);
    CHECK_THROWS_AS(initial_guess(flat, model), DomainError);
}

TEST_CASE("amplification peak selects the gain branch") {
    const auto model = make_model(24000, 0.32, -1.0);
    const auto data = synthesize(model, model.nominal(), window_grid(model, 6, 200, -1.0), false);
    const auto seed = initial_guess(data, model);
    const double c = model::cooperativity(seed[g_coupling], seed[kappa_t], seed[gamma_m]);
    CHECK(c < 1.0);
    CHECK(rel(c, 0.32) < 0.3);
    const auto res = fit_spectrum(data, model, seed);
    CHECK(rel(res.values[g_coupling], model.base.g_coupling) < 1e-6);
}

TEST_CASE("input validation") {
    const auto model = make_model(24000, 100.0);
    auto data = synthesize(model, model.nominal(), window_grid(model, 3, 12), false);
    // 12 points for 3 free parameters (no phase) passes; 8 does not
    CHECK_NOTHROW(fit_spectrum(data, model, model.nominal()));
    auto small = data;
    small.omega.resize(8);
    small.modulus.resize(8);
    CHECK_THROWS_AS(fit_spectrum(small, model, model.nominal()), DomainError);

    FreeMask none;
    none.free.fill(false);
    CHECK_THROWS_AS(fit_spectrum(data, model, model.nominal(), none), DomainError);

    auto bad = data;
    std::swap(bad.omega[0], bad.omega[1]);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = data;
    bad.sigma.assign(bad.size(), 1.0);
    bad.sigma[3] = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);

    const std::string names[] = {"g_coupling", "bogus"};
    CHECK_THROWS_AS(FreeMask::from_names(names), DomainError);
    const std::string good[] = {"kappa_t", "omega_m_tilde"};
    const auto mask = FreeMask::from_names(good);
    CHECK(mask.free[kappa_t]);
    CHECK(mask.free[centre]);
    CHECK(!mask.free[g_coupling]);

    FitOptions opt;
    opt.restarts = 6;
    CHECK_THROWS_AS(fit_spectrum(data, model, model.nominal(), {}, opt), DomainError);
}

TEST_CASE("restarts never worsen the objective") {
    const auto model = make_model(24000, 100.0);
    const auto data = add_noise(synthesize(model, model.nominal(), window_grid(model, 3, 200), true),
                                0.01, 0.01, 9);
    auto seed = initial_guess(data, model);
    seed[g_coupling] *= 3.0;
    FitOptions single, multi;
    multi.restarts = 5;
    CHECK(fit_spectrum(data, model, seed, {}, multi).objective <=
          fit_spectrum(data, model, seed, {}, single).objective);
}

TEST_CASE("replica seeds") {
    CHECK(replica_seed(1, 0) == replica_seed(1, 0));
    CHECK(replica_seed(1, 0) != replica_seed(1, 1));
    CHECK(replica_seed(1, 0) != replica_seed(2, 0));
}
