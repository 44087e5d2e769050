#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Position-dependent resonance frequency of a Fabry-Perot cavity with a thin
// dielectric membrane inside, from a 1-D transfer-matrix (plane wave, normal
// incidence) model: mirror | vacuum | slab | vacuum | mirror.
namespace omitlab::dispersion {

struct MembraneSlab {
    double thickness = 50e-9; // m
    double n_real = 2.0;
    double n_imag = 0.0;
    double z0 = 0.0; // configured offset of the slab centre from a field node, m
};

void validate(const MembraneSlab& slab);

struct SlabCoefficients {
    std::complex<double> r; // amplitude reflection (either side, symmetric slab)
    std::complex<double> t; // amplitude transmission
    double absorption() const { return 1.0 - std::norm(r) - std::norm(t); }
};

// Single-slab interference at normal incidence. Phases are referenced to the
// slab faces, fields propagate as exp(+i k z).
SlabCoefficients slab_reflectivity(const MembraneSlab& slab, double wavelength);

struct CavityGeometry {
    double length = 0.093;     // m (snapped to a multiple of lambda/2, see MembraneCavity)
    double finesse = 60000.0;  // empty-cavity finesse
};

// Lossless end-mirror amplitude reflectivity giving the empty-cavity finesse.
double mirror_reflectivity(double finesse);

struct ResonanceSolution {
    double delta_omega = 0.0;     // rad/s, shift from the empty-cavity resonance
    double phase_residual = 0.0;  // rad, round-trip phase at the returned root
    long double wavenumber_offset = 0; // 1/m, root minus the empty-cavity wavenumber
    int iterations = 0;
};

// Amplitude decay rates (rad/s) of the tracked mode from the complex-frequency
// resonance. Diagnostic only: the response model uses the measured kappa_T.
struct LossDiagnostic {
    double linewidth = 0.0;          // with the configured n_imag
    double lossless_linewidth = 0.0; // same slab with n_imag = 0
    double absorption_rate = 0.0;    // difference, the membrane absorption share
};

struct Derivatives {
    double slope = 0.0;     // rad/(s m)
    double curvature = 0.0; // rad/(s m^2)
};

// Central differences with one Richardson extrapolation (h and h/2).
template <typename F>
Derivatives finite_difference_derivatives(F&& f, double z0, double step);

class MembraneCavity {
public:
    // Resonance tolerance on the round-trip phase.
    static constexpr double phase_tolerance = 1e-10;

    MembraneCavity(MembraneSlab slab, CavityGeometry geometry, double wavelength);

    // Root solve for the tracked resonance with the slab centre displaced by
    // z0 from the field node nearest the cavity centre. |z0| < L/4.
    ResonanceSolution solve(double z0) const;
    double resonance_shift(double z0) const { return solve(z0).delta_omega; }

    LossDiagnostic loss_diagnostic(double z0) const;
    double empty_linewidth() const; // rad/s, mirrors only

    // Step defaults to lambda / 1e4.
    Derivatives derivatives(double z0) const;
    Derivatives derivatives(double z0, double step) const;

    // Position-independent shift of a fully transparent slab with the same
    // optical thickness (centre of the modulation band).
    double bulk_shift() const { return bulk_shift_; }

    // Closed-form thin-membrane estimate (c/L) asin(|r_m| cos(2 k z0)),
    // without the bulk offset; cross-check only.
    double approximate_modulation(double z0) const;
    double approximate_slope(double z0) const;

    double free_spectral_range() const; // rad/s
    double length() const { return static_cast<double>(length_); }
    double wavelength() const { return wavelength_; }
    double node_position() const { return static_cast<double>(node_); }
    long mode_index() const { return mode_index_; }
    const MembraneSlab& slab() const { return slab_; }
    const SlabCoefficients& slab_coefficients() const { return coefficients_; }

private:
    std::complex<long double> round_trip(std::complex<long double> k, long double centre) const;
    long double phase_residual(long double dk, long double centre) const;
    long double mode_decay_rate(long double centre, long double dk) const;
    ResonanceSolution solve_at(long double centre) const;
    long double find_node() const;

    MembraneSlab slab_;
    CavityGeometry geometry_;
    double wavelength_;
    SlabCoefficients coefficients_;
    long mode_index_ = 0;
    long double k0_ = 0;     // empty-cavity resonant wavenumber (== 2 pi / lambda)
    long double length_ = 0; // effective length, mode_index * lambda / 2
    long double mirror_r_ = 0;
    long double bulk_dk_ = 0;
    double bulk_shift_ = 0.0;
    long double node_ = 0;   // slab-centre position of the node, from mirror 1
};

struct DispersionCurve {
    std::vector<double> z0;
    std::vector<double> delta_omega;
    std::vector<double> slope;
    std::vector<double> curvature;
};

DispersionCurve dispersion_curve(const MembraneCavity& cavity, std::span<const double> z0_grid);

// Convenience wrappers building a cavity with the default finesse.
double cavity_resonance_shift(const MembraneSlab& slab, double cavity_length,
                              double wavelength, double z0);
Derivatives dispersion_derivatives(const MembraneSlab& slab, const CavityGeometry& cavity,
                                   double wavelength, double z0);

template <typename F>
Derivatives finite_difference_derivatives(F&& f, double z0, double step) {
    const auto first = [&](double h) { return (f(z0 + h) - f(z0 - h)) / (2.0 * h); };
    const auto second = [&](double h, double centre) {
        return (f(z0 + h) - 2.0 * centre + f(z0 - h)) / (h * h);
    };
    const double centre = f(z0);
    const double h = step;
    const double half = 0.5 * step;
    Derivatives d;
    d.slope = (4.0 * first(half) - first(h)) / 3.0;
    d.curvature = (4.0 * second(half, centre) - second(h, centre)) / 3.0;
    return d;
}

} // namespace omitlab::dispersion
