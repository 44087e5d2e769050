#include "omitlab/dispersion.hpp"

#include "omitlab/constants.hpp"
#include "omitlab/errors.hpp"
#include "omitlab/parallel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace omitlab::dispersion {

namespace {

using cld = std::complex<long double>;
constexpr long double pi_l = std::numbers::pi_v<long double>;
constexpr long double c_l = constants::speed_of_light;

struct SlabLd {
    cld r;
    cld t;
};

// Airy sum for a symmetric slab in vacuum, evaluated at wavenumber k.
SlabLd airy_coefficients(const MembraneSlab& slab, cld k) {
    const cld n(slab.n_real, slab.n_imag);
    const cld r12 = (1.0L - n) / (1.0L + n);
    const cld phase = n * k * static_cast<long double>(slab.thickness);
    const cld e1 = std::exp(cld(0, 1) * phase);
    const cld e2 = e1 * e1;
    const cld denom = 1.0L - r12 * r12 * e2;
    return {r12 * (1.0L - e2) / denom, (1.0L - r12 * r12) * e1 / denom};
}

// Wraps a phase into (-pi/2, pi/2].
long double wrap_half(long double phi) {
    phi = std::remainder(phi, pi_l);
    if (phi <= -pi_l / 2) phi += pi_l;
    return phi;
}

} // namespace

void validate(const MembraneSlab& slab) {
    if (!(slab.thickness > 0.0) || !std::isfinite(slab.thickness))
        throw DomainError("membrane.thickness", "must be positive");
    if (!(slab.n_real >= 1.0)) throw DomainError("membrane.n_real", "must be >= 1");
    if (!(slab.n_imag >= 0.0)) throw DomainError("membrane.n_imag", "must be >= 0");
}

SlabCoefficients slab_reflectivity(const MembraneSlab& slab, double wavelength) {
    validate(slab);
    if (!(wavelength > 0.0)) throw DomainError("wavelength", "must be positive");
    const auto c = airy_coefficients(slab, 2.0L * pi_l / wavelength);
    return {std::complex<double>(c.r), std::complex<double>(c.t)};
}

double mirror_reflectivity(double finesse) {
    if (!(finesse > 1.0)) throw DomainError("finesse", "must exceed 1");
    return std::exp(-constants::pi / (2.0 * finesse));
}

MembraneCavity::MembraneCavity(MembraneSlab slab, CavityGeometry geometry, double wavelength)
    : slab_(slab), geometry_(geometry), wavelength_(wavelength) {
    validate(slab_);
    if (!(wavelength > 0.0)) throw DomainError("wavelength", "must be positive");
    if (!(geometry.length > 4.0 * slab.thickness))
        throw DomainError("cavity_length", "must be much longer than the membrane");
    mirror_r_ = mirror_reflectivity(geometry.finesse);
    coefficients_ = slab_reflectivity(slab_, wavelength_);

    // The cavity is taken as locked to the drive: its length is the multiple
    // of lambda/2 nearest the nominal length, so the empty-cavity mode sits at k0.
    const long double half_wave = static_cast<long double>(wavelength) / 2.0L;
    mode_index_ = std::lround(static_cast<long double>(geometry.length) / half_wave);
    length_ = mode_index_ * half_wave;
    k0_ = 2.0L * pi_l / static_cast<long double>(wavelength);

    // Transparent-slab offset, solved self-consistently in k.
    long double dk = 0;
    const long double d = slab_.thickness;
    for (int i = 0; i < 8; ++i) {
        const long double k = k0_ + dk;
        const long double extra = std::arg(airy_coefficients(slab_, k).t) - k * d;
        dk = -wrap_half(extra) / length_;
    }
    bulk_dk_ = dk;
    bulk_shift_ = static_cast<double>(c_l * dk);

    node_ = find_node();
}

double MembraneCavity::free_spectral_range() const {
    return static_cast<double>(pi_l * c_l / length_);
}

std::complex<long double> MembraneCavity::round_trip(std::complex<long double> k,
                                                    long double centre) const {
    const long double d = slab_.thickness;
    const long double gap_left = centre - d / 2;
    const long double gap_right = length_ - centre - d / 2;
    const cld i(0, 1);
    const cld rho(-mirror_r_, 0);
    const auto s = airy_coefficients(slab_, k);
    const cld load = rho * std::exp(2.0L * i * k * gap_right);
    const cld slab_in = s.r + s.t * s.t * load / (1.0L - s.r * load);
    return rho * std::exp(2.0L * i * k * gap_left) * slab_in;
}

long double MembraneCavity::phase_residual(long double dk, long double centre) const {
    return std::arg(round_trip(cld(k0_ + dk, 0), centre));
}

ResonanceSolution MembraneCavity::solve_at(long double centre) const {
    // The tracked resonance is the unique root within half a free spectral
    // range of the band centre; bands of adjacent modes never overlap for |r_m| < 1.
    const long double half_window = pi_l / (2.0L * length_);
    const long double lo = bulk_dk_ - half_window;
    const long double hi = bulk_dk_ + half_window;
    constexpr int samples = 64;

    long double a = 0, b = 0, fa = 0, fb = 0;
    bool bracketed = false;
    long double prev_x = lo;
    long double prev_f = phase_residual(lo, centre);
    for (int i = 1; i <= samples && !bracketed; ++i) {
        const long double x = lo + (hi - lo) * i / samples;
        const long double fx = phase_residual(x, centre);
        if (prev_f == 0.0L) {
            ResonanceSolution exact;
            exact.delta_omega = static_cast<double>(c_l * prev_x);
            exact.wavenumber_offset = prev_x;
            return exact;
        }
        // Rising zero crossing; a wrap from +pi to -pi is a falling jump.
        if (prev_f < 0.0L && fx >= 0.0L && fx - prev_f < pi_l) {
            a = prev_x; fa = prev_f; b = x; fb = fx;
            bracketed = true;
        }
        prev_x = x;
        prev_f = fx;
    }
    if (!bracketed) {
        std::ostringstream msg;
        msg << "no resonance bracketed in dk = [" << static_cast<double>(lo) << ", "
            << static_cast<double>(hi) << "] 1/m around slab centre "
            << static_cast<double>(centre) << " m";
        throw NumericalError(msg.str());
    }

    // Illinois (modified regula falsi): bracketing with secant convergence.
    int side = 0;
    long double x = a, fx = fa;
    int it = 0;
    for (; it < 200; ++it) {
        x = (a * fb - b * fa) / (fb - fa);
        if (!(x > a && x < b)) x = 0.5L * (a + b);
        fx = phase_residual(x, centre);
        if (fx == 0.0L || std::fabs(fx) < 1e-14L) break;
        if ((fx < 0) == (fa < 0)) {
            a = x; fa = fx;
            if (side == -1) fb *= 0.5L;
            side = -1;
        } else {
            b = x; fb = fx;
            if (side == +1) fa *= 0.5L;
            side = +1;
        }
        if (b - a <= 4.0L * std::numeric_limits<long double>::epsilon() * (k0_ + std::fabs(x)))
            break;
    }
    if (!(std::fabs(fx) < phase_tolerance)) {
        std::ostringstream msg;
        msg << "resonance root did not converge: residual " << static_cast<double>(fx)
            << " rad, bracket [" << static_cast<double>(a) << ", " << static_cast<double>(b)
            << "] 1/m after " << it << " iterations";
        throw NumericalError(msg.str());
    }

    ResonanceSolution sol;
    sol.delta_omega = static_cast<double>(c_l * x);
    sol.phase_residual = static_cast<double>(fx);
    sol.iterations = it;
    sol.wavenumber_offset = x;

    return sol;
}

long double MembraneCavity::find_node() const {
    // Empty-cavity nodes sit at multiples of lambda/2 from mirror 1; the slab
    // node (frequency maximum) is searched within lambda/8 of the one nearest L/2.
    const long double half_wave = static_cast<long double>(wavelength_) / 2.0L;
    const long double guess = std::round(length_ / 2.0L / half_wave) * half_wave;
    long double lo = guess - half_wave / 4.0L;
    long double hi = guess + half_wave / 4.0L;
    const long double ratio = (std::sqrt(5.0L) - 1.0L) / 2.0L;
    const auto value = [&](long double z) { return static_cast<long double>(solve_at(z).delta_omega); };
    long double x1 = hi - ratio * (hi - lo);
    long double x2 = lo + ratio * (hi - lo);
    long double f1 = value(x1);
    long double f2 = value(x2);
    for (int i = 0; i < 120 && hi - lo > 1e-17L; ++i) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = value(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = value(x1);
        }
    }
    return 0.5L * (lo + hi);
}

ResonanceSolution MembraneCavity::solve(double z0) const {
    if (!std::isfinite(z0) || !(std::fabs(z0) < length() / 4.0))
        throw DomainError("z0", "must satisfy |z0| < cavity_length / 4");
    return solve_at(node_ + static_cast<long double>(z0));
}

long double MembraneCavity::mode_decay_rate(long double centre, long double dk) const {
    // Complex-frequency root of round_trip(k) = 1, seeded at the real root;
    // Newton on log(round_trip) with a central-difference derivative.
    const long double seed_loss = -std::log(std::abs(round_trip(cld(k0_ + dk, 0), centre)));
    cld k(k0_ + dk, -seed_loss / (2.0L * length_));
    const long double h = 1e-3L / length_;
    for (int it = 0; it < 50; ++it) {
        const cld g = std::log(round_trip(k, centre));
        if (std::abs(g) < 1e-15L) break;
        const cld dg = (std::log(round_trip(k + h, centre)) - std::log(round_trip(k - h, centre))) /
                       (2.0L * h);
        k -= g / dg;
    }
    const cld residual = std::log(round_trip(k, centre));
    if (!(std::abs(residual) < phase_tolerance))
        throw NumericalError("complex resonance did not converge: |log round trip| = " +
                             std::to_string(static_cast<double>(std::abs(residual))));
    return -c_l * k.imag();
}

LossDiagnostic MembraneCavity::loss_diagnostic(double z0) const {
    const auto sol = solve(z0);
    const long double centre = node_ + static_cast<long double>(z0);
    LossDiagnostic out;
    out.linewidth = static_cast<double>(mode_decay_rate(centre, sol.wavenumber_offset));

    MembraneSlab lossless = slab_;
    lossless.n_imag = 0.0;
    const MembraneCavity twin(lossless, geometry_, wavelength_);
    const auto twin_sol = twin.solve_at(centre);
    out.lossless_linewidth =
        static_cast<double>(twin.mode_decay_rate(centre, twin_sol.wavenumber_offset));
    out.absorption_rate = out.linewidth - out.lossless_linewidth;
    return out;
}

double MembraneCavity::empty_linewidth() const {
    return static_cast<double>(-c_l * std::log(mirror_r_ * mirror_r_) / (2.0L * length_));
}

Derivatives MembraneCavity::derivatives(double z0) const {
    return derivatives(z0, wavelength_ / 1e4);
}

Derivatives MembraneCavity::derivatives(double z0, double step) const {
    if (!(step > 0.0) || z0 + 0.5 * step == z0)
        throw NumericalError("finite-difference step underflows at z0 = " + std::to_string(z0));
    return finite_difference_derivatives([this](double z) { return resonance_shift(z); }, z0, step);
}

double MembraneCavity::approximate_modulation(double z0) const {
    const double k = constants::two_pi / wavelength_;
    return constants::speed_of_light / length() *
           std::asin(std::abs(coefficients_.r) * std::cos(2.0 * k * z0));
}

double MembraneCavity::approximate_slope(double z0) const {
    const double k = constants::two_pi / wavelength_;
    const double r = std::abs(coefficients_.r);
    const double c = std::cos(2.0 * k * z0);
    return -constants::speed_of_light / length() * r * 2.0 * k * std::sin(2.0 * k * z0) /
           std::sqrt(1.0 - r * r * c * c);
}

DispersionCurve dispersion_curve(const MembraneCavity& cavity, std::span<const double> z0_grid) {
    struct Row {
        double delta_omega = 0, slope = 0, curvature = 0;
    };
    const auto rows = parallel_map<Row>(z0_grid.size(), [&](std::size_t i) {
        const auto d = cavity.derivatives(z0_grid[i]);
        return Row{cavity.resonance_shift(z0_grid[i]), d.slope, d.curvature};
    });
    DispersionCurve curve;
    curve.z0.assign(z0_grid.begin(), z0_grid.end());
    for (const auto& r : rows) {
        curve.delta_omega.push_back(r.delta_omega);
        curve.slope.push_back(r.slope);
        curve.curvature.push_back(r.curvature);
    }
    return curve;
}

double cavity_resonance_shift(const MembraneSlab& slab, double cavity_length,
                              double wavelength, double z0) {
    return MembraneCavity(slab, {cavity_length, CavityGeometry{}.finesse}, wavelength)
        .resonance_shift(z0);
}

Derivatives dispersion_derivatives(const MembraneSlab& slab, const CavityGeometry& cavity,
                                   double wavelength, double z0) {
    return MembraneCavity(slab, cavity, wavelength).derivatives(z0);
}

} // namespace omitlab::dispersion
