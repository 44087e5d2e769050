#include "omitlab/config.hpp"

#include "omitlab/constants.hpp"
#include "omitlab/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace omitlab::config {

using nlohmann::json;

namespace {

// Reads members of one JSON object, remembering which keys were consumed so
// that leftovers can be reported.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw DomainError(path_.empty() ? "config" : path_, "must be an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_number()) throw DomainError(field(key), "must be a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw DomainError(field(key), "must be finite");
    }

    void number(const std::string& key, std::optional<double>& out) {
        if (!has(key)) return;
        double v = 0.0;
        number(key, v);
        out = v;
    }

    void count(const std::string& key, std::size_t& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw DomainError(field(key), "must be a non-negative integer");
        out = v.get<std::size_t>();
    }

    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_number_integer()) throw DomainError(field(key), "must be an integer");
        out = v.get<int>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_boolean()) throw DomainError(field(key), "must be true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const auto& v = at(key);
        if (!v.is_string()) throw DomainError(field(key), "must be a string");
        out = v.get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw DomainError(field(key), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void section(Reader& root, const std::string& key, Fn&& fn) {
    if (!root.has(key)) return;
    Reader r(root.at(key), key);
    fn(r);
    r.finish();
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0)) throw DomainError(field, "must be positive");
}

} // namespace

void RunConfig::validate() const {
    require_positive(mechanics.omega_m_over_2pi_hz, "mechanics.omega_m_over_2pi_hz");
    require_positive(mechanics.q_factor, "mechanics.q_factor");
    require_positive(mechanics.mass_kg, "mechanics.mass_kg");
    if (!(mechanics.overlap_theta > 0.0 && mechanics.overlap_theta <= 1.0))
        throw DomainError("mechanics.overlap_theta", "must lie in (0, 1]");
    require_positive(optics.kappa0_per_s, "optics.kappa0_per_s");
    require_positive(optics.kappa2_per_s, "optics.kappa2_per_s");
    require_positive(optics.wavelength_m, "optics.wavelength_m");
    require_positive(optics.cavity_length_m, "optics.cavity_length_m");
    require_positive(optics.finesse, "optics.finesse");
    require_positive(membrane.thickness_m, "membrane.thickness_m");
    if (!(membrane.n_real >= 1.0)) throw DomainError("membrane.n_real", "must be >= 1");
    if (!(membrane.n_imag >= 0.0)) throw DomainError("membrane.n_imag", "must be >= 0");
    if (!(std::fabs(membrane.z0_m) < optics.cavity_length_m / 4.0))
        throw DomainError("membrane.z0_m", "must satisfy |z0| < cavity_length / 4");
    if (!(drive.pump_power_w >= 0.0)) throw DomainError("drive.pump_power_w", "must be >= 0");
    if (coupling.source != "explicit" && coupling.source != "dispersion")
        throw DomainError("coupling.source", "must be \"explicit\" or \"dispersion\"");
    if (sweep.count == 0) throw DomainError("sweep.count", "must be >= 1");
    if (sweep.count > 1 && !(sweep.stop_hz > sweep.start_hz))
        throw DomainError("sweep.stop_hz", "must exceed sweep.start_hz");
    sweep_mode(sweep.mode);
    if (dispersion_grid.count == 0) throw DomainError("dispersion_grid.count", "must be >= 1");
    if (dispersion_grid.count > 1 && !(dispersion_grid.stop_m > dispersion_grid.start_m))
        throw DomainError("dispersion_grid.stop_m", "must exceed dispersion_grid.start_m");
    if (oracle.dt_s && !(*oracle.dt_s > 0.0)) throw DomainError("oracle.dt_s", "must be positive");
    require_positive(oracle.settle_gamma_eff, "oracle.settle_gamma_eff");
    if (!(oracle.window_periods >= 20.0))
        throw DomainError("oracle.window_periods", "must be at least 20");
    if (oracle.surrogate_q) require_positive(*oracle.surrogate_q, "oracle.surrogate_q");
    if (oracle.surrogate_cooperativity && !(*oracle.surrogate_cooperativity >= 0.0))
        throw DomainError("oracle.surrogate_cooperativity", "must be >= 0");
    fit::FreeMask::from_names(fit.free);
    if (fit.restarts < 1 || fit.restarts > 5) throw DomainError("fit.restarts", "must be 1..5");
    if (temperature_k) require_positive(*temperature_k, "thermal.temperature_k");
}

RunConfig from_json(const json& input) {
    const json* doc = &input;
    if (input.is_object() && input.contains("config") && input.contains("toolkit_version"))
        doc = &input.at("config");

    RunConfig c;
    Reader root(*doc, "");
    section(root, "mechanics", [&](Reader& r) {
        r.number("omega_m_over_2pi_hz", c.mechanics.omega_m_over_2pi_hz);
        r.number("q_factor", c.mechanics.q_factor);
        r.number("mass_kg", c.mechanics.mass_kg);
        r.number("overlap_theta", c.mechanics.overlap_theta);
    });
    section(root, "optics", [&](Reader& r) {
        r.number("kappa0_per_s", c.optics.kappa0_per_s);
        r.number("kappa2_per_s", c.optics.kappa2_per_s);
        r.number("wavelength_m", c.optics.wavelength_m);
        r.number("cavity_length_m", c.optics.cavity_length_m);
        r.number("finesse", c.optics.finesse);
    });
    section(root, "membrane", [&](Reader& r) {
        r.number("thickness_m", c.membrane.thickness_m);
        r.number("n_real", c.membrane.n_real);
        r.number("n_imag", c.membrane.n_imag);
        r.number("z0_m", c.membrane.z0_m);
    });
    section(root, "drive", [&](Reader& r) {
        r.number("pump_power_w", c.drive.pump_power_w);
        r.number("delta_over_omega_m", c.drive.delta_over_omega_m);
        if (r.has("probe_amplitude")) {
            const auto& v = r.at("probe_amplitude");
            if (v.is_number()) {
                c.drive.probe_amplitude = {v.get<double>(), 0.0};
            } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
                c.drive.probe_amplitude = {v[0].get<double>(), v[1].get<double>()};
            } else {
                throw DomainError("drive.probe_amplitude", "must be a number or [re, im]");
            }
        }
    });
    section(root, "coupling", [&](Reader& r) {
        r.string("source", c.coupling.source);
        r.number("g_over_omega_m", c.coupling.g_over_omega_m);
        r.number("h_shift_per_s", c.coupling.h_shift_per_s);
        r.boolean("track_detuning", c.coupling.track_detuning);
    });
    section(root, "sweep", [&](Reader& r) {
        r.number("start_hz", c.sweep.start_hz);
        r.number("stop_hz", c.sweep.stop_hz);
        r.count("count", c.sweep.count);
        r.string("mode", c.sweep.mode);
    });
    section(root, "dispersion_grid", [&](Reader& r) {
        r.number("start_m", c.dispersion_grid.start_m);
        r.number("stop_m", c.dispersion_grid.stop_m);
        r.count("count", c.dispersion_grid.count);
    });
    section(root, "oracle", [&](Reader& r) {
        r.number("dt_s", c.oracle.dt_s);
        r.number("settle_gamma_eff", c.oracle.settle_gamma_eff);
        r.number("window_periods", c.oracle.window_periods);
        r.number("surrogate_q", c.oracle.surrogate_q);
        r.number("surrogate_cooperativity", c.oracle.surrogate_cooperativity);
    });
    section(root, "fit", [&](Reader& r) {
        if (r.has("free")) {
            const auto& v = r.at("free");
            if (!v.is_array()) throw DomainError("fit.free", "must be an array of names");
            c.fit.free.clear();
            for (const auto& name : v) {
                if (!name.is_string()) throw DomainError("fit.free", "must be an array of names");
                c.fit.free.push_back(name.get<std::string>());
            }
        }
        r.boolean("use_phase", c.fit.use_phase);
        r.integer("restarts", c.fit.restarts);
    });
    section(root, "thermal", [&](Reader& r) { r.number("temperature_k", c.temperature_k); });
    if (root.has("output")) {
        std::string out;
        root.string("output", out);
        c.output = out;
    }
    root.finish();
    c.validate();
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["mechanics"] = {{"omega_m_over_2pi_hz", c.mechanics.omega_m_over_2pi_hz},
                      {"q_factor", c.mechanics.q_factor},
                      {"mass_kg", c.mechanics.mass_kg},
                      {"overlap_theta", c.mechanics.overlap_theta}};
    j["optics"] = {{"kappa0_per_s", c.optics.kappa0_per_s},
                   {"kappa2_per_s", c.optics.kappa2_per_s},
                   {"wavelength_m", c.optics.wavelength_m},
                   {"cavity_length_m", c.optics.cavity_length_m},
                   {"finesse", c.optics.finesse}};
    j["membrane"] = {{"thickness_m", c.membrane.thickness_m},
                     {"n_real", c.membrane.n_real},
                     {"n_imag", c.membrane.n_imag},
                     {"z0_m", c.membrane.z0_m}};
    j["drive"] = {{"pump_power_w", c.drive.pump_power_w},
                  {"delta_over_omega_m", c.drive.delta_over_omega_m},
                  {"probe_amplitude", {c.drive.probe_amplitude.real(), c.drive.probe_amplitude.imag()}}};
    j["coupling"] = {{"source", c.coupling.source},
                     {"g_over_omega_m", c.coupling.g_over_omega_m},
                     {"h_shift_per_s", c.coupling.h_shift_per_s},
                     {"track_detuning", c.coupling.track_detuning}};
    j["sweep"] = {{"start_hz", c.sweep.start_hz},
                  {"stop_hz", c.sweep.stop_hz},
                  {"count", c.sweep.count},
                  {"mode", c.sweep.mode}};
    j["dispersion_grid"] = {{"start_m", c.dispersion_grid.start_m},
                            {"stop_m", c.dispersion_grid.stop_m},
                            {"count", c.dispersion_grid.count}};
    json o = {{"settle_gamma_eff", c.oracle.settle_gamma_eff},
              {"window_periods", c.oracle.window_periods}};
    if (c.oracle.dt_s) o["dt_s"] = *c.oracle.dt_s;
    if (c.oracle.surrogate_q) o["surrogate_q"] = *c.oracle.surrogate_q;
    if (c.oracle.surrogate_cooperativity)
        o["surrogate_cooperativity"] = *c.oracle.surrogate_cooperativity;
    j["oracle"] = o;
    j["fit"] = {{"free", c.fit.free}, {"use_phase", c.fit.use_phase}, {"restarts", c.fit.restarts}};
    if (c.temperature_k) j["thermal"] = {{"temperature_k", *c.temperature_k}};
    if (c.output) j["output"] = *c.output;
    return j;
}

RunConfig parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DomainError("config", std::string("malformed JSON: ") + e.what());
    }
    return from_json(j);
}

std::string emit(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

RunConfig load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("config", "cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

response::SweepMode sweep_mode(const std::string& name) {
    if (name == "locked") return response::SweepMode::locked;
    if (name == "fixed-delta") return response::SweepMode::fixed_delta;
    throw DomainError("sweep.mode", "must be \"locked\" or \"fixed-delta\"");
}

std::vector<double> linear_grid(double start, double stop, std::size_t count) {
    if (count == 0) throw DomainError("grid", "count must be >= 1");
    if (count == 1) return {start};
    std::vector<double> g(count);
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) g[i] = start + step * static_cast<double>(i);
    g.back() = stop;
    return g;
}

dispersion::MembraneCavity make_cavity(const RunConfig& c) {
    dispersion::MembraneSlab slab;
    slab.thickness = c.membrane.thickness_m;
    slab.n_real = c.membrane.n_real;
    slab.n_imag = c.membrane.n_imag;
    slab.z0 = c.membrane.z0_m;
    dispersion::CavityGeometry geometry;
    geometry.length = c.optics.cavity_length_m;
    geometry.finesse = c.optics.finesse;
    return dispersion::MembraneCavity(slab, geometry, c.optics.wavelength_m);
}

Scenario build_scenario(const RunConfig& c) {
    c.validate();
    Scenario s;
    const double omega_m = constants::two_pi * c.mechanics.omega_m_over_2pi_hz;
    s.mechanics = model::derive_mechanics(omega_m, c.mechanics.q_factor, c.mechanics.mass_kg,
                                          c.mechanics.overlap_theta);
    s.optics = model::make_optics(c.optics.kappa0_per_s, c.optics.kappa2_per_s,
                                  c.optics.wavelength_m, c.optics.cavity_length_m);
    s.drive.pump_power = c.drive.pump_power_w;
    s.drive.delta = c.drive.delta_over_omega_m * omega_m;
    s.drive.probe_amp = c.drive.probe_amplitude;
    s.drive.probe_offset = s.drive.delta;
    s.warnings = model::validate_drive(s.drive, s.optics);

    if (c.coupling.source == "dispersion") {
        const auto cavity = make_cavity(c);
        s.dispersion = cavity.derivatives(c.membrane.z0_m);
        s.coupling = model::steady_state(s.mechanics, s.optics, s.drive, s.dispersion->slope,
                                         s.dispersion->curvature);
    } else {
        s.coupling = model::explicit_coupling(s.mechanics, s.optics, s.drive,
                                              c.coupling.g_over_omega_m * omega_m,
                                              c.coupling.h_shift_per_s);
    }
    s.response = response::make_response_model(s.mechanics, s.optics, s.coupling, s.drive.delta);
    s.response.track_detuning = c.coupling.track_detuning;
    if (c.temperature_k) s.thermal = model::thermal_occupancy(*c.temperature_k, s.mechanics);
    return s;
}

response::ResponseModel oracle_model(const RunConfig& c, const Scenario& s) {
    response::ResponseModel m = s.response;
    if (c.oracle.surrogate_q) m.gamma_m = m.omega_m / *c.oracle.surrogate_q;
    if (c.oracle.surrogate_cooperativity) {
        const double sign = m.g_coupling < 0.0 ? -1.0 : 1.0;
        m.g_coupling = sign * std::sqrt(*c.oracle.surrogate_cooperativity * 2.0 * m.kappa_t() *
                                        m.gamma_m);
    }
    return m;
}

oracle::OracleSettings oracle_settings(const RunConfig& c) {
    oracle::OracleSettings o;
    o.dt = c.oracle.dt_s.value_or(0.0);
    o.settle_gamma_eff = c.oracle.settle_gamma_eff;
    o.window_periods = c.oracle.window_periods;
    return o;
}

} // namespace omitlab::config
