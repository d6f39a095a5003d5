#pragma once

// Run configuration: JSON ingestion with defaults, presets and validation.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "bedseis/error.hpp"
#include "bedseis/granular.hpp"
#include "bedseis/hydro_bed.hpp"
#include "bedseis/signal_analysis.hpp"
#include "bedseis/simulation.hpp"
#include "bedseis/source_forcing.hpp"
#include "bedseis/wave_propagation.hpp"

namespace bedseis {

using Json = nlohmann::json;

#ifndef BEDSEIS_PRESET_DIR
#define BEDSEIS_PRESET_DIR "presets"
#endif

#ifndef BEDSEIS_VERSION
#define BEDSEIS_VERSION "0.0.0"
#endif

/// Everything a run needs. Defaults reproduce the test-case preset.
struct SimulationConfig {
    std::string name = "table1";

    double domain_length = 100.0;
    double flow_depth = 0.20;
    double bed_slope = 0.05;
    double flow_velocity = 1.0;
    double injection_rate = 2.0;
    bool poisson_injection = false;
    double duration = 200.0;
    double dt = 1e-4;
    double fs = 200.0;
    std::uint64_t seed = 1;

    double bed_node_spacing = 0.01;
    double bed_roughness_std = 1e-3;

    GrainDistribution grains;
    double solid_density = 2650.0;

    double fluid_density = 1000.0;
    double fluid_viscosity = 1e-3;
    double stochastic_sigma = 1e-8;
    double profile_exponent = 1.0 / 7.0;
    std::optional<double> z0;  // unset: D50 / 30

    double normal_stiffness = 17118.0;
    double tangential_ratio = 2.0 / 7.0;
    double friction = 0.5;
    double bed_resistance = 0.1;

    EventParams events;
    WaterForcingParams water;
    MediumModel medium;

    std::optional<double> receiver_x;  // unset: domain centre
    double receiver_offset = 1.0;
    double r_min = 0.1;

    bool mix_energy_fractions = true;
    MixWeights mix{0.25, 0.25, 0.25, 0.25};

    double source_cell = 0.1;

    std::size_t psd_segment = 4096;
    double psd_overlap = 0.5;
    Taper psd_taper = Taper::Hann;
    double rmsa_window = 60.0;
    double rmsa_lo = 0.5;
    double rmsa_hi = 95.0;
    double trajectory_interval = 0.05;
    TransportThresholds thresholds;

    double d50() const { return grains.median(); }

    FlowProfile flow_profile() const {
        return {flow_velocity, flow_depth, z0.value_or(d50() / 30.0), profile_exponent};
    }

    ReceiverGeometry receiver() const {
        return {receiver_x.value_or(0.5 * domain_length), receiver_offset, r_min};
    }

    DynamicsParams dynamics() const {
        DynamicsParams d;
        d.dt = dt;
        d.flow_velocity = flow_velocity;
        d.fluid_density = fluid_density;
        d.fluid_viscosity = fluid_viscosity;
        d.noise_sigma = stochastic_sigma;
        d.solid_density = solid_density;
        d.normal_stiffness = normal_stiffness;
        d.tangential_ratio = tangential_ratio;
        d.friction = friction;
        d.bed_resistance = bed_resistance;
        d.events = events;
        return d;
    }

    std::size_t bed_nodes() const {
        return static_cast<std::size_t>(std::llround(domain_length / bed_node_spacing)) + 1;
    }

    double shedding_frequency() const {
        const double d = water.shed_length > 0.0 ? water.shed_length : d50();
        return strouhal_frequency(water.strouhal, flow_velocity, d);
    }

    void validate() const {
        using detail::require_config;
        require_config(domain_length > 0.0 && std::isfinite(domain_length), "domain_length", "must be positive");
        require_config(flow_depth > 0.0 && std::isfinite(flow_depth), "flow_depth", "must be positive");
        require_config(bed_slope >= 0.0 && std::isfinite(bed_slope), "bed_slope", "must be non-negative");
        require_config(flow_velocity > 0.0 && std::isfinite(flow_velocity), "flow_velocity", "must be positive");
        require_config(injection_rate >= 0.0 && std::isfinite(injection_rate), "injection_rate",
                       "must be non-negative");
        require_config(duration >= 0.0 && std::isfinite(duration), "duration", "must be non-negative");
        require_config(dt > 0.0, "dt", "must be positive");
        require_config(fs > 0.0, "fs", "must be positive");
        require_config(duration == 0.0 || fs * duration >= 2.0, "duration", "fs * duration must give two samples");
        require_config(bed_node_spacing > 0.0 && bed_node_spacing <= domain_length, "bed.node_spacing",
                       "must lie in (0, domain_length]");
        require_config(bed_roughness_std >= 0.0, "bed.roughness_std", "must be non-negative");
        grains.validate();
        require_config(solid_density > 0.0, "grains.solid_density", "must be positive");
        require_config(!z0 || *z0 > 0.0, "fluid.z0", "must be positive");
        require_config(profile_exponent > 0.0 && profile_exponent < 1.0, "fluid.profile_exponent",
                       "must lie in (0, 1)");
        dynamics().validate();
        water.validate();
        require_config(water.taper_hi <= 0.5 * fs, "water.taper_band", "upper edge exceeds the Nyquist frequency");
        medium.validate();
        receiver().validate();
        mix.validate();
        require_config(source_cell > 0.0, "propagation.source_cell", "must be positive");
        require_config(psd_segment >= 16, "analysis.psd_segment", "must be at least 16");
        require_config(psd_overlap >= 0.0 && psd_overlap < 1.0, "analysis.psd_overlap", "must lie in [0, 1)");
        require_config(rmsa_window * fs >= 1.0, "analysis.rmsa_window", "must span at least one sample");
        require_config(rmsa_lo > 0.0 && rmsa_lo < rmsa_hi && rmsa_hi < 0.5 * fs, "analysis.rmsa_band",
                       "must satisfy 0 < low < high < fs/2");
        require_config(trajectory_interval > 0.0, "analysis.trajectory_interval", "must be positive");
        thresholds.validate();
    }
};

namespace detail {

/// Reads a JSON object, remembering which keys were consumed so that
/// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw InvalidConfiguration(label() + ": expected an object", label());
    }

    template <class T>
    void read(const char* key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const Json::exception&) {
            throw InvalidConfiguration(path(key) + ": wrong type", path(key));
        }
    }

    template <class T>
    void read(const char* key, std::optional<T>& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        T v{};
        read_value(key, v);
        out = v;
    }

    void read_band(const char* key, double& lo, double& hi) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        const Json& v = j_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw InvalidConfiguration(path(key) + ": expected [low, high]", path(key));
        }
        lo = v[0].get<double>();
        hi = v[1].get<double>();
    }

    std::optional<ObjectReader> child(const char* key) {
        if (!j_.contains(key)) return std::nullopt;
        seen_.insert(key);
        return ObjectReader(j_.at(key), path(key));
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw InvalidConfiguration(path(k) + ": unknown key", path(k));
        }
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

private:
    template <class T>
    void read_value(const char* key, T& v) {
        try {
            v = j_.at(key).get<T>();
        } catch (const Json::exception&) {
            throw InvalidConfiguration(path(key) + ": wrong type", path(key));
        }
    }

    std::string label() const { return prefix_.empty() ? "config" : prefix_; }

    const Json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

}  // namespace detail

/// Overlays the entries of `j` onto `c`. Unknown keys are rejected.
inline void apply_json(SimulationConfig& c, const Json& j) {
    detail::ObjectReader r(j, "");
    std::string preset_marker;
    r.read("preset", preset_marker);  // resolved by the caller
    r.read("name", c.name);
    r.read("domain_length", c.domain_length);
    r.read("flow_depth", c.flow_depth);
    r.read("bed_slope", c.bed_slope);
    r.read("flow_velocity", c.flow_velocity);
    r.read("injection_rate", c.injection_rate);
    r.read("poisson_injection", c.poisson_injection);
    r.read("duration", c.duration);
    r.read("dt", c.dt);
    r.read("fs", c.fs);
    r.read("seed", c.seed);
    std::string comment;
    r.read("comment", comment);  // free text, ignored

    if (auto b = r.child("bed")) {
        b->read("node_spacing", c.bed_node_spacing);
        b->read("roughness_std", c.bed_roughness_std);
        b->finish();
    }
    if (auto g = r.child("grains")) {
        g->read("mode_diameter", c.grains.mode_diameter);
        g->read("sigma_log", c.grains.sigma_log);
        g->read("d_min", c.grains.d_min);
        g->read("d_max", c.grains.d_max);
        g->read("solid_density", c.solid_density);
        g->finish();
    }
    if (auto f = r.child("fluid")) {
        f->read("density", c.fluid_density);
        f->read("viscosity", c.fluid_viscosity);
        f->read("stochastic_sigma", c.stochastic_sigma);
        f->read("profile_exponent", c.profile_exponent);
        f->read("z0", c.z0);
        f->finish();
    }
    if (auto k = r.child("contact")) {
        k->read("normal_stiffness", c.normal_stiffness);
        k->read("tangential_ratio", c.tangential_ratio);
        k->read("friction", c.friction);
        k->read("bed_resistance", c.bed_resistance);
        k->finish();
    }
    if (auto e = r.child("events")) {
        e->read("restitution", c.events.e);
        e->read("rolling_impulse_factor", c.events.alpha_roll_impulse);
        e->read("impact_beta", c.events.beta);
        e->read("impact_gamma", c.events.gamma);
        e->read("rolling_velocity_factor", c.events.roll_vx_factor);
        e->read("rolling_height_factor", c.events.roll_height_factor);
        e->read("rolling_duration_factor", c.events.rolling_duration_factor);
        e->finish();
    }
    if (auto w = r.child("water")) {
        w->read("velocity_exponent", c.water.p);
        w->read("w_turb", c.water.w_turb);
        w->read("w_tone", c.water.w_tone);
        w->read_band("turb_band", c.water.turb_lo, c.water.turb_hi);
        w->read_band("taper_band", c.water.taper_lo, c.water.taper_hi);
        w->read("strouhal", c.water.strouhal);
        w->read("shed_length", c.water.shed_length);
        w->read("shed_rel_bandwidth", c.water.shed_rel_bandwidth);
        w->read("amplitude_scale", c.water.amplitude_scale);
        w->read("smoothing_window", c.water.smoothing_window);
        w->read("grid_points", c.water.grid_points);
        w->finish();
    }
    if (auto m = r.child("medium")) {
        m->read("density", c.medium.rho_m);
        m->read("phase_velocity", c.medium.v_c);
        m->read("group_velocity", c.medium.v_u);
        m->read("quality_factor", c.medium.Q);
        m->finish();
    }
    if (auto g = r.child("receiver")) {
        g->read("x", c.receiver_x);
        g->read("offset", c.receiver_offset);
        g->read("r_min", c.r_min);
        g->finish();
    }
    if (auto m = r.child("mix")) {
        std::string mode = c.mix_energy_fractions ? "energy" : "raw";
        m->read("mode", mode);
        if (mode != "energy" && mode != "raw") {
            throw InvalidConfiguration("mix.mode: expected \"energy\" or \"raw\"", "mix.mode");
        }
        c.mix_energy_fractions = mode == "energy";
        m->read("rolling", c.mix.alpha_roll);
        m->read("impact", c.mix.alpha_imp);
        m->read("turb", c.mix.alpha_turb);
        m->read("shed", c.mix.alpha_shed);
        m->finish();
    }
    if (auto p = r.child("propagation")) {
        p->read("source_cell", c.source_cell);
        p->finish();
    }
    if (auto a = r.child("analysis")) {
        a->read("psd_segment", c.psd_segment);
        a->read("psd_overlap", c.psd_overlap);
        std::string taper = c.psd_taper == Taper::Hann ? "hann" : "rectangular";
        a->read("psd_window", taper);
        if (taper != "hann" && taper != "rectangular") {
            throw InvalidConfiguration("analysis.psd_window: expected \"hann\" or \"rectangular\"",
                                       "analysis.psd_window");
        }
        c.psd_taper = taper == "hann" ? Taper::Hann : Taper::Rectangular;
        a->read("rmsa_window", c.rmsa_window);
        a->read_band("rmsa_band", c.rmsa_lo, c.rmsa_hi);
        a->read("trajectory_interval", c.trajectory_interval);
        a->read("stuck_height_factor", c.thresholds.z_rel_factor);
        a->read("stuck_velocity", c.thresholds.v_thresh);
        a->finish();
    }
    r.finish();
}

/// Canonical JSON of a resolved configuration. Keys come out sorted, so the
/// dump is stable and suitable for hashing.
inline Json to_json(const SimulationConfig& c) {
    Json j;
    j["name"] = c.name;
    j["domain_length"] = c.domain_length;
    j["flow_depth"] = c.flow_depth;
    j["bed_slope"] = c.bed_slope;
    j["flow_velocity"] = c.flow_velocity;
    j["injection_rate"] = c.injection_rate;
    j["poisson_injection"] = c.poisson_injection;
    j["duration"] = c.duration;
    j["dt"] = c.dt;
    j["fs"] = c.fs;
    j["seed"] = c.seed;
    j["bed"] = {{"node_spacing", c.bed_node_spacing}, {"roughness_std", c.bed_roughness_std}};
    j["grains"] = {{"mode_diameter", c.grains.mode_diameter},
                   {"sigma_log", c.grains.sigma_log},
                   {"d_min", c.grains.d_min},
                   {"d_max", c.grains.d_max},
                   {"solid_density", c.solid_density}};
    j["fluid"] = {{"density", c.fluid_density},
                  {"viscosity", c.fluid_viscosity},
                  {"stochastic_sigma", c.stochastic_sigma},
                  {"profile_exponent", c.profile_exponent},
                  {"z0", c.z0 ? Json(*c.z0) : Json(nullptr)}};
    j["contact"] = {{"normal_stiffness", c.normal_stiffness},
                    {"tangential_ratio", c.tangential_ratio},
                    {"friction", c.friction},
                    {"bed_resistance", c.bed_resistance}};
    j["events"] = {{"restitution", c.events.e},
                   {"rolling_impulse_factor", c.events.alpha_roll_impulse},
                   {"impact_beta", c.events.beta},
                   {"impact_gamma", c.events.gamma},
                   {"rolling_velocity_factor", c.events.roll_vx_factor},
                   {"rolling_height_factor", c.events.roll_height_factor},
                   {"rolling_duration_factor", c.events.rolling_duration_factor}};
    j["water"] = {{"velocity_exponent", c.water.p},
                  {"w_turb", c.water.w_turb},
                  {"w_tone", c.water.w_tone},
                  {"turb_band", {c.water.turb_lo, c.water.turb_hi}},
                  {"taper_band", {c.water.taper_lo, c.water.taper_hi}},
                  {"strouhal", c.water.strouhal},
                  {"shed_length", c.water.shed_length},
                  {"shed_rel_bandwidth", c.water.shed_rel_bandwidth},
                  {"amplitude_scale", c.water.amplitude_scale},
                  {"smoothing_window", c.water.smoothing_window},
                  {"grid_points", c.water.grid_points}};
    j["medium"] = {{"density", c.medium.rho_m},
                   {"phase_velocity", c.medium.v_c},
                   {"group_velocity", c.medium.v_u},
                   {"quality_factor", c.medium.Q}};
    j["receiver"] = {{"x", c.receiver_x ? Json(*c.receiver_x) : Json(nullptr)},
                     {"offset", c.receiver_offset},
                     {"r_min", c.r_min}};
    j["mix"] = {{"mode", c.mix_energy_fractions ? "energy" : "raw"},
                {"rolling", c.mix.alpha_roll},
                {"impact", c.mix.alpha_imp},
                {"turb", c.mix.alpha_turb},
                {"shed", c.mix.alpha_shed}};
    j["propagation"] = {{"source_cell", c.source_cell}};
    j["analysis"] = {{"psd_segment", c.psd_segment},
                     {"psd_overlap", c.psd_overlap},
                     {"psd_window", c.psd_taper == Taper::Hann ? "hann" : "rectangular"},
                     {"rmsa_window", c.rmsa_window},
                     {"rmsa_band", {c.rmsa_lo, c.rmsa_hi}},
                     {"trajectory_interval", c.trajectory_interval},
                     {"stuck_height_factor", c.thresholds.z_rel_factor},
                     {"stuck_velocity", c.thresholds.v_thresh}};
    return j;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    try {
        return Json::parse(text, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw InvalidConfiguration(origin + ": parse error: " + e.what(), origin);
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path preset_directory() {
    if (const char* env = std::getenv("BEDSEIS_PRESET_DIR")) return env;
    return BEDSEIS_PRESET_DIR;
}

/// Resolved configuration of a named preset on top of the defaults.
inline SimulationConfig load_preset(const std::string& name) {
    for (char ch : name) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) {
            throw InvalidConfiguration("preset: invalid name '" + name + "'", "preset");
        }
    }
    const auto path = preset_directory() / (name + ".json");
    if (!std::filesystem::exists(path)) throw InvalidConfiguration("preset: unknown preset '" + name + "'", "preset");
    SimulationConfig c;
    apply_json(c, parse_json_text(read_text_file(path), path.string()));
    c.name = name;
    c.validate();
    return c;
}

/// Builds a configuration from JSON text. A "preset" entry selects the base;
/// everything else overrides it.
inline SimulationConfig config_from_json(const Json& j) {
    SimulationConfig c;
    if (j.is_object() && j.contains("preset")) {
        if (!j.at("preset").is_string()) throw InvalidConfiguration("preset: expected a string", "preset");
        c = load_preset(j.at("preset").get<std::string>());
    }
    apply_json(c, j);
    c.validate();
    return c;
}

inline SimulationConfig load_config(const std::filesystem::path& path) {
    return config_from_json(parse_json_text(read_text_file(path), path.string()));
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) noexcept {
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline std::string config_hash(const SimulationConfig& c) { return hex64(fnv1a(to_json(c).dump())); }

}  // namespace bedseis
