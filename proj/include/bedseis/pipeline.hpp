#pragma once

// End-to-end run: particles -> events -> bed forces -> ground velocity ->
// spectra and transport statistics, with CSV and manifest output.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <fmt/os.h>

#include "bedseis/config.hpp"
#include "bedseis/error.hpp"
#include "bedseis/signal_analysis.hpp"
#include "bedseis/simulation.hpp"
#include "bedseis/source_forcing.hpp"
#include "bedseis/wave_propagation.hpp"

namespace bedseis {

// ---------------------------------------------------------------------------
// CSV

/// Comma-separated table with a header row. Numbers are written in shortest
/// round-trip form, so output is byte-stable for identical values.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot write " + path.string());
        std::string line;
        for (auto h : header) {
            if (!line.empty()) line += ',';
            line += h;
        }
        out_ << line << '\n';
    }

    template <class... Ts>
    void row(const Ts&... cells) {
        buf_.clear();
        bool first = true;
        ((append(cells, first)), ...);
        buf_ += '\n';
        out_ << buf_;
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("failed writing " + path_.string());
    }

private:
    template <class T>
    void append(const T& v, bool& first) {
        if (!first) buf_ += ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            if (std::isnan(v)) {
                buf_ += "nan";
                return;
            }
        }
        fmt::format_to(std::back_inserter(buf_), "{}", v);
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::string buf_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return columns[i];
        }
        throw IoError("missing column '" + std::string(name) + "'");
    }
    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

/// Reads a numeric CSV. Non-numeric cells (e.g. a kind label) become NaN.
inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    const auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = s.find(',', start);
            cells.push_back(s.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        for (auto& c : cells) {
            while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
            while (!c.empty() && c.front() == ' ') c.erase(c.begin());
        }
        return cells;
    };
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    t.header = split(line);
    t.columns.resize(t.header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw IoError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), lineno, t.header.size(),
                                      cells.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            const char* b = cells[i].data();
            const char* e = b + cells[i].size();
            const auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc() || res.ptr != e) v = std::numeric_limits<double>::quiet_NaN();
            t.columns[i].push_back(v);
        }
    }
    return t;
}

inline PsdResult read_psd_csv(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    PsdResult p;
    p.frequencies = t.column("freq_hz");
    p.power = t.column("power");
    if (p.frequencies.size() < 2) throw IoError(path.string() + ": need at least two PSD rows");
    const double df = p.frequencies[1] - p.frequencies[0];
    p.fs = df > 0.0 ? 2.0 * p.frequencies.back() : 0.0;
    p.segment_length = df > 0.0 ? static_cast<std::size_t>(std::llround(p.fs / df)) : 0;
    return p;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineRun {
    SimulationConfig config;
    Json manifest;
    SimulationResult sim;
    TransportMetrics transport;
    std::vector<double> seismogram;
    std::array<std::vector<double>, 4> components;  // weighted, in kMechanisms order
    std::array<double, 4> component_variance{};     // unweighted
    std::array<double, 4> energy_fraction{};        // of the total seismogram variance
    PsdResult psd_total;
    std::array<PsdResult, 4> psd_components;
    MixWeights weights;
    std::size_t impacts = 0;
    std::size_t rolling = 0;
    bool distance_clamped = false;
};

namespace detail {

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string file_hash(const std::filesystem::path& p) { return hex64(fnv1a(read_text_file(p))); }

inline std::size_t mechanism_index(Mechanism m) noexcept {
    for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
        if (kMechanisms[i] == m) return i;
    }
    return 0;
}

/// Removes what a failed run managed to write.
class OutputGuard {
public:
    explicit OutputGuard(std::filesystem::path dir) : dir_(std::move(dir)) {}
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) std::filesystem::remove(dir_ / f, ec);
        std::filesystem::remove(dir_ / "manifest.json", ec);
    }
    std::filesystem::path add(const std::string& name) {
        files_.push_back(name);
        return dir_ / name;
    }
    const std::vector<std::string>& files() const noexcept { return files_; }
    void commit() noexcept { committed_ = true; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
    bool committed_ = false;
};

inline void write_psd(const std::filesystem::path& path, const PsdResult& p) {
    CsvWriter w(path, {"freq_hz", "power"});
    for (std::size_t k = 0; k < p.power.size(); ++k) w.row(p.frequencies[k], p.power[k]);
    w.close();
}

inline void write_series(const std::filesystem::path& path, std::string_view column, std::span<const double> v,
                         double fs) {
    CsvWriter w(path, {"time_s", column});
    for (std::size_t k = 0; k < v.size(); ++k) w.row(static_cast<double>(k) / fs, v[k]);
    w.close();
}

}  // namespace detail

inline SimulationSetup make_setup(const SimulationConfig& c) {
    SimulationSetup s;
    s.bed = build_bed(c.domain_length, c.bed_slope, c.bed_nodes(), c.bed_roughness_std,
                      derive_seed(c.seed, Stream::Bed));
    s.flow = c.flow_profile();
    s.grains = c.grains;
    s.dynamics = c.dynamics();
    s.flow_depth = c.flow_depth;
    s.injection_rate = c.injection_rate;
    s.poisson_injection = c.poisson_injection;
    s.duration = c.duration;
    s.record_interval = c.trajectory_interval;
    s.seed = c.seed;
    return s;
}

/// Executes a full run and writes every artifact into out_dir. On failure the
/// files written so far are removed and the error is rethrown.
inline PipelineRun run_pipeline(const SimulationConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    const std::string started = detail::utc_now();
    const auto wall0 = std::chrono::steady_clock::now();

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    detail::OutputGuard guard(out_dir);

    PipelineRun run;
    run.config = config;
    const double fs = config.fs;
    const std::size_t n_samples = sample_count(config.duration, fs);
    const std::size_t n_fft = std::max<std::size_t>(next_pow2(n_samples), 2);

    // (i)-(ii) trajectories and classified bed contacts
    const SimulationSetup setup = make_setup(config);
    run.sim = run_simulation(setup);
    for (const auto& ev : run.sim.events) (ev.kind == EventKind::Impact ? run.impacts : run.rolling)++;

    {
        CsvWriter w(guard.add("bed.csv"), {"x_m", "z_m"});
        for (std::size_t k = 0; k < setup.bed.node_x.size(); ++k) w.row(setup.bed.node_x[k], setup.bed.node_z[k]);
        w.close();
    }
    {
        CsvWriter w(guard.add("trajectories.csv"), {"time_s", "particle_id", "x_m", "z_m", "vx_ms", "vz_ms", "diameter_m"});
        for (const auto& s : run.sim.trajectories) w.row(s.time, s.particle_id, s.x, s.z, s.vx, s.vz, s.diameter);
        w.close();
    }
    {
        CsvWriter w(guard.add("events.csv"), {"time_s", "kind", "particle_id", "x_m", "impulse_Ns", "tc_s", "pre_vz_ms"});
        for (const auto& e : run.sim.events) {
            w.row(e.time, to_string(e.kind), e.particle_id, e.x_position, e.impulse_J, e.contact_time_tc, e.pre_vz);
        }
        w.close();
    }

    // (iii) particle forcing
    auto [impact_force, rolling_force] = assemble_particle_forcing(run.sim.events, fs, config.duration);
    detail::write_series(guard.add("forcing_impact.csv"), "force_N", impact_force.values, fs);
    detail::write_series(guard.add("forcing_rolling.csv"), "force_N", rolling_force.values, fs);

    // (iv) hydrodynamic forcing, smoothed over the interaction time
    std::vector<double> turb_force(n_samples, 0.0);
    std::vector<double> shed_force(n_samples, 0.0);
    const auto grid = water_grid(config.domain_length, config.water.grid_points);
    if (n_samples > 0) {
        const std::size_t n_gen = std::max<std::size_t>(n_samples, 256);
        auto s_turb = turbulence_signal(n_gen, fs, config.water, derive_seed(config.seed, Stream::Turbulence));
        auto s_tone = shedding_signal(n_gen, fs, config.shedding_frequency(), config.water.shed_rel_bandwidth,
                                      derive_seed(config.seed, Stream::Shedding));
        s_turb.resize(n_samples);
        s_tone.resize(n_samples);
        const auto u_eff = effective_velocity(setup.flow, config.d50(), n_samples);
        auto [turb, tone] = water_forcing_components(u_eff, config.water, s_turb, s_tone);
        ForcingSeries t{Mechanism::Turbulence, 0.0, fs, std::move(turb), 0.0, grid};
        ForcingSeries sh{Mechanism::Shedding, 0.0, fs, std::move(tone), 0.0, grid};
        if (config.water.smoothing_window > 0.0) {
            t = smooth_forcing(t, config.water.smoothing_window);
            sh = smooth_forcing(sh, config.water.smoothing_window);
        }
        turb_force = std::move(t.values);
        shed_force = std::move(sh.values);
    }
    detail::write_series(guard.add("forcing_turb.csv"), "force_N", turb_force, fs);
    detail::write_series(guard.add("forcing_shed.csv"), "force_N", shed_force, fs);

    // (v)-(vi) propagation and mixing
    const ReceiverGeometry geom = config.receiver();
    if (n_samples >= 2) {
        MechanismSpectra spectra;
        const double L = config.domain_length;
        spectra.impact = propagate_particle_events(run.sim.events, EventKind::Impact, geom, config.medium, fs, n_fft,
                                                   config.duration, L, config.source_cell, &run.distance_clamped);
        spectra.rolling = propagate_particle_events(run.sim.events, EventKind::Rolling, geom, config.medium, fs, n_fft,
                                                    config.duration, L, config.source_cell, &run.distance_clamped);
        spectra.turb = propagate_distributed({Mechanism::Turbulence, 0.0, fs, turb_force, 0.0, grid}, geom,
                                             config.medium, fs, n_fft, L, &run.distance_clamped);
        spectra.shed = propagate_distributed({Mechanism::Shedding, 0.0, fs, shed_force, 0.0, grid}, geom,
                                             config.medium, fs, n_fft, L, &run.distance_clamped);
        if (run.distance_clamped) {
            fmt::print(stderr, "note: source-receiver distances below r_min = {} m were clamped\n", geom.r_min);
        }

        std::array<std::vector<double>, 4> raw;
        for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
            raw[i] = to_time_series(spectra[kMechanisms[i]]);
            raw[i].resize(n_samples);
            run.component_variance[i] = variance(raw[i]);
        }
        run.weights = config.mix_energy_fractions ? weights_from_fractions(config.mix, run.component_variance)
                                                  : config.mix;
        run.seismogram = synthesize_total(spectra, run.weights, fs, n_fft);
        run.seismogram.resize(n_samples);
        {
            // one-sided mixed spectrum, before truncation to the run length
            CsvWriter w(guard.add("spectrum_total.csv"), {"freq_hz", "re", "im"});
            for (std::size_t k = 0; k <= n_fft / 2; ++k) {
                Complex z{};
                for (Mechanism m : kMechanisms) z += run.weights[m] * spectra[m].values[k];
                w.row(spectra.impact.frequency(k), z.real(), z.imag());
            }
            w.close();
        }
        const double total_var = variance(run.seismogram);
        for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
            const double a = run.weights[kMechanisms[i]];
            run.components[i] = raw[i];
            for (auto& v : run.components[i]) v *= a;
            run.energy_fraction[i] = total_var > 0.0 ? a * a * run.component_variance[i] / total_var : 0.0;
        }
    } else {
        run.seismogram.assign(n_samples, 0.0);
        CsvWriter(guard.add("spectrum_total.csv"), {"freq_hz", "re", "im"}).close();
        for (auto& c : run.components) c.assign(n_samples, 0.0);
    }
    detail::write_series(guard.add("seismogram.csv"), "velocity_ms", run.seismogram, fs);

    // (vii) spectra of the total and of each weighted contribution
    const std::size_t seg = std::min(config.psd_segment, n_samples);
    const auto psd_of = [&](std::span<const double> x) {
        if (seg < 2) return PsdResult{{}, {}, fs, seg, config.psd_overlap};
        return psd_welch(x, fs, seg, config.psd_overlap, config.psd_taper);
    };
    run.psd_total = psd_of(run.seismogram);
    detail::write_psd(guard.add("psd_total.csv"), run.psd_total);
    for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
        run.psd_components[i] = psd_of(run.components[i]);
        detail::write_psd(guard.add(fmt::format("psd_{}.csv", to_string(kMechanisms[i]))), run.psd_components[i]);
    }

    {
        std::vector<double> env;
        if (n_samples >= 2 && config.rmsa_hi < 0.5 * fs) {
            env = rmsa_envelope(run.seismogram, fs, config.rmsa_window, config.rmsa_lo, config.rmsa_hi);
        }
        detail::write_series(guard.add("rmsa.csv"), "rmsa_ms", env, fs);
    }

    // transport statistics
    run.transport = transport_metrics(run.sim.trajectories, run.sim.masses, config.thresholds, setup.bed,
                                      run.sim.record_interval);
    {
        CsvWriter w(guard.add("transport_timeseries.csv"),
                    {"time_s", "alive", "stuck_fraction", "mean_z_rel", "mean_moving_vx_ms", "bulk_flux_kgms"});
        const auto& m = run.transport;
        for (std::size_t k = 0; k < m.time.size(); ++k) {
            w.row(m.time[k], m.alive[k], m.stuck_fraction[k], m.mean_z_rel[k], m.mean_moving_vx[k], m.bulk_flux[k]);
        }
        w.close();
    }
    {
        CsvWriter w(guard.add("transport_particles.csv"), {"particle_id", "diameter_m", "mass_kg", "lifetime_s",
                                                          "rest_time_s", "suspension_time_s", "mobility"});
        for (const auto& p : run.transport.particles) {
            w.row(p.id, p.diameter, p.mass, p.lifetime, p.rest_time, p.suspension_time, to_string(p.mobility));
        }
        w.close();
    }

    // manifest
    Json outputs = Json::array();
    for (const auto& f : guard.files()) {
        outputs.push_back({{"file", f},
                           {"bytes", std::filesystem::file_size(out_dir / f)},
                           {"fnv1a64", detail::file_hash(out_dir / f)}});
    }
    Json mix = Json::object();
    Json frac = Json::object();
    for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
        mix[std::string(to_string(kMechanisms[i]))] = run.weights[kMechanisms[i]];
        frac[std::string(to_string(kMechanisms[i]))] = run.energy_fraction[i];
    }
    const auto& diag = run.sim.diagnostics;
    Json m;
    m["tool"] = "bedseis";
    m["tool_version"] = BEDSEIS_VERSION;
    m["config_hash"] = config_hash(config);
    m["seed"] = config.seed;
    m["start_time_utc"] = started;
    m["end_time_utc"] = detail::utc_now();
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    m["outputs"] = outputs;
    m["config"] = to_json(config);
    m["summary"] = {
        {"particles", run.sim.diameters.size()},
        {"impact_events", run.impacts},
        {"rolling_events", run.rolling},
        {"samples", n_samples},
        {"fft_length", n_fft},
        {"mix_weights", mix},
        {"variance_fractions", frac},
        {"psd_peak_hz", run.psd_total.power.empty() ? Json(nullptr) : Json(peak_frequency(run.psd_total))},
        {"max_coulomb_excess_N",
         std::isfinite(diag.max_coulomb_excess) ? Json(diag.max_coulomb_excess) : Json(nullptr)},
        {"pair_contacts", diag.pair_contacts},
        {"distance_clamped", run.distance_clamped},
        {"note", "per-mechanism PSDs are component diagnostics; they do not add up to the total PSD"},
    };
    run.manifest = m;
    {
        std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write manifest.json");
        out << m.dump(2) << '\n';
        if (!out) throw IoError("failed writing manifest.json");
    }
    guard.commit();
    return run;
}

// ---------------------------------------------------------------------------
// Spectrum comparison

struct SpectrumComparison {
    double peak_synthetic_hz = 0.0;
    double peak_reference_hz = 0.0;
    double peak_offset_hz = 0.0;  // synthetic minus reference
    double misfit = 0.0;          // mean |normalised difference| over the band
    bool resampled = false;
    std::vector<std::array<double, 2>> bands;
    std::vector<double> fraction_synthetic;
    std::vector<double> fraction_reference;
};

inline std::vector<double> interpolate_linear(std::span<const double> x, std::span<const double> y,
                                              std::span<const double> at) {
    std::vector<double> out(at.size(), 0.0);
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double q = at[i];
        if (q <= x.front()) {
            out[i] = y.front();
        } else if (q >= x.back()) {
            out[i] = y.back();
        } else {
            const auto it = std::upper_bound(x.begin(), x.end(), q);
            const auto k = static_cast<std::size_t>(it - x.begin());
            const double t = (q - x[k - 1]) / (x[k] - x[k - 1]);
            out[i] = y[k - 1] + t * (y[k] - y[k - 1]);
        }
    }
    return out;
}

/// Compares two PSDs on the synthetic grid (the reference is resampled when
/// the grids differ). Both are normalised to unit peak before the misfit.
inline SpectrumComparison compare_spectra(const PsdResult& synthetic, const PsdResult& reference, double band_lo,
                                          double band_hi) {
    detail::require_config(band_lo < band_hi, "band", "low edge must be below high edge");
    SpectrumComparison r;
    PsdResult ref = reference;
    if (ref.frequencies != synthetic.frequencies) {
        ref.power = interpolate_linear(reference.frequencies, reference.power, synthetic.frequencies);
        ref.frequencies = synthetic.frequencies;
        r.resampled = true;
    }
    const auto ns = normalize_psd(synthetic);
    const auto nr = normalize_psd(ref);
    r.peak_synthetic_hz = peak_frequency(ns);
    r.peak_reference_hz = peak_frequency(nr);
    r.peak_offset_hz = r.peak_synthetic_hz - r.peak_reference_hz;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < ns.power.size(); ++k) {
        const double f = ns.frequencies[k];
        if (f < band_lo || f > band_hi) continue;
        acc += std::abs(ns.power[k] - nr.power[k]);
        ++count;
    }
    r.misfit = count ? acc / static_cast<double>(count) : 0.0;

    const double nyq = synthetic.frequencies.back();
    const std::array<double, 6> edges{0.0, 10.0, 30.0, 50.0, 70.0, nyq};
    const auto fractions = [&](const PsdResult& p) {
        std::vector<double> f(edges.size() - 1, 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < p.power.size(); ++k) {
            total += p.power[k];
            for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
                const bool last = b + 2 == edges.size();
                if (p.frequencies[k] >= edges[b] && (p.frequencies[k] < edges[b + 1] || last)) {
                    f[b] += p.power[k];
                    break;
                }
            }
        }
        if (total > 0.0) {
            for (auto& v : f) v /= total;
        }
        return f;
    };
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) r.bands.push_back({edges[b], edges[b + 1]});
    r.fraction_synthetic = fractions(synthetic);
    r.fraction_reference = fractions(ref);
    return r;
}

inline Json to_json(const SpectrumComparison& c) {
    Json bands = Json::array();
    for (std::size_t b = 0; b < c.bands.size(); ++b) {
        bands.push_back({{"low_hz", c.bands[b][0]},
                         {"high_hz", c.bands[b][1]},
                         {"synthetic_fraction", c.fraction_synthetic[b]},
                         {"reference_fraction", c.fraction_reference[b]}});
    }
    return {{"peak_synthetic_hz", c.peak_synthetic_hz},
            {"peak_reference_hz", c.peak_reference_hz},
            {"peak_offset_hz", c.peak_offset_hz},
            {"misfit", c.misfit},
            {"resampled", c.resampled},
            {"bands", bands}};
}

// ---------------------------------------------------------------------------
// Metrics from stored trajectories

/// Bed profile rebuilt from its exported nodes.
inline BedProfile bed_from_nodes(std::vector<double> x, std::vector<double> z) {
    detail::require_config(x.size() >= 2 && x.size() == z.size(), "bed", "need at least two (x, z) nodes");
    for (std::size_t k = 1; k < x.size(); ++k) {
        detail::require_config(x[k] > x[k - 1], "bed", "node_x must be strictly increasing");
    }
    detail::require_config(x.front() == 0.0, "bed", "node_x must start at 0");
    // Uniform spacing is assumed, as produced by build_bed.
    BedProfile bed = build_bed(x.back(), 0.0, x.size(), 0.0, 0);
    bed.node_z = std::move(z);
    const std::size_t n = bed.node_z.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = bed.node_z[k];
        const double b = bed.node_z[k + 1];
        for (int j = 0; j < kBedRefinement; ++j) {
            bed.fine_z[k * kBedRefinement + static_cast<std::size_t>(j)] = a + (b - a) * j / kBedRefinement;
        }
    }
    bed.fine_z.back() = bed.node_z.back();
    bed.slope = (bed.node_z.front() - bed.node_z.back()) / bed.length();
    return bed;
}

inline std::vector<TrajectorySample> read_trajectories(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto& time = t.column("time_s");
    const auto& id = t.column("particle_id");
    const auto& x = t.column("x_m");
    const auto& z = t.column("z_m");
    const auto& vx = t.column("vx_ms");
    const auto& vz = t.column("vz_ms");
    const auto& d = t.column("diameter_m");
    std::vector<TrajectorySample> out(t.rows());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = {time[k], static_cast<int>(id[k]), x[k], z[k], vx[k], vz[k], d[k]};
    }
    return out;
}

/// Sampling interval of a trajectory table: the mean gap between distinct
/// sampling instants, rounded to a nanosecond to undo time-stamp round-off.
inline double trajectory_interval(std::span<const TrajectorySample> traj) {
    std::size_t instants = traj.empty() ? 0 : 1;
    for (std::size_t k = 1; k < traj.size(); ++k) instants += traj[k].time != traj[k - 1].time;
    detail::require_config(instants >= 2, "trajectories", "need at least two sampling instants");
    const double mean = (traj.back().time - traj.front().time) / static_cast<double>(instants - 1);
    return std::round(mean * 1e9) / 1e9;
}

}  // namespace bedseis
