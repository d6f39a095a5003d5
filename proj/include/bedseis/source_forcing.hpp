#pragma once

// Bed forcing: force pulses from particle-bed events and the stochastic
// hydrodynamic load (broadband turbulence plus vortex shedding).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bedseis/error.hpp"
#include "bedseis/fft.hpp"
#include "bedseis/granular.hpp"
#include "bedseis/hydro_bed.hpp"
#include "bedseis/random.hpp"

namespace bedseis {

enum class Mechanism { Impact, Rolling, Turbulence, Shedding };

constexpr std::string_view to_string(Mechanism m) noexcept {
    switch (m) {
        case Mechanism::Impact: return "impact";
        case Mechanism::Rolling: return "rolling";
        case Mechanism::Turbulence: return "turb";
        case Mechanism::Shedding: return "shed";
    }
    return "unknown";
}

/// Uniformly sampled force. Sample k sits at t0 + k/fs. A point source acts at
/// location_x; a distributed one splits its total force equally over `grid`.
struct ForcingSeries {
    Mechanism mechanism = Mechanism::Impact;
    double t0 = 0.0;
    double fs = 200.0;
    std::vector<double> values;
    double location_x = 0.0;
    std::vector<double> grid;

    bool distributed() const noexcept { return !grid.empty(); }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) / fs; }
};

/// Point sources sharing one time grid, e.g. particle forcing binned in space.
struct SourceField {
    Mechanism mechanism = Mechanism::Impact;
    double fs = 200.0;
    std::size_t n = 0;
    std::vector<double> x;                    // source positions
    std::vector<std::vector<double>> values;  // one series of length n per position
};

struct WaterForcingParams {
    double p = 3.0;
    double w_turb = 0.8;
    double w_tone = 0.2;
    double turb_lo = 30.0;
    double turb_hi = 90.0;
    double taper_lo = 0.5;
    double taper_hi = 100.0;
    double strouhal = 0.2;
    double shed_length = 0.0;  // 0 selects D50
    double shed_rel_bandwidth = 0.1;
    double amplitude_scale = 1.0;  // N
    double smoothing_window = 0.01;  // s
    std::size_t grid_points = 16;

    void validate() const {
        detail::require_config(p >= 0.0, "water.velocity_exponent", "must be non-negative");
        detail::require_config(w_turb >= 0.0 && w_tone >= 0.0, "water.w_turb", "weights must be non-negative");
        detail::require_config(std::abs(w_turb + w_tone - 1.0) < 1e-9, "water.w_tone",
                               "w_turb + w_tone must equal 1");
        detail::require_config(taper_lo > 0.0 && taper_lo <= turb_lo && turb_lo < turb_hi && turb_hi <= taper_hi,
                               "water.turb_band", "must be nested inside water.taper_band");
        detail::require_config(strouhal > 0.0, "water.strouhal", "must be positive");
        detail::require_config(shed_length >= 0.0, "water.shed_length", "must be non-negative");
        detail::require_config(shed_rel_bandwidth > 0.0, "water.shed_rel_bandwidth", "must be positive");
        detail::require_config(amplitude_scale >= 0.0, "water.amplitude_scale", "must be non-negative");
        detail::require_config(smoothing_window >= 0.0, "water.smoothing_window", "must be non-negative");
        detail::require_config(grid_points >= 1, "water.grid_points", "need at least one location");
    }
};

// ---------------------------------------------------------------------------
// Event pulses

/// Ricker wavelet with peak frequency f0, unit value at t = 0.
inline double ricker(double t, double f0) noexcept {
    const double a = std::numbers::pi * std::numbers::pi * f0 * f0 * t * t;
    return (1.0 - 2.0 * a) * std::exp(-a);
}

/// Integral of the positive central lobe of ricker(., f0). In closed form
/// sqrt(2) exp(-1/2) / (pi f0).
inline double ricker_positive_lobe_integral(double f0) noexcept {
    return std::numbers::sqrt2 * std::exp(-0.5) / (std::numbers::pi * f0);
}

inline constexpr double kPulseHalfWidthCycles = 5.0;  // support is +-5/f0
inline constexpr int kPulseOversampling = 10;
inline constexpr double kSamplesPerContactDirect = 20.0;

namespace detail {

/// Blackman-windowed sinc low-pass for decimation by `factor`, unit DC gain.
inline std::vector<double> decimation_filter(int factor) {
    const int half = 8 * factor;
    std::vector<double> h(static_cast<std::size_t>(2 * half + 1));
    const double fc = 0.5 / factor;  // cycles per fine sample
    double sum = 0.0;
    for (int j = -half; j <= half; ++j) {
        const double x = static_cast<double>(j);
        const double sinc = j == 0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * x) / (std::numbers::pi * x);
        const double u = static_cast<double>(j + half) / (2.0 * half);
        const double w = 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * u) + 0.08 * std::cos(4.0 * std::numbers::pi * u);
        h[static_cast<std::size_t>(j + half)] = sinc * w;
        sum += sinc * w;
    }
    for (auto& v : h) v /= sum;
    return h;
}

}  // namespace detail

/// Force pulse F0 * ricker(t - event.time, 1/t_c) sampled on the grid k/fs.
/// F0 makes the positive-lobe impulse equal J. Pulses shorter than
/// 20 samples per t_c are built at a higher rate and low-passed down to fs.
inline ForcingSeries event_pulse(const ContactEvent& ev, double fs) {
    detail::require_contract(ev.impulse_J >= 0.0, "event_pulse: negative impulse");
    detail::require_contract(ev.contact_time_tc > 0.0, "event_pulse: contact time must be positive");
    detail::require_config(fs > 0.0, "fs", "must be positive");

    const double f0 = 1.0 / ev.contact_time_tc;
    const double amp = ev.impulse_J / ricker_positive_lobe_integral(f0);
    const double half = kPulseHalfWidthCycles / f0;
    const Mechanism mech = ev.kind == EventKind::Impact ? Mechanism::Impact : Mechanism::Rolling;

    ForcingSeries out;
    out.mechanism = mech;
    out.fs = fs;
    out.location_x = ev.x_position;

    if (fs * ev.contact_time_tc >= kSamplesPerContactDirect) {
        const auto k0 = static_cast<std::int64_t>(std::ceil((ev.time - half) * fs));
        const auto k1 = static_cast<std::int64_t>(std::floor((ev.time + half) * fs));
        out.t0 = static_cast<double>(k0) / fs;
        out.values.resize(static_cast<std::size_t>(k1 - k0 + 1));
        for (std::int64_t k = k0; k <= k1; ++k) {
            out.values[static_cast<std::size_t>(k - k0)] = amp * ricker(static_cast<double>(k) / fs - ev.time, f0);
        }
        return out;
    }

    int factor = kPulseOversampling;
    while (fs * factor * ev.contact_time_tc < kSamplesPerContactDirect) factor *= 2;
    static thread_local std::map<int, std::vector<double>> filters;
    auto it = filters.find(factor);
    if (it == filters.end()) it = filters.emplace(factor, detail::decimation_filter(factor)).first;
    const auto& h = it->second;
    const auto taps = static_cast<std::int64_t>(h.size() / 2);
    const double fine = fs * factor;

    // Fine samples j/fine over the pulse support; output sample k is the
    // filter centred on fine index k*factor.
    const auto j0 = static_cast<std::int64_t>(std::ceil((ev.time - half) * fine));
    const auto j1 = static_cast<std::int64_t>(std::floor((ev.time + half) * fine));
    std::vector<double> wave(static_cast<std::size_t>(j1 - j0 + 1));
    for (std::int64_t j = j0; j <= j1; ++j) {
        wave[static_cast<std::size_t>(j - j0)] = amp * ricker(static_cast<double>(j) / fine - ev.time, f0);
    }
    const auto floor_div = [](std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
    const std::int64_t k0 = floor_div(j0 - taps, factor) + 1;
    const std::int64_t k1 = floor_div(j1 + taps, factor);
    out.t0 = static_cast<double>(k0) / fs;
    out.values.assign(static_cast<std::size_t>(std::max<std::int64_t>(k1 - k0 + 1, 0)), 0.0);
    for (std::int64_t k = k0; k <= k1; ++k) {
        const std::int64_t centre = k * factor;
        const std::int64_t lo = std::max(j0, centre - taps);
        const std::int64_t hi = std::min(j1, centre + taps);
        double acc = 0.0;
        for (std::int64_t j = lo; j <= hi; ++j) {
            acc += h[static_cast<std::size_t>(centre - j + taps)] * wave[static_cast<std::size_t>(j - j0)];
        }
        out.values[static_cast<std::size_t>(k - k0)] = acc;
    }
    return out;
}

/// Number of samples on [0, duration) at rate fs.
inline std::size_t sample_count(double duration, double fs) {
    detail::require_config(fs > 0.0, "fs", "must be positive");
    detail::require_config(duration >= 0.0, "duration", "must be non-negative");
    return static_cast<std::size_t>(std::llround(std::floor(duration * fs + 1e-9)));
}

namespace detail {

inline void deposit(std::vector<double>& target, const ForcingSeries& pulse, double weight) {
    const auto k0 = static_cast<std::int64_t>(std::llround(pulse.t0 * pulse.fs));
    const auto n = static_cast<std::int64_t>(target.size());
    for (std::size_t k = 0; k < pulse.values.size(); ++k) {
        const std::int64_t at = k0 + static_cast<std::int64_t>(k);
        if (at >= 0 && at < n) target[static_cast<std::size_t>(at)] += weight * pulse.values[k];
    }
}

}  // namespace detail

/// Superposition of all event pulses on [0, duration), split by event kind.
inline std::pair<ForcingSeries, ForcingSeries> assemble_particle_forcing(std::span<const ContactEvent> events,
                                                                         double fs, double duration) {
    const std::size_t n = sample_count(duration, fs);
    ForcingSeries impact{Mechanism::Impact, 0.0, fs, std::vector<double>(n, 0.0), 0.0, {}};
    ForcingSeries rolling{Mechanism::Rolling, 0.0, fs, std::vector<double>(n, 0.0), 0.0, {}};
    for (const auto& ev : events) {
        detail::require_contract(ev.time >= 0.0 && ev.time <= duration, "assemble_particle_forcing: event outside run");
        const auto pulse = event_pulse(ev, fs);
        detail::deposit(ev.kind == EventKind::Impact ? impact.values : rolling.values, pulse, 1.0);
    }
    return {std::move(impact), std::move(rolling)};
}

/// Positions of `cells` point sources evenly spread over [0, length).
inline std::vector<double> source_positions(double length, double cell) {
    detail::require_config(length > 0.0, "domain_length", "must be positive");
    detail::require_config(cell > 0.0, "propagation.source_cell", "must be positive");
    const auto cells = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / cell - 1e-9)));
    const double dx = length / static_cast<double>(cells);
    std::vector<double> x(cells);
    for (std::size_t c = 0; c < cells; ++c) x[c] = (static_cast<double>(c) + 0.5) * dx;
    return x;
}

/// Event pulses of one kind gathered onto the point sources of
/// source_positions(). Each pulse is shared linearly between the two nearest
/// positions. `fn(x, series)` is called once per source that received
/// anything, in increasing x; only one series is held in memory at a time.
template <class Fn>
void visit_particle_sources(std::span<const ContactEvent> events, EventKind kind, double fs, double duration,
                            double length, double cell, Fn&& fn) {
    const auto xs = source_positions(length, cell);
    const auto cells = static_cast<std::int64_t>(xs.size());
    const double dx = length / static_cast<double>(cells);
    const std::size_t n = sample_count(duration, fs);

    struct Share {
        std::size_t cell;
        std::size_t event;
        double weight;
    };
    std::vector<Share> shares;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        if (ev.kind != kind) continue;
        const double s = wrap_periodic(ev.x_position, length) / dx - 0.5;
        const double base = std::floor(s);
        const double w = s - base;
        const auto a = static_cast<std::int64_t>(base);
        const auto wrap = [&](std::int64_t c) { return static_cast<std::size_t>(((c % cells) + cells) % cells); };
        shares.push_back({wrap(a), i, 1.0 - w});
        shares.push_back({wrap(a + 1), i, w});
    }
    std::stable_sort(shares.begin(), shares.end(), [](const Share& l, const Share& r) { return l.cell < r.cell; });

    std::vector<double> series(n);
    for (std::size_t a = 0; a < shares.size();) {
        std::size_t b = a;
        while (b < shares.size() && shares[b].cell == shares[a].cell) ++b;
        std::fill(series.begin(), series.end(), 0.0);
        for (std::size_t k = a; k < b; ++k) {
            if (shares[k].weight == 0.0) continue;
            detail::deposit(series, event_pulse(events[shares[k].event], fs), shares[k].weight);
        }
        fn(xs[shares[a].cell], std::span<const double>(series));
        a = b;
    }
}

/// Materialised form of visit_particle_sources; every position is present.
inline SourceField bin_particle_forcing(std::span<const ContactEvent> events, EventKind kind, double fs,
                                        double duration, double length, double cell) {
    SourceField field;
    field.mechanism = kind == EventKind::Impact ? Mechanism::Impact : Mechanism::Rolling;
    field.fs = fs;
    field.n = sample_count(duration, fs);
    field.x = source_positions(length, cell);
    field.values.assign(field.x.size(), std::vector<double>(field.n, 0.0));
    const double dx = length / static_cast<double>(field.x.size());
    visit_particle_sources(events, kind, fs, duration, length, cell, [&](double x, std::span<const double> v) {
        const auto c = static_cast<std::size_t>(x / dx);
        field.values[c].assign(v.begin(), v.end());
    });
    return field;
}

// ---------------------------------------------------------------------------
// Hydrodynamic forcing

inline double strouhal_frequency(double St, double U0, double D) {
    detail::require_config(D > 0.0, "water.shed_length", "must be positive");
    return St * U0 / D;
}

namespace detail {

/// Raised cosine in log-frequency rising from 0 at `from` to 1 at `to`.
inline double log_cosine_ramp(double f, double from, double to) noexcept {
    if (to == from) return f >= to ? 1.0 : 0.0;
    const double u = std::log(f / from) / std::log(to / from);
    return 0.5 * (1.0 - std::cos(std::numbers::pi * std::clamp(u, 0.0, 1.0)));
}

inline void normalize_unit_rms(std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (auto& v : x) {
        v -= mean;
        ss += v * v;
    }
    const double rms = std::sqrt(ss / static_cast<double>(x.size()));
    if (!(rms > 0.0)) throw NumericalDegeneracy("cannot normalise a signal with zero variance");
    for (auto& v : x) v /= rms;
}

}  // namespace detail

/// Spectral amplitude of the turbulence generator: f^(-5/6) inside the
/// turbulence band, log-cosine tapers to zero at the taper band edges.
inline double turbulence_amplitude(double f, const WaterForcingParams& w) noexcept {
    if (f <= w.taper_lo || f >= w.taper_hi) return 0.0;
    double a = std::pow(f, -5.0 / 6.0);
    if (f < w.turb_lo) a *= detail::log_cosine_ramp(f, w.taper_lo, w.turb_lo);
    if (f > w.turb_hi) a *= detail::log_cosine_ramp(f, w.taper_hi, w.turb_hi);
    return a;
}

/// Gaussian white noise shaped in the frequency domain; zero mean, unit RMS.
inline std::vector<double> turbulence_signal(std::size_t n, double fs, const WaterForcingParams& w,
                                             std::uint64_t seed) {
    detail::require_config(n >= 256, "n", "turbulence signal needs at least 256 samples");
    detail::require_config(fs > 0.0, "fs", "must be positive");
    detail::require_config(w.taper_hi <= 0.5 * fs, "water.taper_band", "upper edge exceeds the Nyquist frequency");
    detail::require_config(w.taper_lo > 0.0 && w.taper_lo <= w.turb_lo && w.turb_lo < w.turb_hi &&
                               w.turb_hi <= w.taper_hi,
                           "water.turb_band", "must be nested inside water.taper_band");

    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(n);
    for (auto& v : noise) v = normal(rng);

    RealFft fft(n);
    auto spec = fft.forward(noise);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        spec[k] *= turbulence_amplitude(static_cast<double>(k) * fs / static_cast<double>(n), w);
    }
    auto out = fft.inverse(spec);
    detail::normalize_unit_rms(out);
    return out;
}

/// Random-phase narrow-band noise whose power spectrum is a Gaussian centred
/// on f_s with standard deviation rel_bandwidth * f_s; zero mean, unit RMS.
inline std::vector<double> shedding_signal(std::size_t n, double fs, double f_s, double rel_bandwidth,
                                           std::uint64_t seed) {
    detail::require_config(n >= 2, "n", "need at least two samples");
    detail::require_config(f_s > 0.0 && f_s < 0.5 * fs, "water.shedding_frequency",
                           "must lie strictly between 0 and the Nyquist frequency");
    detail::require_config(rel_bandwidth > 0.0, "water.shed_rel_bandwidth", "must be positive");

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double sigma = rel_bandwidth * f_s;
    RealFft fft(n);
    std::vector<Complex> spec(fft.bins());
    for (std::size_t k = 1; k + 1 < spec.size() || (n % 2 == 1 && k < spec.size()); ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(n);
        const double d = (f - f_s) / sigma;
        spec[k] = std::polar(std::exp(-0.25 * d * d), phase(rng));
    }
    auto out = fft.inverse(spec);
    detail::normalize_unit_rms(out);
    return out;
}

/// Normalised near-bed velocity series. The flow profile is steady, so the
/// spatial average at half a median diameter is the same at every sample and
/// the series is identically one after normalisation by its maximum.
inline std::vector<double> effective_velocity(const FlowProfile& flow, double d50, std::size_t n) {
    const double u = fluid_velocity(flow, 0.5 * d50);
    std::vector<double> out(n, u);
    if (u > 0.0) {
        for (auto& v : out) v /= u;
    }
    return out;
}

/// Turbulent and shedding parts of the water load, each
/// amplitude_scale * u_eff^p * w * s(t).
inline std::pair<std::vector<double>, std::vector<double>> water_forcing_components(
    std::span<const double> u_eff, const WaterForcingParams& w, std::span<const double> s_turb,
    std::span<const double> s_tone) {
    detail::require_contract(u_eff.size() == s_turb.size() && u_eff.size() == s_tone.size(),
                             "water_forcing: series lengths differ");
    std::vector<double> turb(u_eff.size());
    std::vector<double> tone(u_eff.size());
    for (std::size_t k = 0; k < u_eff.size(); ++k) {
        detail::require_contract(u_eff[k] >= 0.0, "water_forcing: negative effective velocity");
        const double scale = w.amplitude_scale * std::pow(u_eff[k], w.p);
        turb[k] = scale * w.w_turb * s_turb[k];
        tone[k] = scale * w.w_tone * s_tone[k];
    }
    return {std::move(turb), std::move(tone)};
}

/// Bed locations carrying the distributed water load: cell centres of an even
/// partition of [0, length).
inline std::vector<double> water_grid(double length, std::size_t points) {
    detail::require_config(points >= 1, "water.grid_points", "need at least one location");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = (static_cast<double>(i) + 0.5) * length / static_cast<double>(points);
    return g;
}

inline ForcingSeries water_forcing(std::span<const double> u_eff, const WaterForcingParams& w,
                                   std::span<const double> s_turb, std::span<const double> s_tone, double fs,
                                   std::vector<double> grid) {
    auto [turb, tone] = water_forcing_components(u_eff, w, s_turb, s_tone);
    for (std::size_t k = 0; k < turb.size(); ++k) turb[k] += tone[k];
    return {Mechanism::Turbulence, 0.0, fs, std::move(turb), 0.0, std::move(grid)};
}

/// Causal moving average over `window` seconds; samples before the start count as zero.
inline ForcingSeries smooth_forcing(const ForcingSeries& s, double window) {
    const double len = window * s.fs;
    detail::require_config(len >= 1.0 - 1e-9, "water.smoothing_window", "must be at least one sample");
    const auto m = static_cast<std::size_t>(std::llround(len));
    ForcingSeries out = s;
    if (m <= 1) return out;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = k + 1 > m ? k + 1 - m : 0; j <= k; ++j) acc += s.values[j];
        out.values[k] = acc / static_cast<double>(m);
    }
    return out;
}

}  // namespace bedseis
