#pragma once

// Spectral estimates, RMSA envelopes and bedload transport statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "bedseis/error.hpp"
#include "bedseis/fft.hpp"
#include "bedseis/hydro_bed.hpp"
#include "bedseis/simulation.hpp"

namespace bedseis {

enum class Taper { Hann, Rectangular };

struct PsdResult {
    std::vector<double> frequencies;
    std::vector<double> power;
    double fs = 0.0;
    std::size_t segment_length = 0;
    double overlap = 0.0;

    double df() const noexcept { return fs / static_cast<double>(segment_length); }
};

/// One-sided Welch estimate, density scaling. Each segment has its mean removed
/// before tapering, so the integral of the PSD is the signal variance.
inline PsdResult psd_welch(std::span<const double> x, double fs, std::size_t segment_length = 4096,
                           double overlap = 0.5, Taper taper = Taper::Hann) {
    detail::require_config(fs > 0.0, "fs", "must be positive");
    detail::require_config(segment_length >= 2, "analysis.psd_segment", "must be at least 2");
    detail::require_config(segment_length <= x.size(), "analysis.psd_segment", "segment longer than the signal");
    detail::require_config(overlap >= 0.0 && overlap < 1.0, "analysis.psd_overlap", "must lie in [0, 1)");

    const std::size_t m = segment_length;
    const std::size_t step = std::max<std::size_t>(1, m - static_cast<std::size_t>(std::llround(overlap * m)));
    std::vector<double> w(m, 1.0);
    if (taper == Taper::Hann) {
        // Periodic Hann, the usual choice for spectral estimation.
        for (std::size_t k = 0; k < m; ++k) {
            w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
        }
    }
    double wss = 0.0;
    for (double v : w) wss += v * v;

    RealFft fft(m);
    PsdResult out;
    out.fs = fs;
    out.segment_length = m;
    out.overlap = overlap;
    out.frequencies.resize(fft.bins());
    out.power.assign(fft.bins(), 0.0);
    for (std::size_t k = 0; k < fft.bins(); ++k) out.frequencies[k] = static_cast<double>(k) * fs / static_cast<double>(m);

    std::vector<double> seg(m);
    std::size_t count = 0;
    for (std::size_t start = 0; start + m <= x.size(); start += step, ++count) {
        double mean = 0.0;
        for (std::size_t k = 0; k < m; ++k) mean += x[start + k];
        mean /= static_cast<double>(m);
        for (std::size_t k = 0; k < m; ++k) seg[k] = (x[start + k] - mean) * w[k];
        const auto spec = fft.forward(seg);
        for (std::size_t k = 0; k < spec.size(); ++k) out.power[k] += std::norm(spec[k]);
    }
    const double scale = 1.0 / (fs * wss * static_cast<double>(count));
    for (std::size_t k = 0; k < out.power.size(); ++k) {
        const bool edge = k == 0 || (m % 2 == 0 && k + 1 == out.power.size());
        out.power[k] *= scale * (edge ? 1.0 : 2.0);
    }
    return out;
}

/// Integral of the PSD over all bins.
inline double psd_integral(const PsdResult& p) noexcept {
    double s = 0.0;
    for (double v : p.power) s += v;
    return s * p.df();
}

inline double variance(std::span<const double> x) noexcept {
    if (x.empty()) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size());
}

inline PsdResult normalize_psd(const PsdResult& p) {
    const double peak = p.power.empty() ? 0.0 : *std::max_element(p.power.begin(), p.power.end());
    detail::require_contract(peak > 0.0, "normalize_psd: PSD is identically zero");
    PsdResult out = p;
    for (auto& v : out.power) v /= peak;
    return out;
}

/// Frequency of the largest PSD value.
inline double peak_frequency(const PsdResult& p) {
    detail::require_contract(!p.power.empty(), "peak_frequency: empty PSD");
    const auto it = std::max_element(p.power.begin(), p.power.end());
    return p.frequencies[static_cast<std::size_t>(it - p.power.begin())];
}

/// (rising - falling) on raw power, scaled by its largest magnitude.
inline std::vector<double> spectral_difference(const PsdResult& rising, const PsdResult& falling) {
    detail::require_contract(rising.frequencies == falling.frequencies, "spectral_difference: frequency grids differ");
    std::vector<double> d(rising.power.size());
    double big = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = rising.power[k] - falling.power[k];
        big = std::max(big, std::abs(d[k]));
    }
    if (big > 0.0) {
        for (auto& v : d) v /= big;
    }
    return d;
}

// ---------------------------------------------------------------------------
// RMSA envelope

namespace detail {

/// Second-order section, transposed direct form II, a0 = 1.
struct Biquad {
    double b0, b1, b2, a1, a2;

    std::vector<double> run(std::span<const double> x, double z1, double z2) const {
        std::vector<double> y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double v = b0 * x[k] + z1;
            z1 = b1 * x[k] - a1 * v + z2;
            z2 = b2 * x[k] - a2 * v;
            y[k] = v;
        }
        return y;
    }

    /// Run with the state a constant input equal to x[0] would have settled to.
    std::vector<double> run_steady(std::span<const double> x) const {
        if (x.empty()) return {};
        const double gain = (b0 + b1 + b2) / (1.0 + a1 + a2);
        const double y = gain * x[0];
        const double z2 = (b2 - a2 * gain) * x[0];
        const double z1 = y - b0 * x[0];
        return run(x, z1, z2);
    }
};

/// Butterworth sections by the bilinear transform with prewarping.
inline Biquad butter_lowpass(double fc, double fs) {
    const double k = std::tan(std::numbers::pi * fc / fs);
    const double q = std::numbers::sqrt2;
    const double norm = 1.0 / (1.0 + q * k + k * k);
    return {k * k * norm, 2.0 * k * k * norm, k * k * norm, 2.0 * (k * k - 1.0) * norm, (1.0 - q * k + k * k) * norm};
}

inline Biquad butter_highpass(double fc, double fs) {
    const double k = std::tan(std::numbers::pi * fc / fs);
    const double q = std::numbers::sqrt2;
    const double norm = 1.0 / (1.0 + q * k + k * k);
    return {norm, -2.0 * norm, norm, 2.0 * (k * k - 1.0) * norm, (1.0 - q * k + k * k) * norm};
}

/// Forward-backward filtering with odd extension at both ends.
inline std::vector<double> filtfilt(const Biquad& f, std::span<const double> x, std::size_t pad) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    pad = std::min(pad, n - 1);
    std::vector<double> ext(n + 2 * pad);
    for (std::size_t k = 0; k < pad; ++k) ext[k] = 2.0 * x[0] - x[pad - k];
    for (std::size_t k = 0; k < n; ++k) ext[pad + k] = x[k];
    for (std::size_t k = 0; k < pad; ++k) ext[pad + n + k] = 2.0 * x[n - 1] - x[n - 2 - k];
    auto y = f.run_steady(ext);
    std::reverse(y.begin(), y.end());
    y = f.run_steady(y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace detail

/// Zero-phase band-pass (Butterworth high-pass and low-pass sections, each
/// applied forward and backward).
inline std::vector<double> bandpass(std::span<const double> x, double fs, double lo, double hi) {
    detail::require_config(lo > 0.0 && lo < hi && hi < 0.5 * fs, "analysis.rmsa_band",
                           "must satisfy 0 < low < high < fs/2");
    const auto pad = static_cast<std::size_t>(std::ceil(fs / lo));
    auto y = detail::filtfilt(detail::butter_highpass(lo, fs), x, pad);
    return detail::filtfilt(detail::butter_lowpass(hi, fs), y, pad);
}

/// Band-passed signal, then RMS over a centred sliding window (truncated at
/// the ends). One output sample per input sample.
inline std::vector<double> rmsa_envelope(std::span<const double> x, double fs, double window, double lo = 0.5,
                                         double hi = 95.0) {
    detail::require_config(window * fs >= 1.0, "analysis.rmsa_window", "must span at least one sample");
    const auto y = bandpass(x, fs, lo, hi);
    const std::size_t n = y.size();
    const auto m = static_cast<std::size_t>(std::llround(window * fs));
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + y[k] * y[k];
    std::vector<double> env(n);
    const std::size_t left = m / 2;
    const std::size_t right = m - left;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = k >= left ? k - left : 0;
        const std::size_t b = std::min(n, k + right);
        env[k] = std::sqrt(std::max(0.0, prefix[b] - prefix[a]) / static_cast<double>(b - a));
    }
    return env;
}

// ---------------------------------------------------------------------------
// Transport metrics

struct TransportThresholds {
    double z_rel_factor = 1.1;
    double v_thresh = 0.05;

    void validate() const {
        detail::require_config(z_rel_factor > 1.0, "analysis.stuck_height_factor", "must exceed 1");
        detail::require_config(v_thresh > 0.0, "analysis.stuck_velocity", "must be positive");
    }
};

enum class Mobility { EverMoving, EverStuck, Intermittent };

constexpr std::string_view to_string(Mobility m) noexcept {
    switch (m) {
        case Mobility::EverMoving: return "ever_moving";
        case Mobility::EverStuck: return "ever_stuck";
        case Mobility::Intermittent: return "intermittent";
    }
    return "unknown";
}

struct ParticleTransport {
    int id = 0;
    double diameter = 0.0;
    double mass = 0.0;
    double lifetime = 0.0;
    double rest_time = 0.0;
    double suspension_time = 0.0;
    Mobility mobility = Mobility::EverMoving;
};

struct TransportMetrics {
    std::vector<double> time;
    std::vector<std::size_t> alive;
    std::vector<double> stuck_fraction;
    std::vector<double> mean_z_rel;      // diameters; NaN with no particles
    std::vector<double> mean_moving_vx;  // NaN when nothing moves
    std::vector<double> bulk_flux;
    std::vector<ParticleTransport> particles;
};

/// Stuck: centre less than z_rel_factor diameters above the local bed and
/// streamwise speed below v_thresh.
inline bool is_stuck(double z_rel, double vx, double diameter, const TransportThresholds& th) noexcept {
    return z_rel < th.z_rel_factor * diameter && vx < th.v_thresh;
}

/// Trajectories must be ordered by time, sampled every `interval` seconds.
/// Each sample is credited with one interval of rest or suspension time.
inline TransportMetrics transport_metrics(std::span<const TrajectorySample> traj, std::span<const double> masses,
                                          const TransportThresholds& th, const BedProfile& bed, double interval) {
    th.validate();
    detail::require_config(interval > 0.0, "analysis.trajectory_interval", "must be positive");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    TransportMetrics out;
    std::map<int, ParticleTransport> per;
    std::map<int, std::array<bool, 2>> seen;  // {was stuck, was mobile}

    std::size_t a = 0;
    while (a < traj.size()) {
        std::size_t b = a;
        while (b < traj.size() && traj[b].time == traj[a].time) ++b;
        std::size_t stuck = 0;
        std::size_t moving = 0;
        double zsum = 0.0;
        double vsum = 0.0;
        double flux = 0.0;
        for (std::size_t i = a; i < b; ++i) {
            const auto& s = traj[i];
            detail::require_contract(s.particle_id >= 0 && static_cast<std::size_t>(s.particle_id) < masses.size(),
                                     "transport_metrics: particle id without a mass");
            const double m = masses[static_cast<std::size_t>(s.particle_id)];
            const double z_rel = s.z - bed_elevation(bed, s.x);
            const bool st = is_stuck(z_rel, s.vx, s.diameter, th);
            auto& p = per[s.particle_id];
            p.id = s.particle_id;
            p.diameter = s.diameter;
            p.mass = m;
            p.lifetime += interval;
            if (st) {
                p.rest_time += interval;
                ++stuck;
            } else {
                vsum += s.vx;
                ++moving;
            }
            if (z_rel >= th.z_rel_factor * s.diameter) p.suspension_time += interval;
            auto& flags = seen[s.particle_id];
            flags[st ? 0 : 1] = true;
            zsum += z_rel / s.diameter;
            flux += m * s.vx;
        }
        const std::size_t alive = b - a;
        out.time.push_back(traj[a].time);
        out.alive.push_back(alive);
        out.stuck_fraction.push_back(static_cast<double>(stuck) / static_cast<double>(alive));
        out.mean_z_rel.push_back(zsum / static_cast<double>(alive));
        out.mean_moving_vx.push_back(moving ? vsum / static_cast<double>(moving) : nan);
        out.bulk_flux.push_back(flux);
        a = b;
    }
    for (auto& [id, p] : per) {
        const auto& f = seen[id];
        p.mobility = !f[0] ? Mobility::EverMoving : (!f[1] ? Mobility::EverStuck : Mobility::Intermittent);
        out.particles.push_back(p);
    }
    return out;
}

/// Mean diameter of particles in a mobility class; NaN for an empty class.
inline double mean_diameter(const TransportMetrics& m, Mobility cls) noexcept {
    double s = 0.0;
    std::size_t c = 0;
    for (const auto& p : m.particles) {
        if (p.mobility == cls) {
            s += p.diameter;
            ++c;
        }
    }
    return c ? s / static_cast<double>(c) : std::numeric_limits<double>::quiet_NaN();
}

/// Pearson correlation; NaN if either series is constant.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    detail::require_contract(a.size() == b.size(), "pearson: length mismatch");
    double ma = 0.0, mb = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::isnan(a[k]) || std::isnan(b[k])) continue;
        ma += a[k];
        mb += b[k];
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::isnan(a[k]) || std::isnan(b[k])) continue;
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

}  // namespace bedseis
