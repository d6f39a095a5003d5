#pragma once

// Rayleigh-wave propagation of bed forces to a surface receiver and mixing
// of the per-mechanism ground velocities.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "bedseis/error.hpp"
#include "bedseis/fft.hpp"
#include "bedseis/hydro_bed.hpp"
#include "bedseis/source_forcing.hpp"

namespace bedseis {

struct MediumModel {
    double rho_m = 2650.0;
    double v_c = 1300.0;
    double v_u = 0.73 * 1300.0;
    double Q = 20.0;  // +inf disables attenuation

    void validate() const {
        detail::require_config(rho_m > 0.0, "medium.density", "must be positive");
        detail::require_config(v_c > 0.0, "medium.phase_velocity", "must be positive");
        detail::require_config(v_u > 0.0, "medium.group_velocity", "must be positive");
        detail::require_config(Q > 0.0, "medium.quality_factor", "must be positive");
    }
};

struct ReceiverGeometry {
    double receiver_x = 5.0;
    double receiver_offset = 1.0;
    double r_min = 0.1;

    void validate() const {
        detail::require_config(r_min > 0.0, "receiver.r_min", "must be positive");
        detail::require_config(receiver_offset >= 0.0, "receiver.offset", "must be non-negative");
        detail::require_config(std::isfinite(receiver_x), "receiver.x", "must be finite");
    }
};

struct MixWeights {
    double alpha_roll = 0.0;
    double alpha_imp = 0.0;
    double alpha_turb = 0.0;
    double alpha_shed = 0.0;

    double& operator[](Mechanism m) noexcept {
        switch (m) {
            case Mechanism::Rolling: return alpha_roll;
            case Mechanism::Impact: return alpha_imp;
            case Mechanism::Turbulence: return alpha_turb;
            case Mechanism::Shedding: break;
        }
        return alpha_shed;
    }
    double operator[](Mechanism m) const noexcept { return const_cast<MixWeights&>(*this)[m]; }

    void validate() const {
        detail::require_config(alpha_roll >= 0.0 && alpha_imp >= 0.0 && alpha_turb >= 0.0 && alpha_shed >= 0.0,
                               "mix", "weights must be non-negative");
    }
};

inline constexpr std::array<Mechanism, 4> kMechanisms{Mechanism::Impact, Mechanism::Rolling, Mechanism::Turbulence,
                                                      Mechanism::Shedding};

/// Full two-sided DFT of vertical ground velocity. values[k] is bin k of an
/// n-point transform (sum convention, no 1/n), so values[n-k] == conj(values[k]).
struct VelocitySpectrum {
    double fs = 200.0;
    std::size_t n = 0;
    std::vector<Complex> values;

    VelocitySpectrum() = default;
    VelocitySpectrum(double fs_, std::size_t n_) : fs(fs_), n(n_), values(n_) {}

    /// Signed frequency of bin k.
    double frequency(std::size_t k) const noexcept {
        const double df = fs / static_cast<double>(n);
        return k <= n / 2 ? static_cast<double>(k) * df : -static_cast<double>(n - k) * df;
    }

    VelocitySpectrum& operator+=(const VelocitySpectrum& o) {
        detail::require_contract(o.n == n && o.fs == fs, "VelocitySpectrum: grid mismatch");
        for (std::size_t k = 0; k < n; ++k) values[k] += o.values[k];
        return *this;
    }

    double hermitian_defect() const noexcept {
        double worst = 0.0;
        for (std::size_t k = 1; k < n; ++k) worst = std::max(worst, std::abs(values[k] - std::conj(values[n - k])));
        return std::max(worst, std::abs(values[0].imag()));
    }
};

/// Rayleigh-wave displacement per unit force (m/N) at frequency f and distance r.
inline double green_function(double f, double r, const MediumModel& m) {
    if (!(f > 0.0)) return 0.0;
    detail::require_contract(r > 0.0, "green_function: distance must be positive");
    const double k = 2.0 * std::numbers::pi * f / m.v_c;
    const double spreading = std::sqrt(2.0 / (std::numbers::pi * k * r));
    const double attenuation = std::isinf(m.Q) ? 1.0 : std::exp(-std::numbers::pi * f * r / (m.v_u * m.Q));
    return k / (8.0 * m.rho_m * m.v_c * m.v_u) * spreading * attenuation;
}

/// Source-receiver distance. With a periodic domain of the given length the
/// source is first moved to its image nearest the receiver. Distances below
/// r_min are clamped; `clamped` records that it happened.
inline double source_distance(double source_x, const ReceiverGeometry& g, double length, bool* clamped = nullptr) {
    double dx = source_x - g.receiver_x;
    if (length > 0.0) dx -= length * std::round(dx / length);
    const double r = std::hypot(dx, g.receiver_offset);
    if (r < g.r_min) {
        if (clamped) *clamped = true;
        return g.r_min;
    }
    return r;
}

namespace detail {

/// Adds i 2 pi f G(f; r) F(f) for a real force series into `out`. The
/// series starts at sample `offset` of the n-point grid.
inline void accumulate_source(VelocitySpectrum& out, RealFft& fft, std::span<const double> values, std::size_t offset,
                              double r, double scale, const MediumModel& medium) {
    detail::require_contract(offset + values.size() <= out.n, "propagate: series longer than the transform");
    std::vector<double> buf(out.n, 0.0);
    for (std::size_t k = 0; k < values.size(); ++k) buf[offset + k] = scale * values[k];
    const auto half = fft.forward(buf);
    const double df = out.fs / static_cast<double>(out.n);
    for (std::size_t k = 1; k < half.size(); ++k) {
        if (2 * k == out.n) continue;  // Nyquist stays zero
        const double f = static_cast<double>(k) * df;
        const Complex u = Complex(0.0, 2.0 * std::numbers::pi * f) * green_function(f, r, medium) * half[k];
        out.values[k] += u;
        out.values[out.n - k] += std::conj(u);
    }
}

inline std::size_t series_offset(const ForcingSeries& s, double fs) {
    detail::require_contract(s.fs == fs, "propagate: sampling rates differ");
    const auto o = std::llround(s.t0 * fs);
    detail::require_contract(o >= 0, "propagate: series starts before the time origin");
    return static_cast<std::size_t>(o);
}

}  // namespace detail

/// Point sources located at each series' location_x.
inline VelocitySpectrum propagate_point_sources(std::span<const ForcingSeries> sources, const ReceiverGeometry& g,
                                                const MediumModel& medium, double fs, std::size_t n,
                                                double length = 0.0, bool* clamped = nullptr) {
    VelocitySpectrum out(fs, n);
    if (sources.empty()) return out;
    RealFft fft(n);
    for (const auto& s : sources) {
        const double r = source_distance(s.location_x, g, length, clamped);
        detail::accumulate_source(out, fft, s.values, detail::series_offset(s, fs), r, 1.0, medium);
    }
    return out;
}

inline VelocitySpectrum propagate_field(const SourceField& field, const ReceiverGeometry& g,
                                        const MediumModel& medium, std::size_t n, double length,
                                        bool* clamped = nullptr) {
    VelocitySpectrum out(field.fs, n);
    RealFft fft(n);
    for (std::size_t c = 0; c < field.x.size(); ++c) {
        bool any = false;
        for (double v : field.values[c]) {
            if (v != 0.0) {
                any = true;
                break;
            }
        }
        if (!any) continue;
        const double r = source_distance(field.x[c], g, length, clamped);
        detail::accumulate_source(out, fft, field.values[c], 0, r, 1.0, medium);
    }
    return out;
}

/// Bed events of one kind, binned onto point sources `cell` apart and
/// propagated one source at a time.
inline VelocitySpectrum propagate_particle_events(std::span<const ContactEvent> events, EventKind kind,
                                                  const ReceiverGeometry& g, const MediumModel& medium, double fs,
                                                  std::size_t n, double duration, double length, double cell,
                                                  bool* clamped = nullptr) {
    VelocitySpectrum out(fs, n);
    RealFft fft(n);
    visit_particle_sources(events, kind, fs, duration, length, cell, [&](double x, std::span<const double> v) {
        detail::accumulate_source(out, fft, v, 0, source_distance(x, g, length, clamped), 1.0, medium);
    });
    return out;
}

/// Distributed load: the total force is split equally over forcing.grid.
inline VelocitySpectrum propagate_distributed(const ForcingSeries& forcing, const ReceiverGeometry& g,
                                              const MediumModel& medium, double fs, std::size_t n,
                                              double length = 0.0, bool* clamped = nullptr) {
    detail::require_config(!forcing.grid.empty(), "water.grid_points", "distributed source needs a grid");
    VelocitySpectrum out(fs, n);
    RealFft fft(n);
    std::vector<double> buf(n, 0.0);
    const std::size_t offset = detail::series_offset(forcing, fs);
    detail::require_contract(offset + forcing.values.size() <= n, "propagate: series longer than the transform");
    const double share = 1.0 / static_cast<double>(forcing.grid.size());
    for (std::size_t k = 0; k < forcing.values.size(); ++k) buf[offset + k] = share * forcing.values[k];
    const auto half = fft.forward(buf);

    std::vector<double> r(forcing.grid.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = source_distance(forcing.grid[i], g, length, clamped);
    const double df = fs / static_cast<double>(n);
    for (std::size_t k = 1; k < half.size(); ++k) {
        if (2 * k == n) continue;
        const double f = static_cast<double>(k) * df;
        double gsum = 0.0;
        for (double ri : r) gsum += green_function(f, ri, medium);
        const Complex u = Complex(0.0, 2.0 * std::numbers::pi * f) * gsum * half[k];
        out.values[k] = u;
        out.values[n - k] = std::conj(u);
    }
    return out;
}

/// Real time series of a Hermitian spectrum. Throws if the anti-Hermitian
/// part carries more than 1e-10 of the signal norm.
inline std::vector<double> to_time_series(const VelocitySpectrum& s) {
    double herm = 0.0;
    double anti = 0.0;
    for (std::size_t k = 0; k < s.n; ++k) {
        const Complex a = s.values[k];
        const Complex b = std::conj(s.values[(s.n - k) % s.n]);
        herm += std::norm(0.5 * (a + b));
        anti += std::norm(0.5 * (a - b));
    }
    if (anti > 0.0 && std::sqrt(anti) > 1e-10 * std::sqrt(herm)) {
        throw NumericalDegeneracy("velocity spectrum is not Hermitian; imaginary residual too large");
    }
    RealFft fft(s.n);
    std::vector<Complex> half(fft.bins());
    for (std::size_t k = 0; k < half.size(); ++k) {
        half[k] = 0.5 * (s.values[k] + std::conj(s.values[(s.n - k) % s.n]));
    }
    return fft.inverse(half);
}

struct MechanismSpectra {
    VelocitySpectrum impact;
    VelocitySpectrum rolling;
    VelocitySpectrum turb;
    VelocitySpectrum shed;

    const VelocitySpectrum& operator[](Mechanism m) const noexcept {
        switch (m) {
            case Mechanism::Impact: return impact;
            case Mechanism::Rolling: return rolling;
            case Mechanism::Turbulence: return turb;
            case Mechanism::Shedding: break;
        }
        return shed;
    }
};

/// u_tot = sum_m alpha_m u_m, inverted to the time domain.
inline std::vector<double> synthesize_total(const MechanismSpectra& spectra, const MixWeights& w, double fs,
                                            std::size_t n) {
    w.validate();
    VelocitySpectrum sum(fs, n);
    for (Mechanism m : kMechanisms) {
        const auto& s = spectra[m];
        detail::require_contract(s.n == n && s.fs == fs && s.values.size() == n, "synthesize_total: grid mismatch");
        const double a = w[m];
        if (a == 0.0) continue;
        for (std::size_t k = 0; k < n; ++k) sum.values[k] += a * s.values[k];
    }
    return to_time_series(sum);
}

/// Energy-fraction mixing: alpha_m chosen so alpha_m^2 var_m = fraction_m * V,
/// where V is the summed variance of the participating components. Components
/// with zero variance get zero weight.
inline MixWeights weights_from_fractions(const MixWeights& fractions, const std::array<double, 4>& variances) {
    fractions.validate();
    double total = 0.0;
    for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
        if (fractions[kMechanisms[i]] > 0.0) total += variances[i];
    }
    MixWeights out;
    for (std::size_t i = 0; i < kMechanisms.size(); ++i) {
        const Mechanism m = kMechanisms[i];
        if (fractions[m] > 0.0 && variances[i] > 0.0) out[m] = std::sqrt(fractions[m] * total / variances[i]);
    }
    return out;
}

}  // namespace bedseis
