#pragma once

// Bed geometry, prescribed flow profile and grain-size population.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "bedseis/error.hpp"
#include "bedseis/random.hpp"

namespace bedseis {

inline constexpr int kBedRefinement = 10;

/// Rough inclined bed sampled at nodes over [0, L]. Elevations are the ramp
/// -slope*x plus an independent Normal(0, sigma_z) perturbation per node.
struct BedProfile {
    std::vector<double> node_x;
    std::vector<double> node_z;
    double slope = 0.0;
    double sigma_z = 0.0;
    std::uint64_t seed = 0;

    // Linear resampling of the nodes on a grid kBedRefinement times finer.
    std::vector<double> fine_z;
    double fine_dx = 0.0;

    double length() const noexcept { return node_x.empty() ? 0.0 : node_x.back(); }
};

inline BedProfile build_bed(double length, double slope, std::size_t n_nodes, double sigma_z,
                            std::uint64_t seed) {
    detail::require_config(length > 0.0 && std::isfinite(length), "domain_length", "must be positive");
    detail::require_config(n_nodes >= 2, "bed.n_nodes", "need at least two nodes");
    detail::require_config(sigma_z >= 0.0, "bed.roughness_std", "must be non-negative");
    detail::require_config(std::isfinite(slope), "bed_slope", "must be finite");

    BedProfile bed;
    bed.slope = slope;
    bed.sigma_z = sigma_z;
    bed.seed = seed;
    bed.node_x.resize(n_nodes);
    bed.node_z.resize(n_nodes);

    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dx = length / static_cast<double>(n_nodes - 1);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double x = (k + 1 == n_nodes) ? length : dx * static_cast<double>(k);
        bed.node_x[k] = x;
        const double noise = sigma_z > 0.0 ? sigma_z * normal(rng) : 0.0;
        bed.node_z[k] = -slope * x + noise;
    }

    const std::size_t n_fine = (n_nodes - 1) * kBedRefinement + 1;
    bed.fine_dx = dx / kBedRefinement;
    bed.fine_z.resize(n_fine);
    for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
        const double a = bed.node_z[k];
        const double b = bed.node_z[k + 1];
        for (int j = 0; j < kBedRefinement; ++j) {
            const double t = static_cast<double>(j) / kBedRefinement;
            bed.fine_z[k * kBedRefinement + j] = a + (b - a) * t;
        }
    }
    bed.fine_z.back() = bed.node_z.back();
    return bed;
}

/// Wraps x into [0, L).
inline double wrap_periodic(double x, double length) noexcept {
    double w = std::fmod(x, length);
    if (w < 0.0) w += length;
    if (w >= length) w -= length;
    return w;
}

/// Bed elevation at x, wrapped periodically. Piecewise linear on the refined grid.
inline double bed_elevation(const BedProfile& bed, double x) noexcept {
    const double xw = wrap_periodic(x, bed.length());
    const double s = xw / bed.fine_dx;
    auto i = static_cast<std::size_t>(s);
    if (i + 1 >= bed.fine_z.size()) i = bed.fine_z.size() - 2;
    const double t = s - static_cast<double>(i);
    const double a = bed.fine_z[i];
    const double b = bed.fine_z[i + 1];
    return a + (b - a) * t;
}

/// Power-law boundary-layer profile U(z) = U_ref ((z + z0)/(z_ref + z0))^exponent.
struct FlowProfile {
    double U_ref = 1.0;
    double z_ref = 0.2;
    double z0 = 0.1124 / 30.0;
    double exponent = 1.0 / 7.0;

    void validate() const {
        detail::require_config(z0 > 0.0, "flow.z0", "must be positive");
        detail::require_config(z_ref > 0.0, "flow_depth", "must be positive");
        detail::require_config(exponent >= 0.0 && exponent < 1.0, "fluid.profile_exponent",
                               "must lie in [0, 1)");
        detail::require_config(U_ref >= 0.0, "flow_velocity", "must be non-negative");
    }
};

/// Negative heights (a particle momentarily below the bed surface) see U(0).
inline double fluid_velocity(const FlowProfile& p, double z_above_bed) noexcept {
    const double z = std::max(z_above_bed, 0.0);
    if (p.exponent == 0.0) return p.U_ref;
    return p.U_ref * std::pow((z + p.z0) / (p.z_ref + p.z0), p.exponent);
}

/// Wide-channel Manning estimate, hydraulic radius taken as the flow depth.
inline double manning_velocity(double depth, double slope, double n_manning) {
    detail::require_config(depth > 0.0, "depth", "must be positive");
    detail::require_config(slope >= 0.0, "slope", "must be non-negative");
    detail::require_config(n_manning > 0.0, "n_manning", "must be positive");
    return std::pow(depth, 2.0 / 3.0) * std::sqrt(slope) / n_manning;
}

inline double standard_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double standard_normal_quantile(double p) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Lognormal grain-size law parameterised by its mode, truncated to [d_min, d_max].
struct GrainDistribution {
    double mode_diameter = 0.05;
    double sigma_log = 0.9;
    double d_min = 0.015;
    double d_max = 0.5;

    /// Location parameter of the underlying normal: mode = exp(mu - sigma^2).
    double log_location() const noexcept { return std::log(mode_diameter) + sigma_log * sigma_log; }

    void validate() const {
        detail::require_config(mode_diameter > 0.0, "grains.mode_diameter", "must be positive");
        detail::require_config(sigma_log >= 0.0, "grains.sigma_log", "must be non-negative");
        detail::require_config(d_min > 0.0, "grains.d_min", "must be positive");
        detail::require_config(d_min < d_max, "grains.d_max", "d_min must be below d_max");
        if (sigma_log == 0.0) {
            detail::require_config(mode_diameter >= d_min && mode_diameter <= d_max, "grains.mode_diameter",
                                   "degenerate distribution must sit inside [d_min, d_max]");
        }
    }

    /// Diameter at cumulative probability q of the truncated law.
    double quantile(double q) const {
        if (sigma_log == 0.0) return mode_diameter;
        const double mu = log_location();
        const double lo = standard_normal_cdf((std::log(d_min) - mu) / sigma_log);
        const double hi = standard_normal_cdf((std::log(d_max) - mu) / sigma_log);
        detail::require_config(hi > lo, "grains", "truncation interval carries no probability mass");
        const double p = std::clamp(lo + q * (hi - lo), lo, hi);
        if (p <= 0.0) return d_min;
        if (p >= 1.0) return d_max;
        const double d = std::exp(mu + sigma_log * standard_normal_quantile(p));
        return std::clamp(d, d_min, d_max);
    }

    double median() const { return quantile(0.5); }
};

/// Inverse-CDF sampling of the truncated law; a pure function of (dist, n, seed).
inline std::vector<double> sample_diameters(const GrainDistribution& dist, std::size_t n, std::uint64_t seed) {
    dist.validate();
    detail::require_config(n >= 1, "n", "must draw at least one diameter");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& d : out) d = dist.quantile(uniform(rng));
    return out;
}

}  // namespace bedseis
