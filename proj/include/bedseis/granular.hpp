#pragma once

// Grain-scale mechanics: forces on a single particle, soft-sphere pair
// contacts and the event-based particle-bed interaction rules.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>

#include "bedseis/error.hpp"
#include "bedseis/hydro_bed.hpp"
#include "bedseis/random.hpp"
#include "bedseis/vec2.hpp"

namespace bedseis {

inline constexpr double kGravity = 9.81;

struct Particle {
    int id = 0;
    double diameter = 0.0;
    double mass = 0.0;
    double x = 0.0;
    double z = 0.0;  // centre elevation
    double vx = 0.0;
    double vz = 0.0;
    double alive_since = 0.0;

    double radius() const noexcept { return 0.5 * diameter; }
    Vec2 position() const noexcept { return {x, z}; }
    Vec2 velocity() const noexcept { return {vx, vz}; }
};

inline double sphere_mass(double diameter, double solid_density) noexcept {
    return solid_density * std::numbers::pi / 6.0 * diameter * diameter * diameter;
}

inline Particle make_particle(int id, double diameter, double solid_density, double x, double z,
                              double alive_since = 0.0) {
    detail::require_config(diameter > 0.0, "diameter", "must be positive");
    detail::require_config(solid_density > 0.0, "grains.solid_density", "must be positive");
    return Particle{id, diameter, sphere_mass(diameter, solid_density), x, z, 0.0, 0.0, alive_since};
}

inline double effective_mass(double m1, double m2) noexcept { return m1 * m2 / (m1 + m2); }

/// Half period of the linear oscillator formed by mass m_eff on a spring k.
inline double contact_time(double m_eff, double k) {
    detail::require_config(m_eff > 0.0, "m_eff", "must be positive");
    detail::require_config(k > 0.0, "contact.normal_stiffness", "must be positive");
    return std::numbers::pi * std::sqrt(m_eff / k);
}

/// Linear dashpot giving restitution e for a spring k and reduced mass m_eff.
inline double damping_for_restitution(double m_eff, double k_n, double e) {
    const double ln_e = std::log(e);
    return -2.0 * ln_e * std::sqrt(m_eff * k_n) / std::sqrt(std::numbers::pi * std::numbers::pi + ln_e * ln_e);
}

struct ContactParams {
    double k_n = 0.0;
    double c_n = 0.0;
    double k_t = 0.0;
    double eta_t = 0.0;
    double mu = 0.5;

    void validate() const {
        detail::require_config(k_n >= 0.0 && c_n >= 0.0 && k_t >= 0.0 && eta_t >= 0.0, "contact",
                               "stiffness and damping must be non-negative");
        detail::require_config(mu >= 0.0 && mu <= 2.0, "contact.friction", "must lie in [0, 2]");
    }
};

struct EventParams {
    double e = 0.45;                     // restitution
    double alpha_roll_impulse = 0.3;     // rolling impulse relative to an impact
    double beta = 0.5;                   // free-fall term of the impact threshold
    double gamma = 0.1;                  // flow term of the impact threshold
    double roll_vx_factor = 0.1;         // rolling needs vx >= factor * U0
    double roll_height_factor = 1.3;     // ... and a centre height below factor * D
    double rolling_duration_factor = 10.0;

    void validate() const {
        detail::require_config(e > 0.0 && e < 1.0, "events.restitution", "must lie in (0, 1)");
        detail::require_config(alpha_roll_impulse > 0.0 && alpha_roll_impulse <= 1.0,
                               "events.rolling_impulse_factor", "must lie in (0, 1]");
        detail::require_config(beta >= 0.0, "events.impact_beta", "must be non-negative");
        detail::require_config(gamma >= 0.0, "events.impact_gamma", "must be non-negative");
        detail::require_config(roll_vx_factor >= 0.0, "events.rolling_velocity_factor", "must be non-negative");
        detail::require_config(roll_height_factor > 0.0, "events.rolling_height_factor", "must be positive");
        detail::require_config(rolling_duration_factor >= 1.0, "events.rolling_duration_factor",
                               "must be at least 1");
    }
};

enum class EventKind { Impact, Rolling };

constexpr std::string_view to_string(EventKind k) noexcept {
    return k == EventKind::Impact ? "impact" : "rolling";
}

struct ContactEvent {
    EventKind kind = EventKind::Impact;
    double time = 0.0;
    double x_position = 0.0;
    int particle_id = 0;
    double impulse_J = 0.0;
    double contact_time_tc = 0.0;
    double pre_vz = 0.0;

    friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

// ---------------------------------------------------------------------------
// Body forces

/// Schiller-Naumann below Re_p = 1000, Newton regime above.
inline double drag_coefficient(double reynolds) noexcept {
    if (reynolds <= 1000.0) return 24.0 / reynolds * (1.0 + 0.15 * std::pow(reynolds, 0.687));
    return 0.44;
}

inline Vec2 drag_force(const Particle& p, Vec2 u_fluid, double rho_f, double mu_f) noexcept {
    const Vec2 u_rel = u_fluid - p.velocity();
    const double speed = norm(u_rel);
    if (speed == 0.0) return {};
    const double re = rho_f * p.diameter * speed / mu_f;
    const double area = std::numbers::pi * p.diameter * p.diameter / 8.0;
    return (drag_coefficient(re) * area * rho_f * speed) * u_rel;
}

/// Langevin forcing sqrt(2 sigma / dt) * eta, eta a pair of standard normals.
inline Vec2 stochastic_force(double sigma, double dt, Rng& rng) {
    if (sigma == 0.0) return {};
    std::normal_distribution<double> normal(0.0, 1.0);
    const double amp = std::sqrt(2.0 * sigma / dt);
    const double ex = normal(rng);
    const double ez = normal(rng);
    return {amp * ex, amp * ez};
}

// ---------------------------------------------------------------------------
// Soft-sphere pair contact

struct PairForce {
    Vec2 on_i;
    Vec2 on_j;
    double normal = 0.0;      // |F_n|
    double tangential = 0.0;  // |F_t|
    bool touching = false;
};

/// Linear spring-dashpot pair force. `image_shift` displaces pj (periodic images).
/// The normal force is floored at zero: contacts push, they never pull.
inline PairForce pair_contact_force(const Particle& pi, const Particle& pj, const ContactParams& c,
                                    Vec2 image_shift = {}) {
    const Vec2 d = pi.position() - (pj.position() + image_shift);
    const double dist = norm(d);
    const double overlap = 0.5 * (pi.diameter + pj.diameter) - dist;
    if (overlap <= 0.0) return {};
    if (dist == 0.0) throw NumericalDegeneracy("pair contact with coincident centres");

    const Vec2 n = (1.0 / dist) * d;  // from j towards i
    const Vec2 t{-n.z, n.x};
    const Vec2 v_rel = pi.velocity() - pj.velocity();
    const double vn = dot(v_rel, n);
    const double vt = dot(v_rel, t);

    const double fn = std::max(c.k_n * overlap - c.c_n * vn, 0.0);
    const double ft_limit = c.mu * fn;
    const double ft = std::clamp(-(c.k_t + c.eta_t) * vt, -ft_limit, ft_limit);

    PairForce out;
    out.on_i = fn * n + ft * t;
    out.on_j = -out.on_i;
    out.normal = fn;
    out.tangential = std::abs(ft);
    out.touching = true;
    return out;
}

// ---------------------------------------------------------------------------
// Particle-bed events

struct BedContact {
    bool contact = false;
    double penetration = 0.0;
};

/// Geometric criterion on the sphere's lowest point (centre minus radius).
inline BedContact detect_bed_contact(const Particle& p, const BedProfile& bed) noexcept {
    const double zb = bed_elevation(bed, p.x);
    const double bottom = p.z - p.radius();
    return {bottom <= zb, std::max(0.0, zb - bottom)};
}

enum class BedEventClass { None, Impact, Rolling };

/// Falling speed over one diameter (scaled by beta) plus a flow term.
inline double impact_threshold(double diameter, double U0, const EventParams& ep) noexcept {
    return ep.beta * std::sqrt(2.0 * kGravity * diameter) + ep.gamma * U0;
}

/// Impact takes precedence over rolling when both criteria hold.
inline BedEventClass classify_bed_event(const Particle& p, double bed_z, double U0, const EventParams& ep,
                                        bool in_contact) noexcept {
    if (!in_contact) return BedEventClass::None;
    if (p.vz < 0.0 && -p.vz >= impact_threshold(p.diameter, U0, ep)) return BedEventClass::Impact;
    const double height = p.z - bed_z;
    if (p.vx > 0.0 && p.vx >= ep.roll_vx_factor * U0 && height < ep.roll_height_factor * p.diameter) {
        return BedEventClass::Rolling;
    }
    return BedEventClass::None;
}

/// Where and when a bed event happens. `impact_tc` is the particle's impact contact time.
struct BedEventContext {
    double time = 0.0;
    double bed_z = 0.0;
    double impact_tc = 0.0;
};

inline double impact_impulse(double mass, double e, double pre_vz) noexcept {
    return mass * (1.0 + e) * std::abs(pre_vz);
}

inline std::pair<Particle, ContactEvent> apply_impact(const Particle& p, const EventParams& ep,
                                                      const BedEventContext& ctx) {
    detail::require_contract(!(p.vz > 0.0), "apply_impact: pre-collision vertical velocity is upward");
    Particle out = p;
    out.vz = -ep.e * p.vz;
    out.z = ctx.bed_z + p.radius();
    ContactEvent ev{EventKind::Impact, ctx.time,          p.x, p.id, impact_impulse(p.mass, ep.e, p.vz),
                    ctx.impact_tc,     p.vz};
    return {out, ev};
}

inline std::pair<Particle, ContactEvent> apply_rolling(const Particle& p, const EventParams& ep,
                                                       const BedEventContext& ctx) {
    Particle out = p;
    out.vz = 0.0;
    out.z = ctx.bed_z + p.radius();
    ContactEvent ev{EventKind::Rolling,
                    ctx.time,
                    p.x,
                    p.id,
                    ep.alpha_roll_impulse * impact_impulse(p.mass, ep.e, p.vz),
                    ep.rolling_duration_factor * ctx.impact_tc,
                    p.vz};
    return {out, ev};
}

}  // namespace bedseis
