#pragma once

// Time integration of the particle population over the rough bed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bedseis/error.hpp"
#include "bedseis/granular.hpp"
#include "bedseis/hydro_bed.hpp"
#include "bedseis/random.hpp"

namespace bedseis {

struct DynamicsParams {
    double dt = 1e-4;
    double flow_velocity = 1.0;  // U0, enters the event thresholds
    double fluid_density = 1000.0;
    double fluid_viscosity = 1e-3;
    double noise_sigma = 1e-8;
    double solid_density = 2650.0;
    double normal_stiffness = 17118.0;
    double tangential_ratio = 2.0 / 7.0;
    double friction = 0.5;
    /// Coulomb resistance coefficient against the submerged-free weight of
    /// particles resting on or rolling along the bed.
    double bed_resistance = 0.1;
    EventParams events;

    bool drag = true;
    bool noise = true;
    bool pair_contacts = true;

    void validate() const {
        detail::require_config(dt > 0.0, "dt", "must be positive");
        detail::require_config(fluid_density > 0.0, "fluid.density", "must be positive");
        detail::require_config(fluid_viscosity > 0.0, "fluid.viscosity", "must be positive");
        detail::require_config(noise_sigma >= 0.0, "fluid.stochastic_sigma", "must be non-negative");
        detail::require_config(solid_density > 0.0, "grains.solid_density", "must be positive");
        detail::require_config(normal_stiffness > 0.0, "contact.normal_stiffness", "must be positive");
        detail::require_config(tangential_ratio >= 0.0, "contact.tangential_ratio", "must be non-negative");
        detail::require_config(friction >= 0.0 && friction <= 2.0, "contact.friction", "must lie in [0, 2]");
        detail::require_config(bed_resistance >= 0.0, "contact.bed_resistance", "must be non-negative");
        events.validate();
    }

    /// Contact parameters for a pair with reduced mass m_eff; the dashpot is
    /// tuned to the same restitution coefficient as bed impacts.
    ContactParams pair_params(double m_eff) const {
        const double c_n = damping_for_restitution(m_eff, normal_stiffness, events.e);
        return {normal_stiffness, c_n, tangential_ratio * normal_stiffness, c_n, friction};
    }
};

struct StepDiagnostics {
    double max_coulomb_excess = -std::numeric_limits<double>::infinity();  // max(|F_t| - mu |F_n|)
    std::uint64_t pair_contacts = 0;
    std::uint64_t steps = 0;
};

/// Owns the particle state. Advances by semi-implicit Euler: velocities from
/// the summed forces first, then positions from the new velocities.
class ParticleSystem {
public:
    ParticleSystem(BedProfile bed, FlowProfile flow, DynamicsParams params, double smallest_diameter,
                   std::uint64_t noise_seed)
        : bed_(std::move(bed)), flow_(flow), params_(params), rng_(make_rng(noise_seed)) {
        params_.validate();
        flow_.validate();
        detail::require_config(smallest_diameter > 0.0, "grains.d_min", "must be positive");
        const double m_min = sphere_mass(smallest_diameter, params_.solid_density);
        const double tc_min = contact_time(effective_mass(m_min, m_min), params_.normal_stiffness);
        if (!(params_.dt < tc_min / 10.0)) {
            throw InvalidConfiguration("dt: " + std::to_string(params_.dt) +
                                           " s violates dt < t_c/10 for the stiffest contact (t_c = " +
                                           std::to_string(tc_min) + " s)",
                                       "dt");
        }
    }

    const Particle& add_particle(double diameter, double x, double z, double vx = 0.0, double vz = 0.0) {
        Particle p = make_particle(static_cast<int>(particles_.size()), diameter, params_.solid_density,
                                   wrap_periodic(x, bed_.length()), z, time());
        p.vx = vx;
        p.vz = vz;
        particles_.push_back(p);
        in_contact_.push_back(0);
        last_rolling_.push_back(-std::numeric_limits<double>::infinity());
        last_impact_.push_back(-std::numeric_limits<double>::infinity());
        forces_.emplace_back();
        order_.push_back(particles_.size() - 1);
        max_diameter_ = std::max(max_diameter_, diameter);
        sort_order();
        return particles_.back();
    }

    /// True when a sphere of this diameter centred at (x, z) would overlap an existing particle.
    bool overlaps_existing(double diameter, double x, double z) const {
        const double length = bed_.length();
        for (const auto& q : particles_) {
            double dx = x - q.x;
            dx -= length * std::round(dx / length);
            const double shift = (x - q.x) - dx;  // multiple of L applied to q
            const double dz = z - (q.z - bed_.slope * shift);
            if (std::hypot(dx, dz) < 0.5 * (diameter + q.diameter)) return true;
        }
        return false;
    }

    std::span<const Particle> particles() const noexcept { return particles_; }
    double time() const noexcept { return static_cast<double>(steps_) * params_.dt; }
    const StepDiagnostics& diagnostics() const noexcept { return diag_; }
    const BedProfile& bed() const noexcept { return bed_; }
    const FlowProfile& flow() const noexcept { return flow_; }
    const DynamicsParams& params() const noexcept { return params_; }
    bool in_contact(std::size_t index) const { return in_contact_.at(index) != 0; }

    /// Impact contact time of a particle against the rigid bed.
    double impact_contact_time(const Particle& p) const {
        return contact_time(p.mass, params_.normal_stiffness);
    }

    /// One step of length params().dt. Returns the bed events of this step in particle-id order.
    std::vector<ContactEvent> step() {
        const double dt = params_.dt;
        const double length = bed_.length();
        const std::size_t n = particles_.size();

        for (std::size_t i = 0; i < n; ++i) {
            const Particle& p = particles_[i];
            Vec2 f{0.0, -kGravity * p.mass};
            if (params_.drag) {
                const double u = fluid_velocity(flow_, p.z - bed_elevation(bed_, p.x));
                f += drag_force(p, {u, 0.0}, params_.fluid_density, params_.fluid_viscosity);
            }
            if (params_.noise) f += stochastic_force(params_.noise_sigma, dt, rng_);
            forces_[i] = f;
        }
        if (params_.pair_contacts && n > 1) accumulate_pair_forces();

        ++steps_;
        ++diag_.steps;
        const double t_new = time();
        std::vector<ContactEvent> events;

        for (std::size_t i = 0; i < n; ++i) {
            Particle& p = particles_[i];
            p.vx += forces_[i].x / p.mass * dt;
            p.vz += forces_[i].z / p.mass * dt;
            if (in_contact_[i] && params_.bed_resistance > 0.0) {
                const double dv = params_.bed_resistance * kGravity * dt;
                p.vx = std::abs(p.vx) <= dv ? 0.0 : p.vx - std::copysign(dv, p.vx);
            }
            p.x += p.vx * dt;
            p.z += p.vz * dt;
            // The domain is periodic in the frame of the inclined bed.
            if (p.x >= length) {
                p.x -= length;
                p.z += bed_.slope * length;
            } else if (p.x < 0.0) {
                p.x += length;
                p.z -= bed_.slope * length;
            }
            if (!(std::isfinite(p.x) && std::isfinite(p.z) && std::isfinite(p.vx) && std::isfinite(p.vz))) {
                throw NumericalDegeneracy("non-finite state for particle " + std::to_string(p.id) + " at t = " +
                                          std::to_string(t_new));
            }
            resolve_bed(i, t_new, events);
        }
        sort_order();
        return events;
    }

private:
    void resolve_bed(std::size_t i, double t, std::vector<ContactEvent>& events) {
        Particle& p = particles_[i];
        const double zb = bed_elevation(bed_, p.x);
        const bool contact = p.z - p.radius() <= zb;
        if (!contact) {
            in_contact_[i] = 0;
            return;
        }
        const BedEventContext ctx{t, zb, impact_contact_time(p)};
        auto kind = classify_bed_event(p, zb, params_.flow_velocity, params_.events, true);
        // A collision starts at contact onset; a particle already resting on the
        // bed and pressed down by its neighbours does not impact again.
        // Nor does a new impact start while the previous one is still in progress.
        if (kind == BedEventClass::Impact && (in_contact_[i] || t - last_impact_[i] < ctx.impact_tc)) {
            kind = BedEventClass::None;
        }
        switch (kind) {
            case BedEventClass::Impact: {
                auto [q, ev] = apply_impact(p, params_.events, ctx);
                p = q;
                events.push_back(ev);
                last_impact_[i] = t;
                in_contact_[i] = 0;
                return;
            }
            case BedEventClass::Rolling: {
                // Sustained rolling re-emits once per rolling pulse duration.
                const double roll_tc = params_.events.rolling_duration_factor * ctx.impact_tc;
                if (t - last_rolling_[i] >= roll_tc) {
                    auto [q, ev] = apply_rolling(p, params_.events, ctx);
                    p = q;
                    events.push_back(ev);
                    last_rolling_[i] = t;
                    in_contact_[i] = 1;
                    return;
                }
                break;
            }
            case BedEventClass::None: break;
        }
        p.z = zb + p.radius();
        p.vz = std::max(p.vz, 0.0);
        in_contact_[i] = 1;
    }

    // Sweep along x over the particles sorted by centre position; the
    // candidate window is bounded by the largest diameter present.
    void accumulate_pair_forces() {
        const std::size_t n = particles_.size();
        const double length = bed_.length();
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = order_[a];
            const Particle& pi = particles_[i];
            const double reach = 0.5 * (pi.diameter + max_diameter_);
            for (std::size_t s = 1; s < n; ++s) {
                std::size_t b = a + s;
                double shift = 0.0;
                if (b >= n) {
                    b -= n;
                    shift = length;
                }
                const std::size_t j = order_[b];
                const Particle& pj = particles_[j];
                if (pj.x + shift - pi.x >= reach) break;
                const Vec2 image{shift, -bed_.slope * shift};
                const auto dz = pi.z - (pj.z + image.z);
                if (std::abs(dz) >= 0.5 * (pi.diameter + pj.diameter)) continue;
                const ContactParams cp = params_.pair_params(effective_mass(pi.mass, pj.mass));
                const PairForce pf = pair_contact_force(pi, pj, cp, image);
                if (!pf.touching) continue;
                forces_[i] += pf.on_i;
                forces_[j] += pf.on_j;
                ++diag_.pair_contacts;
                diag_.max_coulomb_excess = std::max(diag_.max_coulomb_excess, pf.tangential - cp.mu * pf.normal);
            }
        }
    }

    void sort_order() {
        // Insertion sort: the order changes little between steps.
        for (std::size_t a = 1; a < order_.size(); ++a) {
            const std::size_t key = order_[a];
            std::size_t b = a;
            while (b > 0 && before(key, order_[b - 1])) {
                order_[b] = order_[b - 1];
                --b;
            }
            order_[b] = key;
        }
    }

    bool before(std::size_t u, std::size_t v) const noexcept {
        const double xu = particles_[u].x;
        const double xv = particles_[v].x;
        return xu < xv || (xu == xv && u < v);
    }

    BedProfile bed_;
    FlowProfile flow_;
    DynamicsParams params_;
    Rng rng_;
    std::vector<Particle> particles_;
    std::vector<char> in_contact_;
    std::vector<double> last_rolling_;
    std::vector<double> last_impact_;
    std::vector<Vec2> forces_;
    std::vector<std::size_t> order_;
    double max_diameter_ = 0.0;
    std::uint64_t steps_ = 0;
    StepDiagnostics diag_;
};

// ---------------------------------------------------------------------------
// Full run with injection and trajectory recording

struct TrajectorySample {
    double time = 0.0;
    int particle_id = 0;
    double x = 0.0;
    double z = 0.0;
    double vx = 0.0;
    double vz = 0.0;
    double diameter = 0.0;
};

struct SimulationSetup {
    BedProfile bed;
    FlowProfile flow;
    GrainDistribution grains;
    DynamicsParams dynamics;
    double flow_depth = 0.2;
    double injection_rate = 2.0;  // particles per second
    bool poisson_injection = false;
    double duration = 200.0;
    double record_interval = 0.05;  // trajectory sampling period
    std::uint64_t seed = 1;
};

struct SimulationResult {
    std::vector<TrajectorySample> trajectories;  // ordered by (time, particle id)
    std::vector<ContactEvent> events;            // ordered by (time, particle id)
    std::vector<double> diameters;               // indexed by particle id
    std::vector<double> masses;
    StepDiagnostics diagnostics;
    double duration = 0.0;
    double record_interval = 0.0;
};

/// Injection instants in [0, duration): evenly spaced by 1/rate, or a Poisson
/// process with that rate.
inline std::vector<double> injection_times(double rate, double duration, bool poisson, std::uint64_t seed) {
    std::vector<double> out;
    if (rate <= 0.0 || duration <= 0.0) return out;
    if (!poisson) {
        for (std::size_t k = 0;; ++k) {
            const double t = static_cast<double>(k) / rate;
            if (t >= duration) break;
            out.push_back(t);
        }
        return out;
    }
    auto rng = make_rng(seed);
    std::exponential_distribution<double> gap(rate);
    for (double t = gap(rng); t < duration; t += gap(rng)) out.push_back(t);
    return out;
}

inline SimulationResult run_simulation(const SimulationSetup& s) {
    detail::require_config(s.duration >= 0.0, "duration", "must be non-negative");
    detail::require_config(s.injection_rate >= 0.0, "injection_rate", "must be non-negative");
    detail::require_config(s.flow_depth > 0.0, "flow_depth", "must be positive");
    detail::require_config(s.record_interval > 0.0, "analysis.trajectory_fs", "must be positive");
    s.grains.validate();
    detail::require_config(s.bed.length() >= 2.0 * s.grains.d_max, "domain_length",
                           "must be at least twice the largest grain diameter");

    const double dt = s.dynamics.dt;
    const auto steps_per_record = static_cast<std::int64_t>(std::llround(s.record_interval / dt));
    detail::require_config(steps_per_record >= 1 &&
                               std::abs(static_cast<double>(steps_per_record) * dt - s.record_interval) <
                                   1e-9 * s.record_interval,
                           "analysis.trajectory_fs", "recording period must be a whole number of time steps");

    ParticleSystem system(s.bed, s.flow, s.dynamics, s.grains.d_min, derive_seed(s.seed, Stream::Dynamics));

    const auto arrivals =
        injection_times(s.injection_rate, s.duration, s.poisson_injection, derive_seed(s.seed, Stream::Injection));
    std::vector<double> diameters;
    if (!arrivals.empty()) diameters = sample_diameters(s.grains, arrivals.size(), derive_seed(s.seed, Stream::Grains));

    SimulationResult result;
    result.duration = s.duration;
    result.record_interval = s.record_interval;

    auto place_rng = make_rng(derive_seed(s.seed, Stream::Injection) ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double length = s.bed.length();

    const auto n_steps = static_cast<std::int64_t>(std::llround(s.duration / dt));
    std::size_t next = 0;
    for (std::int64_t step = 0;; ++step) {
        const double t = static_cast<double>(step) * dt;
        while (next < arrivals.size() && arrivals[next] <= t + 0.5 * dt) {
            const double d = diameters[next];
            double x = 0.0;
            double z = 0.0;
            for (int attempt = 0; attempt < 32; ++attempt) {
                x = unit(place_rng) * length;
                const double zb = bed_elevation(s.bed, x);
                const double lo = zb + 0.5 * d;
                const double hi = std::max(lo, zb + s.flow_depth - 0.5 * d);
                z = lo + unit(place_rng) * (hi - lo);
                if (!system.overlaps_existing(d, x, z)) break;
            }
            const Particle& p = system.add_particle(d, x, z);
            result.diameters.push_back(p.diameter);
            result.masses.push_back(p.mass);
            ++next;
        }
        if (step % steps_per_record == 0) {
            for (const auto& p : system.particles()) {
                result.trajectories.push_back({t, p.id, p.x, p.z, p.vx, p.vz, p.diameter});
            }
        }
        if (step >= n_steps) break;
        auto events = system.step();
        result.events.insert(result.events.end(), events.begin(), events.end());
    }
    result.diagnostics = system.diagnostics();
    return result;
}

}  // namespace bedseis
