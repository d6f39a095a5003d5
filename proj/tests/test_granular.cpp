#include <gtest/gtest.h>

#include <cmath>

#include "bedseis/simulation.hpp"

using namespace bedseis;

namespace {

Particle at(double d, double x, double z, double vx = 0.0, double vz = 0.0) {
    Particle p = make_particle(0, d, 2650.0, x, z);
    p.vx = vx;
    p.vz = vz;
    return p;
}

SimulationSetup small_setup(double duration, double rate, std::uint64_t seed = 3) {
    SimulationSetup s;
    s.bed = build_bed(5.0, 0.05, 501, 1e-3, seed);
    s.flow = {1.0, 0.2, 0.11 / 30.0, 1.0 / 7.0};
    s.flow_depth = 0.2;
    s.injection_rate = rate;
    s.duration = duration;
    s.record_interval = 0.05;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Mass, SphereOfFiveCentimetres) {
    EXPECT_NEAR(sphere_mass(0.05, 2650.0), 0.17344209441693653, 1e-15);
}

TEST(Drag, NoSlipNoForce) {
    const Particle p = at(0.05, 0, 0, 0.7, 0.0);
    const Vec2 f = drag_force(p, {0.7, 0.0}, 1000.0, 1e-3);
    EXPECT_EQ(f.x, 0.0);
    EXPECT_EQ(f.z, 0.0);
}

TEST(Drag, NewtonRegimeValue) {
    const Particle p = at(0.05, 0, 0);
    const Vec2 f = drag_force(p, {1.0, 0.0}, 1000.0, 1e-3);
    EXPECT_NEAR(f.x, 0.4319689898685966, 1e-14);
    EXPECT_EQ(f.z, 0.0);
    EXPECT_EQ(drag_coefficient(5e4), 0.44);
}

TEST(Drag, SchillerNaumann) {
    EXPECT_NEAR(drag_coefficient(1.0), 27.6, 1e-12);
    EXPECT_NEAR(drag_coefficient(999.999), 0.438288140019997, 1e-6);
}

TEST(Drag, OpposesRelativeVelocity) {
    const Particle p = at(0.03, 0, 0, 2.0, -1.0);
    const Vec2 f = drag_force(p, {0.5, 0.0}, 1000.0, 1e-3);
    EXPECT_LT(f.x, 0.0);
    EXPECT_GT(f.z, 0.0);
}

TEST(Noise, ZeroSigmaIsSilent) {
    Rng rng = make_rng(1);
    for (int k = 0; k < 10; ++k) {
        const Vec2 f = stochastic_force(0.0, 1e-3, rng);
        EXPECT_EQ(f.x, 0.0);
        EXPECT_EQ(f.z, 0.0);
    }
}

TEST(Noise, AmplitudeAndZeroMean) {
    const double amp = std::sqrt(2.0 * 1e-8 / 1e-3);
    EXPECT_NEAR(amp, 0.00447213595499958, 1e-17);
    Rng rng = make_rng(2);
    const int n = 1000000;
    double sx = 0.0, sz = 0.0, ssx = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec2 f = stochastic_force(1e-8, 1e-3, rng);
        sx += f.x;
        sz += f.z;
        ssx += f.x * f.x;
    }
    const double se = amp / std::sqrt(static_cast<double>(n));
    EXPECT_LT(std::abs(sx / n), 4.0 * se);
    EXPECT_LT(std::abs(sz / n), 4.0 * se);
    EXPECT_NEAR(std::sqrt(ssx / n), amp, 0.01 * amp);
}

TEST(PairContact, SeparatedSpheresDoNotInteract) {
    const ContactParams c{1e4, 10.0, 2e3, 10.0, 0.5};
    const auto f = pair_contact_force(at(0.05, 0, 0), at(0.05, 0.0501, 0), c);
    EXPECT_FALSE(f.touching);
    EXPECT_EQ(f.on_i.x, 0.0);
    EXPECT_EQ(f.on_j.x, 0.0);
}

TEST(PairContact, SpringTermAlongCentreLine) {
    const ContactParams c{1e4, 0.0, 0.0, 0.0, 0.5};
    const auto f = pair_contact_force(at(0.05, 0.049, 0.0), at(0.05, 0.0, 0.0), c);
    ASSERT_TRUE(f.touching);
    EXPECT_NEAR(f.normal, 10.0, 1e-9);
    EXPECT_NEAR(f.on_i.x, 10.0, 1e-9);
    EXPECT_NEAR(f.on_i.z, 0.0, 1e-15);
    EXPECT_EQ(f.on_j.x, -f.on_i.x);
    EXPECT_EQ(f.on_j.z, -f.on_i.z);
}

TEST(PairContact, CoulombClipIsExact) {
    const ContactParams c{1e4, 5.0, 2857.0, 5.0, 0.5};
    const auto f = pair_contact_force(at(0.05, 0.0, 0.049, 1e6, 0.0), at(0.05, 0.0, 0.0), c);
    ASSERT_TRUE(f.touching);
    EXPECT_EQ(f.tangential, 0.5 * f.normal);
}

TEST(PairContact, CoulombHoldsEverywhere) {
    const ContactParams c{17118.0, 8.0, 17118.0 * 2.0 / 7.0, 8.0, 0.5};
    Rng rng = make_rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
        const auto f = pair_contact_force(at(0.05, 0.03 * u(rng), 0.03 * u(rng), 3 * u(rng), 3 * u(rng)),
                                          at(0.04, 0.0, 0.0, 3 * u(rng), 3 * u(rng)), c);
        if (!f.touching) continue;
        EXPECT_GE(f.normal, 0.0);
        EXPECT_LE(f.tangential - c.mu * f.normal, 1e-12);
    }
}

TEST(PairContact, CoincidentCentresAreDegenerate) {
    const ContactParams c{1e4, 0.0, 0.0, 0.0, 0.5};
    EXPECT_THROW(pair_contact_force(at(0.05, 1, 1), at(0.05, 1, 1), c), NumericalDegeneracy);
}

TEST(ContactTime, PaperScale) {
    EXPECT_NEAR(contact_time(0.1734, 1.712e4), 1e-2, 1e-4);
    const double t = contact_time(0.2, 1e4);
    EXPECT_NEAR(contact_time(0.2, 4e4), 0.5 * t, 1e-16);
    EXPECT_NEAR(contact_time(0.8, 1e4), 2.0 * t, 1e-16);
    EXPECT_THROW(contact_time(0.0, 1e4), InvalidConfiguration);
    EXPECT_THROW(contact_time(0.1, -1.0), InvalidConfiguration);
}

TEST(ContactTime, DashpotReproducesRestitution) {
    // Integrate one linear spring-dashpot collision against a wall.
    const double m = 0.17, k = 17118.0, e = 0.45;
    const double c = damping_for_restitution(m, k, e);
    double x = 0.0, v = -1.0;
    const double dt = 1e-8;
    do {
        v += (-k * x - c * v) / m * dt;
        x += v * dt;
    } while (x < 0.0);
    EXPECT_NEAR(v, e, 2e-4);
}

TEST(BedContact, LowestPointCriterion) {
    const auto bed = build_bed(10.0, 0.0, 11, 0.0, 0);
    const double r = 0.025;
    EXPECT_FALSE(detect_bed_contact(at(0.05, 3, 1.0 + r), bed).contact);
    const auto touch = detect_bed_contact(at(0.05, 3, r), bed);
    EXPECT_TRUE(touch.contact);
    EXPECT_EQ(touch.penetration, 0.0);
    const auto below = detect_bed_contact(at(0.05, 3, r - 0.002), bed);
    EXPECT_TRUE(below.contact);
    EXPECT_NEAR(below.penetration, 0.002, 1e-15);
}

TEST(BedEvents, Classification) {
    const EventParams ep;
    EXPECT_NEAR(impact_threshold(0.05, 1.0, ep), 0.5952272205765754, 1e-15);
    EXPECT_EQ(classify_bed_event(at(0.05, 0, 0.025, 0.0, -0.7), 0.0, 1.0, ep, true), BedEventClass::Impact);
    EXPECT_EQ(classify_bed_event(at(0.05, 0, 0.06, 0.15, -0.01), 0.0, 1.0, ep, true), BedEventClass::Rolling);
    EXPECT_EQ(classify_bed_event(at(0.05, 0, 0.025, 0.0, 0.0), 0.0, 1.0, ep, true), BedEventClass::None);
    EXPECT_EQ(classify_bed_event(at(0.05, 0, 0.025, 0.0, -0.7), 0.0, 1.0, ep, false), BedEventClass::None);
    // Fast but too high above the bed to roll.
    EXPECT_EQ(classify_bed_event(at(0.05, 0, 0.07, 0.5, 0.0), 0.0, 1.0, ep, true), BedEventClass::None);
}

TEST(BedEvents, ImpactRebound) {
    const EventParams ep;
    const Particle p = at(0.05, 1.0, 0.02, 0.3, -1.0);
    const auto [q, ev] = apply_impact(p, ep, {2.0, 0.0, 0.01});
    EXPECT_EQ(q.vz, 0.45);
    EXPECT_EQ(q.vx, 0.3);
    EXPECT_EQ(q.z, 0.025);
    EXPECT_EQ(ev.kind, EventKind::Impact);
    EXPECT_EQ(ev.impulse_J, p.mass * 1.45 * 1.0);
    EXPECT_NEAR(ev.impulse_J, 0.251491036904558, 1e-15);
    EXPECT_EQ(ev.contact_time_tc, 0.01);
    EXPECT_EQ(ev.time, 2.0);
    EXPECT_EQ(ev.pre_vz, -1.0);
}

TEST(BedEvents, ImpactOfRestingParticle) {
    const auto [q, ev] = apply_impact(at(0.05, 0, 0.025, 0.0, -0.0), EventParams{}, {0.0, 0.0, 0.01});
    EXPECT_EQ(q.vz, 0.0);
    EXPECT_EQ(ev.impulse_J, 0.0);
    EXPECT_THROW(apply_impact(at(0.05, 0, 0.025, 0.0, 0.1), EventParams{}, {0.0, 0.0, 0.01}), ContractViolation);
}

TEST(BedEvents, RollingImpulse) {
    const EventParams ep;
    const Particle p = at(0.05, 1.0, 0.025, 0.3, -1.0);
    const auto [q, ev] = apply_rolling(p, ep, {1.0, 0.0, 0.01});
    EXPECT_EQ(ev.kind, EventKind::Rolling);
    EXPECT_EQ(ev.impulse_J, 0.3 * impact_impulse(p.mass, 0.45, -1.0));
    EXPECT_NEAR(ev.impulse_J, 0.07544731107136739, 1e-15);
    EXPECT_EQ(ev.contact_time_tc, 0.1);
    EXPECT_EQ(q.vz, 0.0);
    const auto [q0, ev0] = apply_rolling(at(0.05, 1.0, 0.025, 0.3, 0.0), ep, {1.0, 0.0, 0.01});
    EXPECT_EQ(ev0.impulse_J, 0.0);
}

TEST(System, RejectsUnstableStep) {
    DynamicsParams d;
    d.dt = 5e-3;
    try {
        ParticleSystem sys(build_bed(5, 0.05, 51, 0, 0), FlowProfile{}, d, 0.015, 1);
        FAIL() << "expected rejection";
    } catch (const InvalidConfiguration& e) {
        EXPECT_EQ(e.key(), "dt");
    }
}

TEST(System, DroppedGrainBouncesWithRestitution) {
    DynamicsParams d;
    d.drag = false;
    d.noise = false;
    ParticleSystem sys(build_bed(5, 0.0, 501, 0.0, 0), FlowProfile{}, d, 0.015, 1);
    sys.add_particle(0.05, 2.0, 0.3);
    std::vector<ContactEvent> events;
    for (int k = 0; k < 5000; ++k) {
        auto ev = sys.step();
        events.insert(events.end(), ev.begin(), ev.end());
    }
    ASSERT_FALSE(events.empty());
    const auto& first = events.front();
    EXPECT_EQ(first.kind, EventKind::Impact);
    EXPECT_NEAR(first.pre_vz, -std::sqrt(2.0 * kGravity * 0.275), 0.01);
    EXPECT_EQ(first.impulse_J, impact_impulse(sys.particles()[0].mass, 0.45, first.pre_vz));
    // Impact speeds decay geometrically until they fall under the threshold.
    for (std::size_t k = 1; k < events.size(); ++k) {
        if (events[k].kind != EventKind::Impact) continue;
        EXPECT_LT(std::abs(events[k].pre_vz), std::abs(events[k - 1].pre_vz));
    }
    const auto& p = sys.particles()[0];
    EXPECT_GE(p.z - p.radius(), -1e-12);
}

TEST(System, PeriodicWrapFollowsTheSlope) {
    DynamicsParams d;
    d.drag = false;
    d.noise = false;
    const auto bed = build_bed(5, 0.05, 501, 0.0, 0);
    ParticleSystem sys(bed, FlowProfile{}, d, 0.015, 1);
    const double z0 = bed_elevation(bed, 4.9999) + 1.0;
    sys.add_particle(0.05, 4.9999, z0, 2.0, 0.0);
    sys.step();
    const auto& p = sys.particles()[0];
    EXPECT_LT(p.x, 0.01);
    // Height above the local bed is continuous across the seam.
    EXPECT_NEAR(p.z - bed_elevation(bed, p.x), z0 - bed_elevation(bed, 4.9999), 1e-3);
}

TEST(System, PairForcesConserveMomentum) {
    DynamicsParams d;
    d.drag = false;
    d.noise = false;
    ParticleSystem sys(build_bed(5, 0.0, 501, 0.0, 0), FlowProfile{}, d, 0.015, 1);
    sys.add_particle(0.05, 1.0, 2.0, 1.0, 0.0);
    sys.add_particle(0.08, 1.2, 2.01, -0.5, 0.0);
    const auto momentum = [&] {
        double px = 0.0;
        for (const auto& p : sys.particles()) px += p.mass * p.vx;
        return px;
    };
    const double before = momentum();
    for (int k = 0; k < 2000; ++k) sys.step();
    EXPECT_NEAR(momentum(), before, 1e-12);
    EXPECT_GT(sys.diagnostics().pair_contacts, 0u);
    EXPECT_LE(sys.diagnostics().max_coulomb_excess, 1e-12);
}

TEST(Run, NoInjectionNoOutput) {
    const auto r = run_simulation(small_setup(2.0, 0.0));
    EXPECT_TRUE(r.events.empty());
    EXPECT_TRUE(r.trajectories.empty());
    const auto z = run_simulation(small_setup(0.0, 2.0));
    EXPECT_TRUE(z.events.empty());
}

TEST(Run, InjectionSchedule) {
    const auto t = injection_times(0.4, 10.0, false, 1);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_DOUBLE_EQ(t[1] - t[0], 2.5);
    const auto p = injection_times(2.0, 100.0, true, 1);
    EXPECT_NEAR(static_cast<double>(p.size()), 200.0, 50.0);
    EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
}

TEST(Run, DeterministicAndOrdered) {
    const auto a = run_simulation(small_setup(6.0, 4.0));
    const auto b = run_simulation(small_setup(6.0, 4.0));
    ASSERT_EQ(a.events.size(), b.events.size());
    EXPECT_TRUE(a.events == b.events);
    EXPECT_EQ(a.diameters, b.diameters);
    for (std::size_t k = 1; k < a.events.size(); ++k) EXPECT_LE(a.events[k - 1].time, a.events[k].time);
    for (const auto& s : a.trajectories) {
        EXPECT_TRUE(std::isfinite(s.x) && std::isfinite(s.z) && std::isfinite(s.vx) && std::isfinite(s.vz));
    }
}
