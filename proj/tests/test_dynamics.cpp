#include <doctest.h>

#include "fallingballs/dynamics.hpp"
#include "fallingballs/errors.hpp"
#include "fallingballs/oracle.hpp"

#include <cmath>
#include <random>

using namespace fallingballs;
using doctest::Approx;

TEST_CASE("energy examples") {
    CHECK(energy({{0, 1}, {0, 0}, 0}, MassVector({1, 1})) == Approx(1.0));
    CHECK(energy({{0, 0}, {1, 1}, 0}, MassVector({1, 1})) == Approx(1.0));
    CHECK(energy({{0.1, 0.2, 0.3}, {0, 0, 0}, 0}, MassVector({3, 2, 1})) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("next_event examples agree with the bisection oracle") {
    const MassVector m({1, 1});
    const PhaseState a{{1, 2}, {2, 0}, 0};
    const auto ea = next_event(a, m);
    CHECK(ea.label == 1);
    CHECK(ea.dt == Approx(0.5).epsilon(1e-15));
    const auto oa = oracle::bisect_collision_time(a, m);
    CHECK(oa.label == 1);
    CHECK(std::abs(oa.dt - ea.dt) <= 1e-10);

    const PhaseState b{{1, 2}, {1, 1}, 0};
    const auto eb = next_event(b, m);
    CHECK(eb.label == floor_label);
    CHECK(eb.dt == Approx(1.0 + std::sqrt(3.0)).epsilon(1e-15));
    const auto ob = oracle::bisect_collision_time(b, m);
    CHECK(ob.label == floor_label);
    CHECK(std::abs(ob.dt - eb.dt) <= 1e-10);

    for (double c : {0.1, 0.7, 1.3}) {
        const auto e = next_event({{0, 1}, {c, c}, 0}, m);
        CHECK(e.label == floor_label);
        CHECK(e.dt == Approx(2 * c));
    }
}

TEST_CASE("floor time from below uses the stable branch") {
    const MassVector m({1, 1});
    const PhaseState s{{1e-12, 0.5}, {-1.0, -1.0}, 0};
    const auto e = next_event(s, m);
    CHECK(e.label == floor_label);
    // q1 + v1 t - t^2/2 = 0 -> t ~ q1 / |v1|
    CHECK(e.dt == Approx(1e-12).epsilon(1e-9));
}

TEST_CASE("multiple collision is a singularity") {
    // Floor at t = 1 and pair (1,2) closing 0.5 at rate 0.5 also at t = 1.
    const PhaseState s{{0.5, 1.0}, {0.0, -0.5}, 0};
    CHECK_THROWS_AS((void)next_event(s, MassVector({1, 1})), MultipleCollision);
}

TEST_CASE("advance") {
    const PhaseState s{{0, 1}, {1, 1}, 0};
    const auto a = advance(s, 1.0);
    CHECK(a.q[0] == Approx(0.5));
    CHECK(a.q[1] == Approx(1.5));
    CHECK(a.v[0] == Approx(0.0));
    CHECK(a.t == 1.0);

    const auto same = advance(s, 0.0);
    CHECK(same.q == s.q);
    CHECK(same.v == s.v);

    const auto meet = advance({{1, 2}, {2, 0}, 0}, 0.5);
    CHECK(meet.q[0] == Approx(1.875));
    CHECK(meet.q[1] == Approx(1.875));
    CHECK(meet.v[0] == Approx(1.5));
    CHECK(meet.v[1] == Approx(-0.5));

    CHECK_THROWS_AS((void)advance({{1, 2}, {2, 0}, 0}, 1.0), OrderViolation);
    CHECK_THROWS_AS((void)advance(s, -1.0), DomainError);
}

TEST_CASE("apply_collision examples") {
    {
        const auto out = apply_collision({{1, 1}, {1, -1}, 0}, 1, MassVector({1, 1}));
        CHECK(out.state.v[0] == Approx(-1));
        CHECK(out.state.v[1] == Approx(1));
        CHECK(out.event.rho == Approx(2));
    }
    {
        const MassVector m({3, 1});
        const auto out = apply_collision({{1, 1}, {1, -1}, 0}, 1, m);
        CHECK(out.state.v[0] == Approx(0.0));
        CHECK(out.state.v[1] == Approx(2.0));
        CHECK(3 * out.state.v[0] + out.state.v[1] == Approx(2.0));
        CHECK(0.5 * 3 * out.state.v[0] * out.state.v[0] + 0.5 * out.state.v[1] * out.state.v[1] == Approx(2.0));
    }
    {
        const auto out = apply_collision({{0, 1}, {-2, 0}, 0}, floor_label, MassVector({1, 1}));
        CHECK(out.state.v[0] == Approx(2));
        CHECK(out.event.rho == Approx(2));
        CHECK(out.event.label == floor_label);
    }
    CHECK_THROWS_AS((void)apply_collision({{0, 1}, {-1e-13, 0}, 0}, floor_label, MassVector({1, 1})),
                    GrazingSingularity);
    CHECK_THROWS_AS((void)apply_collision({{1, 1}, {1e-13, 0}, 0}, 1, MassVector({1, 1})), GrazingSingularity);
    CHECK_THROWS_AS((void)apply_collision({{0.5, 1}, {-1, 0}, 0}, floor_label, MassVector({1, 1})),
                    PreconditionViolated);
    CHECK_THROWS_AS((void)apply_collision({{0.5, 1}, {1, 0}, 0}, 1, MassVector({1, 1})), PreconditionViolated);
}

TEST_CASE("ball collision conserves momentum and is an involution") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mass(0.1, 5.0);
    std::normal_distribution<double> vel;
    for (int k = 0; k < 1000; ++k) {
        double m1 = mass(rng), m2 = mass(rng);
        if (m1 < m2) std::swap(m1, m2);
        const MassVector m({m1, m2});
        double v1 = vel(rng), v2 = vel(rng);
        if (v1 < v2) std::swap(v1, v2);
        const auto once = apply_collision({{1, 1}, {v1, v2}, 0}, 1, m);
        const double p0 = m1 * v1 + m2 * v2;
        const double p1 = m1 * once.state.v[0] + m2 * once.state.v[1];
        CHECK(std::abs(p1 - p0) <= 1e-12 * (std::abs(m1 * v1) + std::abs(m2 * v2)));
        // The velocity map is R_i, and R_i^2 = I.
        const double g = m.gamma(1);
        const double a = once.state.v[0];
        const double b = once.state.v[1];
        CHECK(std::abs(g * a + (1 - g) * b - v1) <= 1e-14 * (1 + std::abs(v1)) * 4);
        CHECK(std::abs((1 + g) * a - g * b - v2) <= 1e-14 * (1 + std::abs(v2)) * 4);
    }
}

TEST_CASE("simulate with zero collisions returns the input") {
    const MassVector m({2, 1});
    std::mt19937_64 rng(1);
    const auto x0 = sample_state(m, rng);
    const auto r = simulate(x0, m, StopCondition::collisions(0));
    CHECK(r.events.empty());
    CHECK(r.state.q == x0.q);
    CHECK(r.state.v == x0.v);
}

TEST_CASE("equal masses: first events follow the ghost picture") {
    const MassVector m({1, 1});
    const PhaseState x0{{0.0, 0.5}, {0.6, -0.8}, 0.0};
    REQUIRE(energy(x0, m) == Approx(1.0));
    const auto run = simulate(x0, m, StopCondition::collisions(12));
    const auto ghost = oracle::ghost_trajectory(x0, run.events.back().t + 1e-6);
    REQUIRE(ghost.events.size() >= run.events.size());
    for (std::size_t k = 0; k < run.events.size(); ++k) {
        CHECK(run.events[k].label == ghost.events[k].label);
        CHECK(run.events[k].t == Approx(ghost.events[k].t).epsilon(1e-12));
    }
}

TEST_CASE("energy drift over 1e4 collisions, m=(2,1)") {
    const MassVector m({2, 1});
    std::mt19937_64 rng(17);
    const auto x0 = sample_state(m, rng);
    Simulator sim(x0, m);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        sim.step();
        worst = std::max(worst, std::abs(energy(sim.state(), m) - 1.0));
        const auto& q = sim.state().q;
        CHECK_MESSAGE(q[0] >= -1e-9, "ordering");
        CHECK_MESSAGE(q[1] - q[0] >= -1e-9, "ordering");
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("time reversal reproduces the labels backwards") {
    const MassVector m({3, 2, 1});
    std::mt19937_64 rng(23);
    const auto x0 = sample_state(m, rng);
    const auto fwd = simulate(x0, m, StopCondition::collisions(51));
    const double t_mid = 0.5 * (fwd.events[49].t + fwd.events[50].t);
    auto mid = simulate(x0, m, StopCondition::until(t_mid)).state;
    for (double& v : mid.v) v = -v;
    const auto back = simulate(mid, m, StopCondition::collisions(50));
    REQUIRE(back.events.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(back.events[k].label == fwd.events[49 - k].label);
        CHECK(back.events[k].t - t_mid == Approx(t_mid - fwd.events[49 - k].t).epsilon(1e-9));
    }
    const auto home = simulate(mid, m, StopCondition::until(2 * t_mid - x0.t)).state;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(home.q[i] == Approx(x0.q[i]).epsilon(1e-8));
        CHECK(-home.v[i] == Approx(x0.v[i]).epsilon(1e-8));
    }
}

TEST_CASE("simulate until a time ends exactly there") {
    const MassVector m({2, 1});
    std::mt19937_64 rng(2);
    const auto x0 = sample_state(m, rng);
    const auto r = simulate(x0, m, StopCondition::until(12.5));
    CHECK(r.state.t == 12.5);
    CHECK(std::abs(energy(r.state, m) - 1.0) <= 1e-12);
    for (const auto& e : r.events) CHECK(e.t <= 12.5);
}

TEST_CASE("accumulation guard") {
    const MassVector m({2, 1});
    std::mt19937_64 rng(3);
    SimulationOptions opt;
    opt.accumulation_count = 3;
    opt.accumulation_window = 1e9;
    Simulator sim(sample_state(m, rng), m, opt);
    sim.step();
    sim.step();
    sim.step();
    const auto before = sim.state();
    CHECK_THROWS_AS(sim.step(), AccumulationSuspected);
    CHECK(sim.collisions() == 3);
    CHECK(sim.state().q == before.q);
}

TEST_CASE("optional renormalization logs its factors") {
    const MassVector m({2, 1});
    std::mt19937_64 rng(4);
    SimulationOptions opt;
    opt.renormalize_every = 100;
    const auto r = simulate(sample_state(m, rng), m, StopCondition::collisions(1000), opt);
    CHECK(r.renormalization_factors.size() == 10);
    for (double f : r.renormalization_factors) CHECK(f == Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(energy(r.state, m) - 1.0) <= 1e-14);
}

TEST_CASE("state validation and sampling") {
    const MassVector m({2, 1});
    CHECK_THROWS_AS(validate_state({{0, 2}, {0, 0}, 0}, m), DomainError);
    CHECK_THROWS_AS(validate_state({{0.5, 0.0}, {0, 0}, 0}, MassVector({1, 1})), DomainError);
    CHECK_THROWS_AS(validate_state({{0, 1, 2}, {0, 0, 0}, 0}, m), DomainError);
    CHECK_THROWS_AS(Simulator({{0, 2}, {0, 0}, 0}, m), DomainError);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 100; ++k) {
        const auto s = sample_state(MassVector({3, 2, 1}), rng);
        CHECK(std::abs(energy(s, MassVector({3, 2, 1})) - 1.0) <= 1e-12);
        CHECK(s.q[0] >= 0.0);
        CHECK(s.q[1] >= s.q[0]);
        CHECK(s.q[2] >= s.q[1]);
    }
}
