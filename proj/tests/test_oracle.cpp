#include <doctest.h>

#include "fallingballs/ensemble.hpp"
#include "fallingballs/errors.hpp"
#include "fallingballs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace fallingballs;

TEST_CASE("bisection agrees with the closed-form event time") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> mass(0.2, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(k % 4);
        std::vector<double> mv(n);
        for (auto& x : mv) x = mass(rng);
        std::sort(mv.rbegin(), mv.rend());
        const MassVector m(mv);
        const auto s = sample_state(m, rng);
        const auto fast = next_event(s, m);
        const auto slow = oracle::bisect_collision_time(s, m);
        CHECK(fast.label == slow.label);
        worst = std::max(worst, std::abs(fast.dt - slow.dt) / std::max(1.0, fast.dt));
    }
    CHECK(worst <= 10 * oracle::OracleConfig{}.bisection_tol);
}

TEST_CASE("oracle integrator follows the main simulator") {
    const MassVector m({3, 2, 1});
    const auto x0 = seeded_state(m, 52);
    // Unequal masses are chaotic: rounding differences grow by roughly 10x per 10 events,
    // so the comparison stops at 50.
    const auto main = simulate(x0, m, StopCondition::collisions(50));
    const auto ref = oracle::simulate(x0, m, 50, std::nullopt);
    REQUIRE(ref.events.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(ref.events[k].label == main.events[k].label);
        CHECK(std::abs(ref.events[k].t - main.events[k].t) <= 1e-9);
    }
    CHECK_THROWS_AS((void)oracle::simulate(x0, m, std::nullopt, std::nullopt), DomainError);
}

TEST_CASE("finite differences of a neutral vector keep Q1 near zero") {
    // Before the first floor collision (0, dh) with sum dh = 0 stays in dv = 0.
    const MassVector m({3, 2, 1});
    std::size_t tested = 0;
    for (std::uint64_t seed = 0; seed < 50 && tested < 5; ++seed) {
        const auto x0 = seeded_state(m, seed);
        const auto run = simulate(x0, m, StopCondition::collisions(20));
        std::size_t cut = 0;
        while (cut < run.events.size() && run.events[cut].label != floor_label) ++cut;
        if (cut < 2 || cut == run.events.size()) continue;
        const auto u = TangentVector::on_energy_surface({0.5, -0.25, -0.25}, {0, 0, 0});
        const auto fd = oracle::finite_difference_cocycle(x0, m, u, cut);
        CHECK(std::abs(q_form(fd.image)) <= 1e-8);
        ++tested;
    }
    CHECK(tested > 0);
}

TEST_CASE("ghost picture, n=2 symmetric swap") {
    const PhaseState x0{{0.2, 0.3}, {0.5, -0.5}, 0};
    const auto ghost = oracle::ghost_trajectory(x0, 0.3);
    REQUIRE(ghost.events.size() == 1);
    CHECK(ghost.events[0].label == 1);
    CHECK(ghost.events[0].t == doctest::Approx(0.1));
    CHECK(ghost.events[0].rho == doctest::Approx(1.0));
    // The lower ghost now carries the former upper ball's motion.
    CHECK(ghost.state.v[0] == doctest::Approx(-0.8));
    CHECK(ghost.state.v[1] == doctest::Approx(0.2));
}

TEST_CASE("ghost picture matches equal-mass dynamics, n=3") {
    const MassVector m({1, 1, 1});
    const auto x0 = seeded_state(m, 54);
    const auto main = simulate(x0, m, StopCondition::collisions(10001));
    const double t_end = 0.5 * (main.events[9999].t + main.events[10000].t);
    const auto ghost = oracle::ghost_trajectory(x0, t_end);
    REQUIRE(ghost.events.size() == 10000);
    double dt = 0.0;
    std::size_t mismatched = 0;
    for (std::size_t k = 0; k < 10000; ++k) {
        if (ghost.events[k].label != main.events[k].label) ++mismatched;
        dt = std::max(dt, std::abs(ghost.events[k].t - main.events[k].t));
    }
    CHECK(mismatched == 0);
    CHECK(dt <= 1e-9);
    const auto at_end = simulate(x0, m, StopCondition::until(t_end));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(ghost.state.q[i] - at_end.state.q[i]) <= 1e-9);
}

TEST_CASE("enumeration, n=2 up to length 2") {
    const auto all = oracle::enumerate_sequences(2, 2);
    // Words over {0,1} of length 1..2 that contain label 1.
    CHECK(all.size() == 4);
    const auto table = oracle::classified_table(2, 2, 10, 1);
    for (const auto& row : table) {
        const bool both = std::count(row.sequence.labels.begin(), row.sequence.labels.end(), 0) > 0;
        CHECK((row.classification.verdict == Dichotomy::D1) == both);
        if (!both) CHECK(row.classification.certified);
    }
    CHECK_THROWS_AS((void)oracle::enumerate_sequences(5, 3), BudgetExceeded);
    CHECK_THROWS_AS((void)oracle::enumerate_sequences(3, 9), BudgetExceeded);
}

TEST_CASE("D1 is closed under extension") {
    const auto table = oracle::classified_table(3, 4, 20, 7);
    std::size_t d1 = 0;
    for (const auto& row : table) {
        if (row.classification.verdict != Dichotomy::D1) continue;
        ++d1;
        const auto& w = *row.classification.witness;
        for (Label l = 0; l < 3; ++l) {
            auto longer = row.sequence;
            longer.labels.push_back(l);
            CHECK(is_sufficient(longer, w));
            longer = row.sequence;
            longer.labels.insert(longer.labels.begin(), l);
            CHECK(is_sufficient(longer, w));
        }
    }
    CHECK(d1 > 0);
}

TEST_CASE("numeric neutral dimension") {
    const MassVector m({2, 1});
    CHECK(oracle::numeric_neutral_dimension(parse_sequence("1-2,0-1"), m) == 0);
    CHECK(oracle::numeric_neutral_dimension(SymbolicSequence(2, {1}), m) == 1);
    CHECK(oracle::numeric_neutral_dimension(SymbolicSequence(3, {1, 2}), MassVector({3, 2, 1})) == 2);
}
