#pragma once

// Event-driven propagation of n balls on the half line q >= 0 under unit downward
// acceleration, with elastic ball-ball and ball-floor collisions.

#include "fallingballs/masses.hpp"

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

namespace fallingballs {

struct PhaseState {
    std::vector<double> q; // positions, ascending
    std::vector<double> v; // velocities
    double t = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return q.size(); }
};

struct CollisionEvent {
    double t = 0.0;
    Label label = floor_label;
    // Ball pair: relative approach speed v_i^- - v_{i+1}^- > 0. Floor: outgoing speed v_1^+ > 0.
    double rho = 0.0;

    friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

struct Tolerances {
    double singular = 1e-11; // simultaneity of candidate event times, relative to max(1, dt)
    double grazing = 1e-11;  // minimal approach speed
    double ordering = 1e-9;  // admissible overlap of positions
    double energy = 1e-9;    // |H - 1| accepted for an initial state
};

struct SimulationOptions {
    Tolerances tol;
    // AccumulationSuspected when `accumulation_count` collisions fit in `accumulation_window` time.
    std::size_t accumulation_count = 1000;
    double accumulation_window = 1e-3;
    // 0 disables; otherwise velocities are rescaled to H = 1 every this many events.
    std::size_t renormalize_every = 0;
};

struct StopCondition {
    std::optional<std::size_t> max_collisions;
    std::optional<double> max_time; // absolute time

    [[nodiscard]] static StopCondition collisions(std::size_t count) { return {count, std::nullopt}; }
    [[nodiscard]] static StopCondition until(double time) { return {std::nullopt, time}; }
};

struct NextEvent {
    double dt = 0.0;
    Label label = floor_label;
};

// H = sum_i (m_i q_i + m_i v_i^2 / 2).
[[nodiscard]] double energy(const PhaseState& state, const MassVector& masses);

// Time to the first collision and its label. Throws MultipleCollision when the two earliest
// candidates are closer than tol.singular, NoEvent when there is no candidate.
[[nodiscard]] NextEvent next_event(const PhaseState& state, const MassVector& masses, const Tolerances& tol = {});

// Free fall for dt >= 0. Throws OrderViolation when the result overlaps beyond tol.ordering.
[[nodiscard]] PhaseState advance(const PhaseState& state, double dt, const Tolerances& tol = {});

struct CollisionOutcome {
    PhaseState state;
    CollisionEvent event;
};

// Elastic collision at the current instant. Positions of the colliding pair are pinned
// together (the floor ball to 0).
[[nodiscard]] CollisionOutcome apply_collision(const PhaseState& state, Label label, const MassVector& masses,
                                               const Tolerances& tol = {});

// Incremental simulator; state() stays valid after a thrown singularity.
class Simulator {
public:
    Simulator(PhaseState initial, MassVector masses, SimulationOptions options = {});

    // Propagates to the next collision and resolves it.
    const CollisionEvent& step();

    // Free fall up to `time` if no collision happens first; returns false (and does nothing)
    // otherwise.
    bool advance_to(double time);

    [[nodiscard]] const PhaseState& state() const noexcept { return state_; }
    [[nodiscard]] const MassVector& masses() const noexcept { return masses_; }
    [[nodiscard]] const SimulationOptions& options() const noexcept { return options_; }
    [[nodiscard]] std::size_t collisions() const noexcept { return collisions_; }
    [[nodiscard]] const CollisionEvent& last_event() const noexcept { return last_; }
    [[nodiscard]] const std::vector<double>& renormalization_factors() const noexcept { return renorm_factors_; }

private:
    PhaseState state_;
    MassVector masses_;
    SimulationOptions options_;
    std::size_t collisions_ = 0;
    CollisionEvent last_;
    std::vector<double> recent_times_; // ring buffer for the accumulation guard
    std::vector<double> renorm_factors_;
};

struct SimulationResult {
    PhaseState state;
    std::vector<CollisionEvent> events;
    std::vector<double> renormalization_factors;
};

// Runs until the first stop criterion is met. With max_time the final state sits exactly at
// that time.
[[nodiscard]] SimulationResult simulate(const PhaseState& initial, const MassVector& masses, StopCondition stop,
                                        const SimulationOptions& options = {});

// Rescales (q, v) -> (q / H, v / sqrt(H)), which puts the state on H = 1.
[[nodiscard]] PhaseState scale_to_unit_energy(PhaseState state, const MassVector& masses);

// Sampling convention: q_1 and the gaps uniform on (0, 1), velocities standard normal,
// then scaled onto H = 1. Not the Liouville measure.
[[nodiscard]] PhaseState sample_state(const MassVector& masses, std::mt19937_64& rng);

// Throws DomainError when sizes mismatch, ordering fails or |H - 1| > tol.energy.
void validate_state(const PhaseState& state, const MassVector& masses, const Tolerances& tol = {});

} // namespace fallingballs
