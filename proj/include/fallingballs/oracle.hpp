#pragma once

// Reference implementations that share no event or derivative code with the main library.
// Slow on purpose; meant for tests and the verify command.

#include "fallingballs/dynamics.hpp"
#include "fallingballs/sufficiency.hpp"
#include "fallingballs/tangent.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fallingballs::oracle {

struct OracleConfig {
    double bisection_tol = 1e-15; // bracket width in time (stops earlier if it cannot shrink)
    double fd_epsilon = 1e-7;     // finite-difference step
    std::size_t enum_max_len = 6;
    double ghost_tol = 1e-9;
    std::size_t scan_steps = 64; // bracket scan resolution over a crude time bound
};

struct Event {
    double dt = 0.0;
    Label label = floor_label;
};

// First time at which a gap (q_1 above the floor, or q_{i+1} - q_i) closes, by scanning
// and bisection on the free-fall polynomials.
[[nodiscard]] Event bisect_collision_time(const PhaseState& state, const MassVector& masses,
                                          const OracleConfig& config = {});

struct Run {
    PhaseState state;
    std::vector<CollisionEvent> events;
};

// Integrator built on bisect_collision_time and the momentum/energy form of the collision law.
[[nodiscard]] Run simulate(const PhaseState& initial, const MassVector& masses, std::optional<std::size_t> max_events,
                           std::optional<double> until, const OracleConfig& config = {});

struct FiniteDifference {
    TangentVector image;        // (dh, dv) at t_compare
    double t_compare = 0.0;     // strictly between event N and N+1
    std::vector<Label> labels;  // reference symbolic sequence up to t_compare
    PhaseState reference;       // reference state at t_compare
};

// One-sided difference (x(T; x0 + eps u) - x(T; x0)) / eps over the first `events` collisions.
// Throws SequenceChanged if the perturbed run collides differently.
[[nodiscard]] FiniteDifference finite_difference_cocycle(const PhaseState& x0, const MassVector& masses,
                                                         const TangentVector& u, std::size_t events,
                                                         const OracleConfig& config = {});

// Equal masses only: the system is n independent bouncers relabeled by height. Returns the
// collisions up to t_end (ball pairs at crossings, the floor at bounces) and the state at t_end.
[[nodiscard]] Run ghost_trajectory(const PhaseState& x0, double t_end);

// All label words of length 1..max_len over {0..n-1} whose ball-collision graph is connected.
// Guarded to n <= 4, max_len <= 8 (BudgetExceeded otherwise).
[[nodiscard]] std::vector<SymbolicSequence> enumerate_sequences(std::size_t n, std::size_t max_len);

struct TableRow {
    SymbolicSequence sequence;
    Classification classification;
};

// enumerate_sequences, each classified with classify_sequence(trials, seed).
[[nodiscard]] std::vector<TableRow> classified_table(std::size_t n, std::size_t max_len, std::size_t trials,
                                                     std::uint64_t seed);

// Floating-point dimension of the dh-neutral space via SVD of the dense floor system.
[[nodiscard]] std::size_t numeric_neutral_dimension(const SymbolicSequence& seq, const MassVector& masses,
                                                    double relative_tolerance = 1e-9);

} // namespace fallingballs::oracle
