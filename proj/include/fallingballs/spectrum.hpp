#pragma once

#include "fallingballs/dynamics.hpp"
#include "fallingballs/sufficiency.hpp"
#include "fallingballs/tangent.hpp"

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace fallingballs {

struct SpectrumOptions {
    std::size_t renorm_every = 1; // QR re-orthonormalization stride, in collisions
    SimulationOptions simulation;
    double identification_threshold = 1e-3; // subspace angle used to flag the constraint exponents
};

// Lyapunov exponents of the full 2n-dimensional (dh, dv) cocycle.
struct SpectrumReport {
    std::vector<double> exponents;     // per unit flow time, descending
    std::vector<double> per_collision; // same, per collision
    // The two exponents tied to the flow direction (0, -1) and to energy changes (sum dh != 0).
    std::optional<std::size_t> flow_index;
    std::optional<std::size_t> energy_index;
    bool identified_by_angle = false; // false: fell back to the two exponents nearest zero
    std::vector<double> reduced;      // the remaining 2n - 2 exponents, descending
    double total_time = 0.0;
    std::size_t collisions = 0;
    std::size_t renorm_count = 0;
    double pairing_residual = 0.0; // max_j |lambda_j + lambda_{2n+1-j}|
    std::optional<std::string> termination; // set when a singularity cut the run short
};

// Starts from the identity frame, so the result is a deterministic function of x0.
[[nodiscard]] SpectrumReport lyapunov_spectrum(const PhaseState& x0, const MassVector& masses,
                                               std::size_t n_collisions, const SpectrumOptions& options = {});

struct ConeCheck {
    bool strict = false;
    std::size_t neutral_dim_h = 0; // kernel of the homogeneous system (dh part)
    std::size_t neutral_dim_v = 0; // (0, dv)-neutral space
    bool connected = false;
    std::string reason;
    SymbolicSequence sequence;
};

// Strict invariance of {Q1 >= 0} along an event list, decided exactly at the rationalized masses.
[[nodiscard]] ConeCheck strict_invariance_check(const ExtendedSequence& segment, const MassVector& masses);

// Same, for the first `events` collisions of the trajectory of x0.
[[nodiscard]] ConeCheck strict_invariance_check(const PhaseState& x0, const MassVector& masses, std::size_t events,
                                                const SimulationOptions& options = {});

struct Onset {
    std::optional<std::size_t> events; // minimal sufficient prefix length; empty = not reached
    double time = 0.0;                 // absolute time of that event
    std::size_t scanned = 0;
    std::optional<std::string> termination;

    [[nodiscard]] bool reached() const noexcept { return events.has_value(); }
};

[[nodiscard]] Onset sufficiency_onset(const PhaseState& x0, const MassVector& masses, std::size_t max_events,
                                      const SimulationOptions& options = {});

// Periodic orbits of the floor-to-floor return map of a two-ball system.
struct OrbitProbeOptions {
    std::size_t max_period = 3; // in floor returns
    std::size_t grid = 40;      // grid x grid section points per period
    double seed_residual = 0.05;
    std::size_t max_seeds = 200; // per period
    double tolerance = 1e-10;    // fixed-point residual in section coordinates
    std::size_t max_iterations = 200;
    double stability_tolerance = 1e-6; // max | |lambda| - 1 | for linear stability
};

struct PeriodicOrbit {
    std::size_t period = 0;
    // Section point: just after a floor collision, q = (0, q2), v = (v1, v2) on H = 1.
    double v1 = 0.0;
    double v2 = 0.0;
    double q2 = 0.0;
    double residual = 0.0;
    double return_time = 0.0;
    SymbolicSequence sequence;
    std::vector<CollisionEvent> events;
    Eigen::MatrixXd monodromy;                        // full 2n x 2n, (dh, dv) coordinates
    std::vector<std::complex<double>> eigenvalues;    // of the full monodromy
    Eigen::MatrixXd reduced_monodromy;                // on {sum dh = 0} modulo the flow direction
    std::vector<std::complex<double>> reduced_eigenvalues;
    double determinant = 0.0;
    double unit_circle_deviation = 0.0; // max | |lambda| - 1 | over reduced eigenvalues
    bool linearly_stable = false;
};

struct OrbitProbeReport {
    std::vector<PeriodicOrbit> orbits;
    std::size_t evaluations = 0; // return-map evaluations spent
    std::size_t seeds = 0;       // root-finder starts

    [[nodiscard]] bool found() const noexcept { return !orbits.empty(); }
    // Orbit with the smallest unit-circle deviation, nullptr if none.
    [[nodiscard]] const PeriodicOrbit* most_stable() const noexcept;
};

// Scans the whole grid for every period, then refines each seed with a derivative-free
// hybrid root finder. Needs n = 2; mass ordering is not required.
[[nodiscard]] OrbitProbeReport stable_orbit_probe(const MassVector& masses, const OrbitProbeOptions& options = {});

// Orthonormal basis (2n x (2n-2)) of {sum dh = 0, sum dv = 0}.
[[nodiscard]] Eigen::MatrixXd reduced_basis(std::size_t n);

// Monodromy restricted to the energy surface, modulo the flow direction, in reduced_basis(n).
[[nodiscard]] Eigen::MatrixXd reduce_monodromy(const Eigen::MatrixXd& full);

} // namespace fallingballs
