#include "fallingballs/dynamics.hpp"

#include "fallingballs/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fallingballs {

double energy(const PhaseState& state, const MassVector& masses) {
    double h = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        h += masses[i] * (state.q[i] + 0.5 * state.v[i] * state.v[i]);
    }
    return h;
}

NextEvent next_event(const PhaseState& state, const MassVector& masses, const Tolerances& tol) {
    const std::size_t n = state.size();
    if (n != masses.size() || state.v.size() != n) {
        throw DomainError("state and mass vector sizes differ");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    double best = inf;
    double second = inf;
    Label best_label = floor_label;
    auto offer = [&](double dt, Label label) {
        if (dt < best) {
            second = best;
            best = dt;
            best_label = label;
        } else if (dt < second) {
            second = dt;
        }
    };

    // Floor: positive root of q1 + v1 t - t^2/2 = 0. For v1 < 0 use the conjugate form to
    // avoid cancellation.
    {
        const double q1 = std::max(state.q[0], 0.0);
        const double v1 = state.v[0];
        const double s = std::sqrt(v1 * v1 + 2.0 * q1);
        offer(v1 >= 0.0 ? v1 + s : 2.0 * q1 / (s - v1), floor_label);
    }
    // Equal accelerations: relative motion of neighbours is linear.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double closing = state.v[i] - state.v[i + 1];
        if (closing > 0.0) {
            const double gap = std::max(state.q[i + 1] - state.q[i], 0.0);
            offer(gap / closing, static_cast<Label>(i + 1));
        }
    }

    if (!std::isfinite(best)) {
        throw NoEvent("no collision candidate");
    }
    if (second - best < tol.singular * std::max(1.0, best)) {
        throw MultipleCollision("simultaneous collisions at t=" + std::to_string(state.t + best));
    }
    return {best, best_label};
}

PhaseState advance(const PhaseState& state, double dt, const Tolerances& tol) {
    if (!(dt >= 0.0)) {
        throw DomainError("advance needs dt >= 0");
    }
    PhaseState next = state;
    if (dt == 0.0) {
        return next;
    }
    for (std::size_t i = 0; i < next.size(); ++i) {
        next.q[i] = state.q[i] + dt * (state.v[i] - 0.5 * dt);
        next.v[i] = state.v[i] - dt;
    }
    next.t = state.t + dt;

    if (next.q[0] < -tol.ordering) {
        throw OrderViolation("ball 1 below the floor at t=" + std::to_string(next.t));
    }
    for (std::size_t i = 0; i + 1 < next.size(); ++i) {
        if (next.q[i + 1] - next.q[i] < -tol.ordering) {
            throw OrderViolation("balls " + std::to_string(i + 1) + " and " + std::to_string(i + 2) +
                                 " passed through each other at t=" + std::to_string(next.t));
        }
    }
    return next;
}

CollisionOutcome apply_collision(const PhaseState& state, Label label, const MassVector& masses,
                                 const Tolerances& tol) {
    CollisionOutcome out{state, {state.t, label, 0.0}};
    auto& q = out.state.q;
    auto& v = out.state.v;

    if (label == floor_label) {
        if (std::abs(q[0]) > tol.ordering) {
            throw PreconditionViolated("floor collision requested with q1=" + std::to_string(q[0]));
        }
        if (-v[0] < tol.grazing) {
            throw GrazingSingularity("grazing floor collision at t=" + std::to_string(state.t));
        }
        q[0] = 0.0;
        v[0] = -v[0];
        out.event.rho = v[0];
        return out;
    }

    check_ball_label(label, masses.size());
    const std::size_t a = static_cast<std::size_t>(label) - 1;
    const std::size_t b = a + 1;
    if (std::abs(q[b] - q[a]) > tol.ordering) {
        throw PreconditionViolated("ball collision requested for separated balls " + std::to_string(a + 1) + "," +
                                   std::to_string(b + 1));
    }
    const double rho = v[a] - v[b];
    if (rho < tol.grazing) {
        throw GrazingSingularity("grazing ball collision at t=" + std::to_string(state.t));
    }
    // Mass-weighted pinning keeps the potential energy of the pair unchanged.
    const double ma = masses[a];
    const double mb = masses[b];
    const double pinned = (ma * q[a] + mb * q[b]) / (ma + mb);
    q[a] = pinned;
    q[b] = pinned;

    const double g = masses.gamma(label);
    const double va = v[a];
    const double vb = v[b];
    v[a] = g * va + (1.0 - g) * vb;
    v[b] = (1.0 + g) * va - g * vb;
    out.event.rho = rho;
    return out;
}

void validate_state(const PhaseState& state, const MassVector& masses, const Tolerances& tol) {
    const std::size_t n = masses.size();
    if (state.q.size() != n || state.v.size() != n) {
        throw DomainError("state has " + std::to_string(state.q.size()) + " positions for " + std::to_string(n) +
                          " masses");
    }
    if (state.q[0] < -tol.ordering) {
        throw DomainError("q1 must be non-negative");
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (state.q[i + 1] - state.q[i] < -tol.ordering) {
            throw DomainError("positions must be ascending");
        }
    }
    const double h = energy(state, masses);
    if (!(std::abs(h - 1.0) <= tol.energy)) {
        throw DomainError("state is off the energy surface H=1 (H=" + std::to_string(h) + ")");
    }
}

Simulator::Simulator(PhaseState initial, MassVector masses, SimulationOptions options)
    : state_(std::move(initial)), masses_(std::move(masses)), options_(options) {
    validate_state(state_, masses_, options_.tol);
    if (options_.accumulation_count > 0) {
        recent_times_.assign(options_.accumulation_count, -std::numeric_limits<double>::infinity());
    }
}

const CollisionEvent& Simulator::step() {
    const NextEvent next = next_event(state_, masses_, options_.tol);
    const PhaseState moved = advance(state_, next.dt, options_.tol);
    CollisionOutcome outcome = apply_collision(moved, next.label, masses_, options_.tol);

    if (!recent_times_.empty()) {
        double& oldest = recent_times_[collisions_ % recent_times_.size()];
        if (outcome.event.t - oldest < options_.accumulation_window) {
            throw AccumulationSuspected(std::to_string(recent_times_.size() + 1) + " collisions within " +
                                        std::to_string(options_.accumulation_window) + " at t=" +
                                        std::to_string(outcome.event.t));
        }
        oldest = outcome.event.t;
    }

    state_ = std::move(outcome.state);
    last_ = outcome.event;
    ++collisions_;

    if (options_.renormalize_every > 0 && collisions_ % options_.renormalize_every == 0) {
        double potential = 0.0;
        double kinetic = 0.0;
        for (std::size_t i = 0; i < state_.size(); ++i) {
            potential += masses_[i] * state_.q[i];
            kinetic += 0.5 * masses_[i] * state_.v[i] * state_.v[i];
        }
        if (kinetic > 0.0 && potential < 1.0) {
            const double factor = std::sqrt((1.0 - potential) / kinetic);
            for (double& v : state_.v) v *= factor;
            renorm_factors_.push_back(factor);
        }
    }
    return last_;
}

bool Simulator::advance_to(double time) {
    if (time <= state_.t) {
        return time == state_.t;
    }
    const NextEvent next = next_event(state_, masses_, options_.tol);
    if (state_.t + next.dt <= time) {
        return false;
    }
    state_ = advance(state_, time - state_.t, options_.tol);
    state_.t = time;
    return true;
}

SimulationResult simulate(const PhaseState& initial, const MassVector& masses, StopCondition stop,
                          const SimulationOptions& options) {
    if (!stop.max_collisions && !stop.max_time) {
        throw DomainError("simulate needs a stop condition");
    }
    Simulator sim(initial, masses, options);
    SimulationResult result;
    if (stop.max_collisions && *stop.max_collisions == 0) {
        result.state = sim.state();
        return result;
    }
    while (true) {
        if (stop.max_time && sim.advance_to(*stop.max_time)) {
            break;
        }
        result.events.push_back(sim.step());
        if (stop.max_collisions && result.events.size() >= *stop.max_collisions) {
            break;
        }
    }
    result.state = sim.state();
    result.renormalization_factors = sim.renormalization_factors();
    return result;
}

PhaseState scale_to_unit_energy(PhaseState state, const MassVector& masses) {
    const double h = energy(state, masses);
    if (!(h > 0.0)) {
        throw DomainError("cannot scale a zero-energy state");
    }
    const double vscale = 1.0 / std::sqrt(h);
    for (double& q : state.q) q /= h;
    for (double& v : state.v) v *= vscale;
    return state;
}

PhaseState sample_state(const MassVector& masses, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    PhaseState s;
    const std::size_t n = masses.size();
    s.q.resize(n);
    s.v.resize(n);
    double height = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        height += unit(rng);
        s.q[i] = height;
    }
    for (std::size_t i = 0; i < n; ++i) {
        s.v[i] = normal(rng);
    }
    return scale_to_unit_energy(std::move(s), masses);
}

} // namespace fallingballs
