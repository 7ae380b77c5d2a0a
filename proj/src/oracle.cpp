#include "fallingballs/oracle.hpp"

#include "fallingballs/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fallingballs::oracle {

namespace {

// Gap k at time s from `state`: floor clearance for k = 0, q_{k} - q_{k-1} (zero-based) otherwise.
double gap(const PhaseState& state, std::size_t k, double s) {
    if (k == 0) return state.q[0] + state.v[0] * s - 0.5 * s * s;
    return (state.q[k] - state.q[k - 1]) + (state.v[k] - state.v[k - 1]) * s;
}

void free_fall(PhaseState& state, double s) {
    for (std::size_t i = 0; i < state.size(); ++i) {
        state.q[i] += state.v[i] * s - 0.5 * s * s;
        state.v[i] -= s;
    }
    state.t += s;
}

CollisionEvent collide(PhaseState& state, Label label, const MassVector& masses) {
    if (label == floor_label) {
        state.v[0] = std::abs(state.v[0]);
        state.q[0] = 0.0;
        return {state.t, label, state.v[0]};
    }
    const auto b = static_cast<std::size_t>(label);
    const std::size_t a = b - 1;
    const double ma = masses[a];
    const double mb = masses[b];
    const double va = state.v[a];
    const double vb = state.v[b];
    state.v[a] = ((ma - mb) * va + 2.0 * mb * vb) / (ma + mb);
    state.v[b] = (2.0 * ma * va + (mb - ma) * vb) / (ma + mb);
    const double mid = 0.5 * (state.q[a] + state.q[b]);
    state.q[a] = mid;
    state.q[b] = mid;
    return {state.t, label, va - vb};
}

} // namespace

Event bisect_collision_time(const PhaseState& state, const MassVector& masses, const OracleConfig& config) {
    const std::size_t n = masses.size();
    if (state.size() != n || config.scan_steps == 0) throw DomainError("oracle: bad state or configuration");
    // Ball 1 reaches the floor before this bound, so some gap closes before it.
    const double bound =
        2.0 * (std::abs(state.v[0]) + std::sqrt(2.0 * std::max(state.q[0], 0.0))) * (1.0 + 1e-9) + 1e-300;
    const double h = bound / static_cast<double>(config.scan_steps);

    for (std::size_t k = 1; k <= config.scan_steps; ++k) {
        const double hi0 = h * static_cast<double>(k);
        std::vector<std::size_t> closing;
        for (std::size_t g = 0; g < n; ++g) {
            if (gap(state, g, hi0) < 0.0) closing.push_back(g);
        }
        if (closing.empty()) continue;

        auto phi = [&](double s) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t g : closing) m = std::min(m, gap(state, g, s));
            return m;
        };
        double lo = h * static_cast<double>(k - 1);
        double hi = hi0;
        while (hi - lo > config.bisection_tol) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi)) break;
            (phi(mid) < 0.0 ? hi : lo) = mid;
        }
        std::size_t first = closing.front();
        for (std::size_t g : closing) {
            if (gap(state, g, hi) < gap(state, first, hi)) first = g;
        }
        return {lo, static_cast<Label>(first)};
    }
    throw NoEvent("oracle: no gap closed within the scan bound");
}

Run simulate(const PhaseState& initial, const MassVector& masses, std::optional<std::size_t> max_events,
             std::optional<double> until, const OracleConfig& config) {
    if (!max_events && !until) throw DomainError("oracle: needs an event count or a time");
    Run run{initial, {}};
    while (!max_events || run.events.size() < *max_events) {
        const Event e = bisect_collision_time(run.state, masses, config);
        if (until && run.state.t + e.dt > *until) {
            free_fall(run.state, *until - run.state.t);
            run.state.t = *until;
            break;
        }
        free_fall(run.state, e.dt);
        run.events.push_back(collide(run.state, e.label, masses));
    }
    return run;
}

FiniteDifference finite_difference_cocycle(const PhaseState& x0, const MassVector& masses, const TangentVector& u,
                                           std::size_t events, const OracleConfig& config) {
    const std::size_t n = masses.size();
    if (u.size() != n || x0.size() != n) throw DomainError("oracle: dimension mismatch");

    const Run ahead = simulate(x0, masses, events + 1, std::nullopt, config);
    const double t_prev = events == 0 ? x0.t : ahead.events[events - 1].t;
    const double t_compare = 0.5 * (t_prev + ahead.events[events].t);

    const Run ref = simulate(x0, masses, std::nullopt, t_compare, config);

    const double eps = config.fd_epsilon;
    PhaseState xp = x0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dq = (u.dh[i] - masses[i] * x0.v[i] * u.dv[i]) / masses[i];
        xp.q[i] += eps * dq;
        xp.v[i] += eps * u.dv[i];
    }
    if (xp.q[0] < 0.0 || !std::is_sorted(xp.q.begin(), xp.q.end())) {
        throw DomainError("oracle: perturbed state leaves the configuration space");
    }
    const Run pert = simulate(xp, masses, std::nullopt, t_compare, config);

    FiniteDifference out;
    for (const auto& e : ref.events) out.labels.push_back(e.label);
    bool same = pert.events.size() == ref.events.size();
    for (std::size_t k = 0; same && k < ref.events.size(); ++k) same = pert.events[k].label == ref.events[k].label;
    if (!same) throw SequenceChanged("oracle: perturbed run changed the collision sequence");

    out.t_compare = t_compare;
    out.reference = ref.state;
    out.image = TangentVector::zero(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dq = (pert.state.q[i] - ref.state.q[i]) / eps;
        const double dv = (pert.state.v[i] - ref.state.v[i]) / eps;
        out.image.dh[i] = masses[i] * dq + masses[i] * ref.state.v[i] * dv;
        out.image.dv[i] = dv;
    }
    return out;
}

Run ghost_trajectory(const PhaseState& x0, double t_end) {
    const std::size_t n = x0.size();
    const double span = t_end - x0.t;
    if (!(span >= 0.0)) throw DomainError("ghost: t_end precedes the initial time");

    struct Bouncer {
        double z, u, w, tau; // first floor hit at tau, then every 2w
        [[nodiscard]] double pos(double s) const {
            if (s < tau) return z + u * s - 0.5 * s * s;
            const double r = std::fmod(s - tau, 2.0 * w);
            return w * r - 0.5 * r * r;
        }
        [[nodiscard]] double vel(double s) const {
            if (s < tau) return u - s;
            return w - std::fmod(s - tau, 2.0 * w);
        }
    };
    std::vector<Bouncer> b(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = std::sqrt(x0.v[j] * x0.v[j] + 2.0 * x0.q[j]);
        b[j] = {x0.q[j], x0.v[j], w, x0.v[j] + w};
    }

    struct Raw {
        double s;
        std::size_t a, c; // c == a for a floor bounce
    };
    std::vector<Raw> raw;
    std::vector<double> breaks{0.0, span};
    for (std::size_t j = 0; j < n; ++j) {
        for (double s = b[j].tau; s <= span; s += 2.0 * b[j].w) {
            breaks.push_back(s);
            raw.push_back({s, j, j});
            if (!(b[j].w > 0.0)) break;
        }
    }
    std::sort(breaks.begin(), breaks.end());
    // Between consecutive floor hits all bouncers share the same acceleration, so height
    // differences are linear and crossings are found by linear interpolation.
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = breaks[k];
        const double hi = breaks[k + 1];
        if (!(hi > lo)) continue;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t c = a + 1; c < n; ++c) {
                const double d0 = b[a].pos(lo) - b[c].pos(lo);
                const double d1 = b[a].pos(hi) - b[c].pos(hi);
                if (d0 * d1 < 0.0) raw.push_back({lo + d0 * (hi - lo) / (d0 - d1), a, c});
            }
        }
    }
    std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.s < y.s; });

    std::vector<std::size_t> rank(n);
    std::vector<std::size_t> at(n);
    for (std::size_t j = 0; j < n; ++j) rank[j] = at[j] = j;

    Run run;
    for (const auto& r : raw) {
        if (r.a == r.c) {
            if (rank[r.a] != 0) throw DomainError("ghost: a bouncer above ball 1 reached the floor");
            run.events.push_back({x0.t + r.s, floor_label, b[r.a].w});
            continue;
        }
        const std::size_t lower = std::min(rank[r.a], rank[r.c]);
        if (std::max(rank[r.a], rank[r.c]) != lower + 1) throw DomainError("ghost: non-adjacent crossing");
        const std::size_t below = at[lower];
        const std::size_t above = at[lower + 1];
        run.events.push_back({x0.t + r.s, static_cast<Label>(lower + 1), b[below].vel(r.s) - b[above].vel(r.s)});
        std::swap(at[lower], at[lower + 1]);
        rank[at[lower]] = lower;
        rank[at[lower + 1]] = lower + 1;
    }

    run.state.q.resize(n);
    run.state.v.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        run.state.q[r] = b[at[r]].pos(span);
        run.state.v[r] = b[at[r]].vel(span);
    }
    run.state.t = t_end;
    return run;
}

std::vector<SymbolicSequence> enumerate_sequences(std::size_t n, std::size_t max_len) {
    if (n < 2 || n > 4 || max_len > 8) throw BudgetExceeded("enumeration is limited to n <= 4 and length <= 8");
    std::vector<SymbolicSequence> out;
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Label> word(len, 0);
        while (true) {
            SymbolicSequence seq(n, word);
            if (collision_graph(seq).balls_connected()) out.push_back(std::move(seq));
            std::size_t pos = 0;
            while (pos < len && ++word[pos] == static_cast<Label>(n)) word[pos++] = 0;
            if (pos == len) break;
        }
    }
    return out;
}

std::vector<TableRow> classified_table(std::size_t n, std::size_t max_len, std::size_t trials, std::uint64_t seed) {
    std::vector<TableRow> out;
    for (auto& seq : enumerate_sequences(n, max_len)) {
        Classification c = classify_sequence(seq, trials, seed);
        out.push_back({std::move(seq), std::move(c)});
    }
    return out;
}

std::size_t numeric_neutral_dimension(const SymbolicSequence& seq, const MassVector& masses,
                                      double relative_tolerance) {
    const auto n = static_cast<Eigen::Index>(masses.size());
    // Velocity Jacobian of a ball collision, transposed, acting on dh.
    auto velocity_jacobian = [&](Label label) {
        const auto b = static_cast<Eigen::Index>(label);
        const Eigen::Index a = b - 1;
        const double ma = masses[static_cast<std::size_t>(a)];
        const double mb = masses[static_cast<std::size_t>(b)];
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
        r(a, a) = (ma - mb) / (ma + mb);
        r(a, b) = 2.0 * mb / (ma + mb);
        r(b, a) = 2.0 * ma / (ma + mb);
        r(b, b) = (mb - ma) / (ma + mb);
        return r;
    };
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    std::vector<Eigen::RowVectorXd> rows{Eigen::RowVectorXd::Ones(n)};
    for (Label label : seq.labels) {
        if (label == floor_label) {
            rows.push_back(p.row(0));
        } else {
            p = velocity_jacobian(label).transpose() * p;
        }
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t k = 0; k < rows.size(); ++k) a.row(static_cast<Eigen::Index>(k)) = rows[k].normalized();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double cutoff = relative_tolerance * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    Eigen::Index r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) r += sv[k] > cutoff ? 1 : 0;
    return static_cast<std::size_t>(n - r);
}

} // namespace fallingballs::oracle
