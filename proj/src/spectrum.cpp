#include "fallingballs/spectrum.hpp"

#include "fallingballs/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fallingballs {

namespace {

// Q R = frame with diag(R) >= 0; returns log diag(R) and overwrites frame with Q.
Eigen::VectorXd orthonormalize(Eigen::MatrixXd& frame) {
    const Eigen::Index k = frame.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(frame.rows(), k);
    const Eigen::MatrixXd& r = qr.matrixQR();
    Eigen::VectorXd logs(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double d = r(j, j);
        if (d < 0.0) q.col(j) = -q.col(j);
        logs[j] = std::log(std::abs(d));
    }
    frame = std::move(q);
    return logs;
}

} // namespace

SpectrumReport lyapunov_spectrum(const PhaseState& x0, const MassVector& masses, std::size_t n_collisions,
                                 const SpectrumOptions& options) {
    if (options.renorm_every == 0) throw DomainError("renorm_every must be positive");
    const std::size_t n = masses.size();
    const auto dim = static_cast<Eigen::Index>(2 * n);

    Simulator sim(x0, masses, options.simulation);
    Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd log_sums = Eigen::VectorXd::Zero(dim);
    SpectrumReport report;

    std::size_t since_renorm = 0;
    try {
        for (std::size_t k = 0; k < n_collisions; ++k) {
            const CollisionEvent& e = sim.step();
            derivative_of(e, masses).apply(frame);
            if (++since_renorm == options.renorm_every) {
                log_sums += orthonormalize(frame);
                ++report.renorm_count;
                since_renorm = 0;
            }
        }
    } catch (const SingularityError& err) {
        report.termination = err.what();
    }
    if (since_renorm > 0) {
        log_sums += orthonormalize(frame);
        ++report.renorm_count;
    }

    report.collisions = sim.collisions();
    report.total_time = sim.state().t - x0.t;
    if (report.collisions == 0 || !(report.total_time > 0.0)) {
        if (!report.termination) report.termination = "no collisions";
        return report;
    }

    // Sort columns by exponent, remembering where each column lands.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return log_sums[a] > log_sums[b]; });
    report.exponents.resize(order.size());
    report.per_collision.resize(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        report.exponents[j] = log_sums[order[j]] / report.total_time;
        report.per_collision[j] = log_sums[order[j]] / static_cast<double>(report.collisions);
    }
    std::vector<std::size_t> position(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) position[static_cast<std::size_t>(order[j])] = j;

    // Flow column: first j with f in span(Q_0..Q_j). Energy column: first Q_j leaving {sum dh = 0}.
    const double thr = options.identification_threshold;
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dim);
    f.tail(nn).setConstant(-1.0 / std::sqrt(static_cast<double>(n)));
    Eigen::VectorXd e_h = Eigen::VectorXd::Zero(dim);
    e_h.head(nn).setConstant(1.0 / std::sqrt(static_cast<double>(n)));

    std::optional<Eigen::Index> flow_col;
    std::optional<Eigen::Index> energy_col;
    Eigen::VectorXd residual = f;
    for (Eigen::Index j = 0; j < dim; ++j) {
        // Columns in sorted order so that "span of the first j" means the fastest j directions.
        const Eigen::Index c = order[static_cast<std::size_t>(j)];
        residual -= frame.col(c).dot(residual) * frame.col(c);
        if (!flow_col && residual.norm() < thr) flow_col = c;
        if (!energy_col && std::abs(frame.col(c).dot(e_h)) > thr && flow_col != c) energy_col = c;
    }

    if (flow_col && energy_col && *flow_col != *energy_col) {
        report.flow_index = position[static_cast<std::size_t>(*flow_col)];
        report.energy_index = position[static_cast<std::size_t>(*energy_col)];
        report.identified_by_angle = true;
    } else {
        std::vector<std::size_t> nearest(order.size());
        std::iota(nearest.begin(), nearest.end(), std::size_t{0});
        std::stable_sort(nearest.begin(), nearest.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(report.exponents[a]) < std::abs(report.exponents[b]);
        });
        report.flow_index = std::min(nearest[0], nearest[1]);
        report.energy_index = std::max(nearest[0], nearest[1]);
    }

    for (std::size_t j = 0; j < report.exponents.size(); ++j) {
        if (j != *report.flow_index && j != *report.energy_index) report.reduced.push_back(report.exponents[j]);
    }
    const std::size_t d = report.exponents.size();
    for (std::size_t j = 0; j < d; ++j) {
        report.pairing_residual =
            std::max(report.pairing_residual, std::abs(report.exponents[j] + report.exponents[d - 1 - j]));
    }
    return report;
}

ConeCheck strict_invariance_check(const ExtendedSequence& segment, const MassVector& masses) {
    if (segment.n != masses.size()) throw DomainError("sequence and masses disagree on n");
    ConeCheck out;
    out.sequence = segment.symbols();
    const CollisionGraph graph = collision_graph(out.sequence);
    out.connected = graph.balls_connected();
    out.neutral_dim_v = neutral_velocity_space(out.sequence);
    out.neutral_dim_h = neutral_space_unchecked(out.sequence, ExactMasses::from(masses)).dimension;
    out.strict = out.connected && out.neutral_dim_h == 0;
    if (!out.connected) {
        out.reason = "ball-collision graph has " + std::to_string(graph.ball_components) +
                     " components; (0, dv) vectors constant on components stay neutral";
    } else if (out.neutral_dim_h > 0) {
        out.reason = "homogeneous floor system has a " + std::to_string(out.neutral_dim_h) +
                     "-dimensional kernel on sum dh = 0";
    } else {
        out.reason = "sufficient";
    }
    return out;
}

ConeCheck strict_invariance_check(const PhaseState& x0, const MassVector& masses, std::size_t events,
                                  const SimulationOptions& options) {
    const SimulationResult run = simulate(x0, masses, StopCondition::collisions(events), options);
    return strict_invariance_check(ExtendedSequence::from_events(run.events, masses.size()), masses);
}

Onset sufficiency_onset(const PhaseState& x0, const MassVector& masses, std::size_t max_events,
                        const SimulationOptions& options) {
    Simulator sim(x0, masses, options);
    NeutralTracker tracker(ExactMasses::from(masses));
    Onset out;
    try {
        while (out.scanned < max_events) {
            const CollisionEvent& e = sim.step();
            ++out.scanned;
            tracker.push(e.label);
            if (tracker.sufficient()) {
                out.events = out.scanned;
                out.time = e.t;
                break;
            }
        }
    } catch (const SingularityError& err) {
        out.termination = err.what();
    }
    return out;
}

Eigen::MatrixXd reduced_basis(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * k, 2);
    c.col(0).head(k).setOnes();
    c.col(1).tail(k).setOnes();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(2 * k - 2);
}

Eigen::MatrixXd reduce_monodromy(const Eigen::MatrixXd& full) {
    const Eigen::Index k = full.rows() / 2;
    const Eigen::MatrixXd b = reduced_basis(static_cast<std::size_t>(k));
    Eigen::MatrixXd image = full * b;
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
        // Project along the flow direction onto sum dv = 0.
        const double mean = image.col(c).tail(k).mean();
        image.col(c).tail(k).array() -= mean;
    }
    return b.transpose() * image;
}

} // namespace fallingballs
