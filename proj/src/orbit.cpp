#include "fallingballs/errors.hpp"
#include "fallingballs/spectrum.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multiroots.h>
#include <gsl/gsl_vector.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <memory>

namespace fallingballs {

namespace {

struct Section {
    double v1;
    double v2;
};

struct ReturnTrip {
    Section end{};
    std::vector<Section> visits; // section points after each floor return, the last equals `end`
    std::vector<CollisionEvent> events;
    double time = 0.0;
};

// Floor-to-floor return map iterated `period` times. Empty when the point is off the section
// or the run hits a singularity.
class ReturnMap {
public:
    explicit ReturnMap(const MassVector& masses) : masses_(masses) {}

    [[nodiscard]] std::optional<double> height(Section s) const {
        const double m1 = masses_[0];
        const double m2 = masses_[1];
        const double q2 = (1.0 - 0.5 * m1 * s.v1 * s.v1 - 0.5 * m2 * s.v2 * s.v2) / m2;
        if (!(s.v1 > 0.0) || !(q2 > 0.0)) return std::nullopt;
        return q2;
    }

    [[nodiscard]] std::optional<ReturnTrip> run(Section s, std::size_t period) {
        ++evaluations;
        const auto q2 = height(s);
        if (!q2) return std::nullopt;
        try {
            Simulator sim(PhaseState{{0.0, *q2}, {s.v1, s.v2}, 0.0}, masses_);
            ReturnTrip trip;
            while (trip.visits.size() < period) {
                if (trip.events.size() > 10000 * period) return std::nullopt;
                const CollisionEvent& e = sim.step();
                trip.events.push_back(e);
                if (e.label == floor_label) trip.visits.push_back({sim.state().v[0], sim.state().v[1]});
            }
            trip.end = trip.visits.back();
            trip.time = sim.state().t;
            return trip;
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    std::size_t evaluations = 0;

private:
    MassVector masses_;
};

struct SolverContext {
    ReturnMap* map;
    std::size_t period;
};

int residual_function(const gsl_vector* x, void* params, gsl_vector* f) {
    auto* ctx = static_cast<SolverContext*>(params);
    const Section s{gsl_vector_get(x, 0), gsl_vector_get(x, 1)};
    const auto trip = ctx->map->run(s, ctx->period);
    if (!trip) return GSL_EDOM;
    gsl_vector_set(f, 0, trip->end.v1 - s.v1);
    gsl_vector_set(f, 1, trip->end.v2 - s.v2);
    return GSL_SUCCESS;
}

double distance(Section a, Section b) { return std::hypot(a.v1 - b.v1, a.v2 - b.v2); }

double residual_norm(const ReturnTrip& trip, Section s) { return distance(trip.end, s); }

struct SolverDeleter {
    void operator()(gsl_multiroot_fsolver* s) const { gsl_multiroot_fsolver_free(s); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

std::optional<Section> refine(ReturnMap& map, std::size_t period, Section seed, const OrbitProbeOptions& options) {
    SolverContext ctx{&map, period};
    gsl_multiroot_function fn{&residual_function, 2, &ctx};
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(2));
    gsl_vector_set(x.get(), 0, seed.v1);
    gsl_vector_set(x.get(), 1, seed.v2);
    std::unique_ptr<gsl_multiroot_fsolver, SolverDeleter> solver(
        gsl_multiroot_fsolver_alloc(gsl_multiroot_fsolver_hybrids, 2));
    if (gsl_multiroot_fsolver_set(solver.get(), &fn, x.get()) != GSL_SUCCESS) return std::nullopt;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        if (gsl_multiroot_test_residual(solver->f, options.tolerance) == GSL_SUCCESS) {
            return Section{gsl_vector_get(solver->x, 0), gsl_vector_get(solver->x, 1)};
        }
        const int status = gsl_multiroot_fsolver_iterate(solver.get());
        if (status != GSL_SUCCESS) break;
    }
    if (gsl_multiroot_test_residual(solver->f, options.tolerance) == GSL_SUCCESS) {
        return Section{gsl_vector_get(solver->x, 0), gsl_vector_get(solver->x, 1)};
    }
    return std::nullopt;
}

std::vector<std::complex<double>> eigenvalues_of(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    const auto values = es.eigenvalues();
    std::vector<std::complex<double>> out(values.data(), values.data() + values.size());
    std::sort(out.begin(), out.end(), [](auto a, auto b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        return a.imag() > b.imag();
    });
    return out;
}

} // namespace

const PeriodicOrbit* OrbitProbeReport::most_stable() const noexcept {
    const PeriodicOrbit* best = nullptr;
    for (const auto& o : orbits) {
        if (best == nullptr || o.unit_circle_deviation < best->unit_circle_deviation) best = &o;
    }
    return best;
}

OrbitProbeReport stable_orbit_probe(const MassVector& masses, const OrbitProbeOptions& options) {
    if (masses.size() != 2) throw DomainError("the orbit probe is implemented for two balls");
    if (options.grid == 0 || options.max_period == 0) throw DomainError("orbit probe needs a grid and a period");

    // GSL aborts by default; failed evaluations are expected here and handled via return codes.
    struct HandlerGuard {
        gsl_error_handler_t* previous = gsl_set_error_handler_off();
        ~HandlerGuard() { gsl_set_error_handler(previous); }
    } guard;

    ReturnMap map(masses);
    OrbitProbeReport report;
    std::vector<std::vector<Section>> known; // section points of every accepted orbit

    const double v1_max = std::sqrt(2.0 / masses[0]);
    const double v2_max = std::sqrt(2.0 / masses[1]);
    const auto g = static_cast<double>(options.grid);

    for (std::size_t period = 1; period <= options.max_period; ++period) {
        std::vector<std::pair<double, Section>> seeds;
        for (std::size_t i = 0; i < options.grid; ++i) {
            for (std::size_t j = 0; j < options.grid; ++j) {
                const Section s{(static_cast<double>(i) + 0.5) / g * v1_max,
                                (2.0 * (static_cast<double>(j) + 0.5) / g - 1.0) * v2_max};
                if (!map.height(s)) continue;
                const auto trip = map.run(s, period);
                if (!trip) continue;
                const double r = residual_norm(*trip, s);
                if (r < options.seed_residual) seeds.emplace_back(r, s);
            }
        }
        std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        if (seeds.size() > options.max_seeds) seeds.resize(options.max_seeds);

        for (const auto& [r0, seed] : seeds) {
            (void)r0;
            ++report.seeds;
            const auto root = refine(map, period, seed, options);
            if (!root) continue;
            const bool seen = std::any_of(known.begin(), known.end(), [&](const auto& pts) {
                return std::any_of(pts.begin(), pts.end(), [&](Section p) { return distance(p, *root) < 1e-6; });
            });
            if (seen) continue;
            // Lower periods were handled already; skip their iterates.
            bool lower = false;
            for (std::size_t d = 1; d < period && !lower; ++d) {
                if (period % d != 0) continue;
                const auto t = map.run(*root, d);
                lower = t && residual_norm(*t, *root) < 1e-7;
            }
            if (lower) continue;

            const auto trip = map.run(*root, period);
            if (!trip) continue;
            PeriodicOrbit orbit;
            orbit.period = period;
            orbit.v1 = root->v1;
            orbit.v2 = root->v2;
            orbit.q2 = *map.height(*root);
            orbit.residual = residual_norm(*trip, *root);
            orbit.return_time = trip->time;
            orbit.events = trip->events;
            orbit.sequence = ExtendedSequence::from_events(trip->events, 2).symbols();
            orbit.monodromy = cocycle_matrix(trip->events, masses);
            orbit.eigenvalues = eigenvalues_of(orbit.monodromy);
            orbit.determinant = orbit.monodromy.determinant();
            orbit.reduced_monodromy = reduce_monodromy(orbit.monodromy);
            orbit.reduced_eigenvalues = eigenvalues_of(orbit.reduced_monodromy);
            for (const auto& lam : orbit.reduced_eigenvalues) {
                orbit.unit_circle_deviation = std::max(orbit.unit_circle_deviation, std::abs(std::abs(lam) - 1.0));
            }
            orbit.linearly_stable = orbit.unit_circle_deviation <= options.stability_tolerance;
            known.push_back(trip->visits);
            report.orbits.push_back(std::move(orbit));
        }
    }
    report.evaluations = map.evaluations;
    return report;
}

} // namespace fallingballs
