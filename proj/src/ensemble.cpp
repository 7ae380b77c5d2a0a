#include "fallingballs/ensemble.hpp"

#include "fallingballs/errors.hpp"

#include <omp.h>

#include <cmath>
#include <random>

namespace fallingballs {

namespace {

template <class F>
void for_each_index(std::size_t count, const Parallelism& parallelism, F&& fn) {
    if (parallelism.mode == Execution::serial) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int threads = parallelism.jobs > 0 ? parallelism.jobs : omp_get_max_threads();
    const auto total = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < total; ++i) fn(static_cast<std::size_t>(i));
}

} // namespace

PhaseState seeded_state(const MassVector& masses, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    return sample_state(masses, rng);
}

std::vector<CellResult> run_scan(const ScanRequest& request, const Parallelism& parallelism) {
    const std::size_t per_mass = request.seeds.size();
    std::vector<CellResult> out(request.masses.size() * per_mass);
    for_each_index(out.size(), parallelism, [&](std::size_t k) {
        CellResult& cell = out[k];
        cell.mass_index = k / per_mass;
        cell.seed = request.seeds[k % per_mass];
        const MassVector& masses = request.masses[cell.mass_index];
        try {
            const PhaseState x0 = seeded_state(masses, cell.seed);
            if (request.spectrum_events > 0) {
                cell.spectrum = lyapunov_spectrum(x0, masses, request.spectrum_events, request.spectrum);
            }
            if (request.onset_events > 0) {
                cell.onset = sufficiency_onset(x0, masses, request.onset_events, request.spectrum.simulation);
            }
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return out;
}

std::vector<SpectrumReport> lyapunov_ensemble(const MassVector& masses, const std::vector<std::uint64_t>& seeds,
                                              std::size_t n_collisions, const SpectrumOptions& options,
                                              const Parallelism& parallelism) {
    ScanRequest request{{masses}, seeds, n_collisions, 0, options};
    std::vector<SpectrumReport> out;
    for (auto& cell : run_scan(request, parallelism)) {
        if (cell.error) throw Error(*cell.error);
        out.push_back(std::move(*cell.spectrum));
    }
    return out;
}

std::vector<Onset> onset_ensemble(const MassVector& masses, const std::vector<std::uint64_t>& seeds,
                                  std::size_t max_events, const SimulationOptions& options,
                                  const Parallelism& parallelism) {
    ScanRequest request{{masses}, seeds, 0, max_events, {}};
    request.spectrum.simulation = options;
    std::vector<Onset> out;
    for (auto& cell : run_scan(request, parallelism)) {
        if (cell.error) throw Error(*cell.error);
        out.push_back(std::move(*cell.onset));
    }
    return out;
}

std::vector<ClassifyResult> classify_many(const std::vector<SymbolicSequence>& sequences, std::size_t trials,
                                          std::uint64_t seed, const Parallelism& parallelism) {
    std::vector<ClassifyResult> out(sequences.size());
    for_each_index(sequences.size(), parallelism, [&](std::size_t k) {
        try {
            out[k].classification = classify_sequence(sequences[k], trials, seed);
        } catch (const std::exception& e) {
            out[k].error = e.what();
        }
    });
    return out;
}

SpectrumStatistics summarize(const std::vector<SpectrumReport>& reports) {
    SpectrumStatistics s;
    std::size_t dim = 0;
    for (const auto& r : reports) {
        if (r.termination || r.exponents.empty()) continue;
        if (dim == 0) dim = r.exponents.size();
        if (r.exponents.size() != dim) throw DomainError("summarize: reports of different dimension");
        ++s.runs;
    }
    s.mean.assign(dim, 0.0);
    s.standard_error.assign(dim, 0.0);
    if (s.runs == 0) return s;
    for (const auto& r : reports) {
        if (r.termination || r.exponents.empty()) continue;
        for (std::size_t j = 0; j < dim; ++j) s.mean[j] += r.exponents[j];
        s.max_pairing_residual = std::max(s.max_pairing_residual, r.pairing_residual);
    }
    for (double& m : s.mean) m /= static_cast<double>(s.runs);
    if (s.runs < 2) return s;
    for (const auto& r : reports) {
        if (r.termination || r.exponents.empty()) continue;
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = r.exponents[j] - s.mean[j];
            s.standard_error[j] += d * d;
        }
    }
    const auto runs = static_cast<double>(s.runs);
    for (double& e : s.standard_error) e = std::sqrt(e / (runs - 1.0) / runs);
    return s;
}

} // namespace fallingballs
