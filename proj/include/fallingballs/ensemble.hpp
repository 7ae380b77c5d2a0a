#pragma once

// Independent runs over (mass, seed) cells. Every entry point has a serial reference path and
// an OpenMP path; both return results in cell index order, so outputs do not depend on the
// schedule.

#include "fallingballs/spectrum.hpp"
#include "fallingballs/sufficiency.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fallingballs {

enum class Execution { serial, parallel };

struct Parallelism {
    Execution mode = Execution::parallel;
    int jobs = 0; // 0: OpenMP default
};

// Initial condition of a seeded run: sample_state driven by mt19937_64 seeded from the seed.
[[nodiscard]] PhaseState seeded_state(const MassVector& masses, std::uint64_t seed);

struct ScanRequest {
    std::vector<MassVector> masses;
    std::vector<std::uint64_t> seeds;
    std::size_t spectrum_events = 0; // 0 skips the spectrum
    std::size_t onset_events = 0;    // 0 skips the onset search
    SpectrumOptions spectrum;
};

struct CellResult {
    std::size_t mass_index = 0;
    std::uint64_t seed = 0;
    std::optional<SpectrumReport> spectrum;
    std::optional<Onset> onset;
    std::optional<std::string> error; // initial state rejected or another non-singular failure
};

// Cells ordered mass-major, then by seed.
[[nodiscard]] std::vector<CellResult> run_scan(const ScanRequest& request, const Parallelism& parallelism = {});

[[nodiscard]] std::vector<SpectrumReport> lyapunov_ensemble(const MassVector& masses,
                                                            const std::vector<std::uint64_t>& seeds,
                                                            std::size_t n_collisions,
                                                            const SpectrumOptions& options = {},
                                                            const Parallelism& parallelism = {});

[[nodiscard]] std::vector<Onset> onset_ensemble(const MassVector& masses, const std::vector<std::uint64_t>& seeds,
                                                std::size_t max_events, const SimulationOptions& options = {},
                                                const Parallelism& parallelism = {});

struct ClassifyResult {
    std::optional<Classification> classification;
    std::optional<std::string> error; // e.g. disconnected collision graph
};

[[nodiscard]] std::vector<ClassifyResult> classify_many(const std::vector<SymbolicSequence>& sequences,
                                                        std::size_t trials, std::uint64_t seed,
                                                        const Parallelism& parallelism = {});

// Per-exponent mean and standard error over runs that completed with a full spectrum.
struct SpectrumStatistics {
    std::vector<double> mean;
    std::vector<double> standard_error;
    double max_pairing_residual = 0.0;
    std::size_t runs = 0;
};

[[nodiscard]] SpectrumStatistics summarize(const std::vector<SpectrumReport>& reports);

} // namespace fallingballs
