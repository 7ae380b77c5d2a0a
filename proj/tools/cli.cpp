// fallingballs-cli: experiment runner for the falling balls system.
//
// Exit codes: 0 success, 1 unexpected error, 2 bad flags or config, 3 singularity (partial
// artifacts are kept), 4 verification failure.

#include "fallingballs/ensemble.hpp"
#include "fallingballs/errors.hpp"
#include "fallingballs/io.hpp"
#include "fallingballs/oracle.hpp"
#include "fallingballs/spectrum.hpp"
#include "fallingballs/sufficiency.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fallingballs;

namespace {

enum Exit : int { ok = 0, unexpected = 1, config_error = 2, singular = 3, verify_failed = 4 };

struct Options {
    std::vector<std::string> masses; // one mass vector per entry; scan accepts several
    std::uint64_t seed = 1;
    std::size_t seeds = 1; // scan and lyapunov: seeds seed .. seed+seeds-1
    std::size_t events = 1000;
    std::optional<double> time;
    std::string out;
    int jobs = 0;
    bool unordered = false;
    std::string sequence;
    std::size_t trials = 20;
    std::size_t renorm = 1;
    std::size_t onset_events = 100000;
    Tolerances tol;
};

// A run cut short by a singularity; artifacts written so far stay on disk.
struct Stopped {
    std::string what;
};

fs::path out_dir(const Options& o) {
    fs::path dir = o.out;
    if (dir.empty()) {
        const char* env = std::getenv("FALLINGBALLS_OUT");
        dir = env != nullptr && *env != '\0' ? env : "fallingballs-out";
    }
    fs::create_directories(dir);
    return dir;
}

MassOrdering ordering(const Options& o) {
    return o.unordered ? MassOrdering::unordered : MassOrdering::non_increasing;
}

ExactMasses exact_masses(const Options& o, std::size_t k = 0) {
    if (o.masses.size() <= k) throw ParseError("--masses is required");
    return parse_exact_masses(o.masses[k], ordering(o));
}

MassVector masses_of(const Options& o, std::size_t k = 0) { return exact_masses(o, k).to_mass_vector(); }

SimulationOptions simulation_options(const Options& o) {
    SimulationOptions s;
    s.tol = o.tol;
    return s;
}

// Canonical text of everything that determines the output of a command.
std::string canonical(const std::string& command, const Options& o) {
    std::ostringstream s;
    s << "command=" << command << ";masses=";
    for (std::size_t k = 0; k < o.masses.size(); ++k) s << (k ? "|" : "") << exact_masses(o, k).to_string();
    s << ";seed=" << o.seed << ";seeds=" << o.seeds << ";events=" << o.events
      << ";time=" << (o.time ? format_double(*o.time) : "none") << ";sequence=" << o.sequence
      << ";trials=" << o.trials << ";renorm=" << o.renorm << ";onset_events=" << o.onset_events
      << ";tol=" << format_double(o.tol.singular) << "," << format_double(o.tol.grazing) << ","
      << format_double(o.tol.ordering) << "," << format_double(o.tol.energy);
    return s.str();
}

std::ofstream open(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    return f;
}

int run_simulate(const Options& o) {
    const MassVector m = masses_of(o);
    const std::string hash = config_hash(canonical("simulate", o));
    const fs::path dir = out_dir(o);
    auto log = open(dir / "events.jsonl");
    EventLogWriter writer(log, hash);

    Simulator sim(seeded_state(m, o.seed), m, simulation_options(o));
    std::size_t k = 0;
    try {
        while (k < o.events) {
            if (o.time && sim.advance_to(*o.time)) break;
            writer.write(++k, sim.step(), energy(sim.state(), m));
        }
        if (o.time && k == o.events) (void)sim.advance_to(*o.time);
    } catch (const SingularityError& e) {
        log.flush();
        throw Stopped{e.what()};
    }
    std::cout << "events=" << k << " t=" << format_double(sim.state().t)
              << " H=" << format_double(energy(sim.state(), m)) << " config=" << hash << '\n';
    return ok;
}

int run_lyapunov(const Options& o) {
    const MassVector m = masses_of(o);
    const std::string hash = config_hash(canonical("lyapunov", o));
    SpectrumOptions spectrum_options;
    spectrum_options.renorm_every = o.renorm;
    spectrum_options.simulation = simulation_options(o);
    std::vector<std::uint64_t> seeds;
    for (std::size_t k = 0; k < o.seeds; ++k) seeds.push_back(o.seed + k);

    const auto reports = lyapunov_ensemble(m, seeds, o.events, spectrum_options, {Execution::parallel, o.jobs});
    auto csv = open(out_dir(o) / "spectrum.csv");
    csv << spectrum_csv_header(m.size()) << '\n';
    bool cut = false;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        csv << spectrum_csv_row(seeds[k], reports[k], m.size(), hash) << '\n';
        cut = cut || reports[k].termination.has_value();
    }
    const auto stats = summarize(reports);
    std::cout << "runs=" << stats.runs;
    for (std::size_t j = 0; j < stats.mean.size(); ++j) {
        std::cout << " lambda_" << j + 1 << "=" << format_double(stats.mean[j]);
    }
    std::cout << " config=" << hash << '\n';
    if (cut) throw Stopped{"at least one run hit a singularity"};
    return ok;
}

int run_sufficiency(const Options& o) {
    if (o.sequence.empty()) throw ParseError("--sequence is required");
    if (o.masses.empty()) {
        const auto seq = parse_sequence(o.sequence);
        const auto c = classify_sequence(seq, o.trials, o.seed);
        std::cout << "sequence=" << format_sequence(seq) << " class=" << to_string(c.verdict)
                  << (c.certified ? " certified" : " presumed");
        if (c.witness) std::cout << " witness=" << c.witness->to_string();
        std::cout << '\n';
        return ok;
    }
    const ExactMasses m = exact_masses(o);
    const auto seq = parse_sequence(o.sequence, m.size());
    const auto graph = collision_graph(seq);
    const auto report = neutral_space_unchecked(seq, m);
    const bool sufficient = graph.balls_connected() && report.sufficient;
    std::cout << "sequence=" << format_sequence(seq) << " masses=" << m.to_string()
              << " verdict=" << (sufficient ? "sufficient" : "insufficient") << " neutral_dim=" << report.dimension
              << " connected=" << (graph.balls_connected() ? "yes" : "no") << '\n';
    for (const auto& b : report.basis) {
        std::cout << "neutral";
        for (const auto& x : b) std::cout << ' ' << format_rational(x);
        std::cout << '\n';
    }
    return ok;
}

int run_scan(const Options& o) {
    ScanRequest req;
    for (std::size_t k = 0; k < o.masses.size(); ++k) req.masses.push_back(masses_of(o, k));
    if (req.masses.empty()) throw ParseError("--masses is required");
    for (std::size_t k = 0; k < o.seeds; ++k) req.seeds.push_back(o.seed + k);
    req.spectrum_events = o.events;
    req.onset_events = o.onset_events;
    req.spectrum.renorm_every = o.renorm;
    req.spectrum.simulation = simulation_options(o);
    const std::string hash = config_hash(canonical("scan", o));

    const auto cells = fallingballs::run_scan(req, {Execution::parallel, o.jobs});
    auto csv = open(out_dir(o) / "scan.csv");
    csv << "mass_index,masses,seed,onset_events,onset_time,lambda_1,pairing_residual,status,config\n";
    std::size_t failed = 0;
    for (const auto& c : cells) {
        csv << c.mass_index << ",\"" << exact_masses(o, c.mass_index).to_string() << "\"," << c.seed << ',';
        if (c.onset && c.onset->reached()) {
            csv << *c.onset->events << ',' << format_double(c.onset->time);
        } else {
            csv << ',';
        }
        csv << ',';
        if (c.spectrum && !c.spectrum->exponents.empty()) {
            csv << format_double(c.spectrum->exponents[0]) << ',' << format_double(c.spectrum->pairing_residual);
        } else {
            csv << ',';
        }
        std::string status = "ok";
        if (c.error) status = "error";
        else if ((c.spectrum && c.spectrum->termination) || (c.onset && c.onset->termination)) status = "singular";
        if (status != "ok") ++failed;
        csv << ',' << status << ',' << hash << '\n';
    }
    std::cout << "cells=" << cells.size() << " not_ok=" << failed << " config=" << hash << '\n';
    if (failed > 0) throw Stopped{std::to_string(failed) + " cells did not complete"};
    return ok;
}

int run_cone_check(const Options& o) {
    const MassVector m = masses_of(o);
    ConeCheck check;
    if (!o.sequence.empty()) {
        const auto seq = parse_sequence(o.sequence, m.size());
        std::vector<ExtendedEntry> entries;
        for (Label l : seq.labels) entries.push_back({l, 1.0});
        check = strict_invariance_check(ExtendedSequence(m.size(), entries), m);
    } else {
        try {
            check = strict_invariance_check(seeded_state(m, o.seed), m, o.events, simulation_options(o));
        } catch (const SingularityError& e) {
            throw Stopped{e.what()};
        }
    }
    std::cout << "strict=" << (check.strict ? "yes" : "no") << " neutral_dim_h=" << check.neutral_dim_h
              << " neutral_dim_v=" << check.neutral_dim_v << " connected=" << (check.connected ? "yes" : "no")
              << " events=" << check.sequence.size() << " reason=\"" << check.reason << "\"\n";
    return ok;
}

// Quick oracle suites; the acceptance binary runs the full-size versions.
int run_verify(const Options& o) {
    std::ostringstream report;
    bool all = true;
    auto record = [&](const std::string& name, bool pass, const std::string& detail) {
        all = all && pass;
        report << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    };
    std::mt19937_64 rng(o.seed);

    {
        double worst = 0.0;
        bool labels = true;
        for (int k = 0; k < 1000; ++k) {
            const MassVector m({3, 2, 1});
            const auto s = sample_state(m, rng);
            const auto a = next_event(s, m);
            const auto b = oracle::bisect_collision_time(s, m);
            labels = labels && a.label == b.label;
            worst = std::max(worst, std::abs(a.dt - b.dt) / std::max(1.0, a.dt));
        }
        record("event times vs bisection", labels && worst <= 1e-13, "max deviation " + format_double(worst));
    }
    {
        const MassVector m({1, 1, 1});
        const auto x0 = sample_state(m, rng);
        const auto run = simulate(x0, m, StopCondition::collisions(1001));
        const double t_end = 0.5 * (run.events[999].t + run.events[1000].t);
        const auto ghost = oracle::ghost_trajectory(x0, t_end);
        double dt = ghost.events.size() == 1000 ? 0.0 : INFINITY;
        for (std::size_t k = 0; k < std::min<std::size_t>(1000, ghost.events.size()); ++k) {
            if (ghost.events[k].label != run.events[k].label) dt = INFINITY;
            dt = std::max(dt, std::abs(ghost.events[k].t - run.events[k].t));
        }
        record("equal-mass ghosts", dt <= 1e-9, "max time deviation " + format_double(dt));
    }
    {
        const MassVector m({2, 1});
        double worst = 0.0;
        std::size_t done = 0;
        for (int attempt = 0; attempt < 100 && done < 10; ++attempt) {
            const auto x0 = sample_state(m, rng);
            const auto u = TangentVector::on_energy_surface({0.6, -0.6}, {0.3, 0.4});
            try {
                const auto run = simulate(x0, m, StopCondition::collisions(10));
                const auto exact = push_frame({u}, run.events, m)[0];
                const auto fd = oracle::finite_difference_cocycle(x0, m, u, 10);
                worst = std::max(worst, (fd.image.stacked() - exact.stacked()).norm() / exact.norm());
                ++done;
            } catch (const Error&) {
            }
        }
        record("cocycle vs finite differences", done == 10 && worst <= 1e-5,
               std::to_string(done) + " segments, max relative error " + format_double(worst));
    }
    {
        std::size_t mismatches = 0;
        const auto table = oracle::classified_table(2, 4, 10, o.seed);
        for (const auto& row : table) {
            const bool has_floor = row.sequence.has_floor();
            if ((row.classification.verdict == Dichotomy::D1) != has_floor) ++mismatches;
        }
        record("n=2 dichotomy table", mismatches == 0,
               std::to_string(table.size()) + " words, " + std::to_string(mismatches) + " mismatches");
    }
    {
        std::size_t disagreements = 0;
        for (const auto& seq : oracle::enumerate_sequences(3, 5)) {
            const auto em = random_strict_masses(3, o.seed, 0);
            if (neutral_space(seq, em).dimension != oracle::numeric_neutral_dimension(seq, em.to_mass_vector()))
                ++disagreements;
        }
        record("exact vs floating neutral dimension", disagreements == 0,
               std::to_string(disagreements) + " disagreements");
    }

    auto f = open(out_dir(o) / "verify.txt");
    f << report.str();
    std::cout << report.str();
    return all ? ok : verify_failed;
}

void add_common(CLI::App* cmd, Options& o, bool many_masses = false) {
    if (many_masses) {
        cmd->add_option("--masses", o.masses, "mass vectors such as 2/1,1/1 (repeat for a grid)");
    } else {
        cmd->add_option("--masses", o.masses, "masses, largest first, e.g. 2/1,1/1 or 2,1")->expected(1);
    }
    cmd->add_flag("--unordered", o.unordered, "allow masses in any order");
    cmd->add_option("--seed", o.seed, "seed of the sampled initial state");
    cmd->add_option("--events", o.events, "collision budget");
    cmd->add_option("--time", o.time, "stop time (simulate)");
    cmd->add_option("--out", o.out, "output directory (default $FALLINGBALLS_OUT or ./fallingballs-out)");
    cmd->add_option("--jobs", o.jobs, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol-singular", o.tol.singular, "simultaneity tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-grazing", o.tol.grazing, "grazing speed cutoff")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-ordering", o.tol.ordering, "admissible position overlap")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-energy", o.tol.energy, "accepted |H - 1| of an initial state")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Falling balls: dynamics, tangent cocycle, sufficiency and Lyapunov spectra"};
    app.set_config("--config", "", "TOML file mirroring the command-line flags");
    app.require_subcommand(1);
    Options o;

    auto* simulate_cmd = app.add_subcommand("simulate", "write the event log of one trajectory");
    add_common(simulate_cmd, o);

    auto* lyapunov_cmd = app.add_subcommand("lyapunov", "Lyapunov spectrum CSV");
    add_common(lyapunov_cmd, o);
    lyapunov_cmd->add_option("--seeds", o.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    lyapunov_cmd->add_option("--renorm", o.renorm, "QR stride in collisions")->check(CLI::PositiveNumber);

    auto* sufficiency_cmd = app.add_subcommand("sufficiency", "neutral space of a symbolic sequence");
    add_common(sufficiency_cmd, o);
    sufficiency_cmd->add_option("--sequence", o.sequence, "labels such as 1-2,0-1")->required();
    sufficiency_cmd->add_option("--trials", o.trials, "random mass trials when --masses is absent");

    auto* scan_cmd = app.add_subcommand("scan", "sufficiency onset and top exponent over masses x seeds");
    add_common(scan_cmd, o, true);
    scan_cmd->add_option("--seeds", o.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--renorm", o.renorm, "QR stride in collisions")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--onset-events", o.onset_events, "collision budget of the onset search");

    auto* cone_cmd = app.add_subcommand("cone-check", "strict invariance of {Q1 >= 0} along a segment");
    add_common(cone_cmd, o);
    cone_cmd->add_option("--sequence", o.sequence, "check this sequence instead of a simulated segment");

    auto* verify_cmd = app.add_subcommand("verify", "oracle suites");
    add_common(verify_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    try {
        if (*simulate_cmd) return run_simulate(o);
        if (*lyapunov_cmd) return run_lyapunov(o);
        if (*sufficiency_cmd) return run_sufficiency(o);
        if (*scan_cmd) return run_scan(o);
        if (*cone_cmd) return run_cone_check(o);
        if (*verify_cmd) return run_verify(o);
    } catch (const Stopped& s) {
        std::cerr << "stopped at a singularity: " << s.what << '\n';
        return singular;
    } catch (const SingularityError& e) {
        std::cerr << "singularity: " << e.what() << '\n';
        return singular;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const PreconditionViolated& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return unexpected;
    }
    return unexpected;
}
