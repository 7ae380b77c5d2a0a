#include <doctest.h>

#include "fallingballs/ensemble.hpp"
#include "fallingballs/errors.hpp"
#include "fallingballs/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace fallingballs;

TEST_CASE("serial and parallel scans agree bitwise") {
    ScanRequest req;
    req.masses = {MassVector({2, 1}), MassVector({3, 2, 1})};
    req.seeds = {1, 2, 3, 4, 5};
    req.spectrum_events = 2000;
    req.onset_events = 500;
    const auto serial = run_scan(req, {Execution::serial, 0});
    const auto parallel = run_scan(req, {Execution::parallel, 3});
    REQUIRE(serial.size() == 10);
    REQUIRE(parallel.size() == 10);
    for (std::size_t k = 0; k < serial.size(); ++k) {
        CHECK(serial[k].mass_index == k / 5);
        CHECK(serial[k].seed == req.seeds[k % 5]);
        CHECK(parallel[k].mass_index == serial[k].mass_index);
        CHECK(parallel[k].seed == serial[k].seed);
        REQUIRE(serial[k].spectrum.has_value());
        REQUIRE(parallel[k].spectrum.has_value());
        CHECK(serial[k].spectrum->exponents == parallel[k].spectrum->exponents);
        REQUIRE(serial[k].onset.has_value());
        CHECK(serial[k].onset->events == parallel[k].onset->events);
    }
}

TEST_CASE("ensembles and classification in bulk") {
    const MassVector m({2, 1});
    const std::vector<std::uint64_t> seeds{7, 8, 9};
    const auto a = lyapunov_ensemble(m, seeds, 1000, {}, {Execution::serial, 0});
    const auto b = lyapunov_ensemble(m, seeds, 1000);
    REQUIRE(a.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(a[k].exponents == b[k].exponents);

    const auto onsets = onset_ensemble(m, seeds, 500);
    for (const auto& o : onsets) CHECK(o.reached());

    const auto classified =
        classify_many({parse_sequence("1-2,0-1"), SymbolicSequence(3, {0, 1})}, 5, 1, {Execution::parallel, 2});
    REQUIRE(classified.size() == 2);
    CHECK(classified[0].classification->verdict == Dichotomy::D1);
    CHECK_FALSE(classified[1].classification.has_value());
    CHECK(classified[1].error.has_value());
}

TEST_CASE("seeded states are reproducible and valid") {
    const MassVector m({3, 2, 1});
    const auto a = seeded_state(m, 42);
    const auto b = seeded_state(m, 42);
    CHECK(a.q == b.q);
    CHECK(a.v == b.v);
    CHECK_NOTHROW(validate_state(a, m));
    CHECK_FALSE(seeded_state(m, 43).q == a.q);
}

TEST_CASE("summary statistics") {
    SpectrumReport r1, r2, cut;
    r1.exponents = {1.0, -1.0};
    r1.pairing_residual = 0.1;
    r2.exponents = {3.0, -3.0};
    r2.pairing_residual = 0.2;
    cut.exponents = {100.0, 100.0};
    cut.termination = "singular";
    const auto s = summarize({r1, r2, cut});
    CHECK(s.runs == 2);
    CHECK(s.mean[0] == doctest::Approx(2.0));
    CHECK(s.standard_error[0] == doctest::Approx(1.0));
    CHECK(s.max_pairing_residual == doctest::Approx(0.2));
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("config hash") {
    CHECK(config_hash("") == "cbf29ce484222325");
    CHECK(config_hash("a") == "af63dc4c8601ec8c");
    CHECK(config_hash("masses=2,1") != config_hash("masses=3,1"));
}

TEST_CASE("event log round trip") {
    const MassVector m({2, 1});
    const auto x0 = seeded_state(m, 1);
    const auto run = simulate(x0, m, StopCondition::collisions(25));
    std::stringstream buffer;
    EventLogWriter writer(buffer, "abc");
    for (std::size_t k = 0; k < run.events.size(); ++k) writer.write(k + 1, run.events[k], 1.0);
    const auto records = read_event_log(buffer);
    REQUIRE(records.size() == 25);
    for (std::size_t k = 0; k < 25; ++k) {
        CHECK(records[k].k == k + 1);
        CHECK(records[k].t == run.events[k].t);
        CHECK(records[k].label == run.events[k].label);
        CHECK(records[k].rho == run.events[k].rho);
        CHECK(records[k].config == "abc");
    }
    std::istringstream bad("{\"k\": 1}\nnot json\n");
    CHECK_THROWS_AS((void)read_event_log(bad), ParseError);
}

TEST_CASE("spectrum csv") {
    const auto header = spectrum_csv_header(2);
    CHECK(header == "seed,n_collisions,total_time,lambda_1,lambda_2,lambda_3,lambda_4,pairing_residual,flags,config");
    const MassVector m({2, 1});
    const auto r = lyapunov_spectrum(seeded_state(m, 2), m, 1000);
    const auto row = spectrum_csv_row(2, r, 2, "cfg");
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
    CHECK(row.rfind("2,1000,", 0) == 0);
}
