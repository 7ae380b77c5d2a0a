#pragma once

// Serialization of event logs and spectrum tables.

#include "fallingballs/dynamics.hpp"
#include "fallingballs/spectrum.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fallingballs {

// Shortest decimal that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

// 64-bit FNV-1a of a canonical config text, as 16 hex digits.
[[nodiscard]] std::string config_hash(std::string_view canonical);

struct EventRecord {
    std::string config;
    std::size_t k = 0; // 1-based event index
    double t = 0.0;
    Label label = floor_label;
    double rho = 0.0;
    double energy = 0.0; // H after the event
};

// One JSON object per line: {"config", "k", "t", "i", "rho", "H"}.
class EventLogWriter {
public:
    EventLogWriter(std::ostream& out, std::string config);
    void write(std::size_t k, const CollisionEvent& event, double energy_after);

private:
    std::ostream& out_;
    std::string config_;
};

// Throws ParseError on malformed lines.
[[nodiscard]] std::vector<EventRecord> read_event_log(std::istream& in);

// Columns: seed, n_collisions, total_time, lambda_1..lambda_2n, pairing_residual, flags, config.
[[nodiscard]] std::string spectrum_csv_header(std::size_t n);
[[nodiscard]] std::string spectrum_csv_row(std::uint64_t seed, const SpectrumReport& report, std::size_t n,
                                           std::string_view config);

} // namespace fallingballs
