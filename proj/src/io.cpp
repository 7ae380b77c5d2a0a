#include "fallingballs/io.hpp"

#include "fallingballs/errors.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <istream>
#include <ostream>

namespace fallingballs {

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string config_hash(std::string_view canonical) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

EventLogWriter::EventLogWriter(std::ostream& out, std::string config) : out_(out), config_(std::move(config)) {}

void EventLogWriter::write(std::size_t k, const CollisionEvent& event, double energy_after) {
    nlohmann::ordered_json j;
    j["config"] = config_;
    j["k"] = k;
    j["t"] = event.t;
    j["i"] = event.label;
    j["rho"] = event.rho;
    j["H"] = energy_after;
    out_ << j.dump() << '\n';
}

std::vector<EventRecord> read_event_log(std::istream& in) {
    std::vector<EventRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("config").get<std::string>(), j.at("k").get<std::size_t>(), j.at("t").get<double>(),
                           j.at("i").get<Label>(), j.at("rho").get<double>(), j.at("H").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("event log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string spectrum_csv_header(std::size_t n) {
    std::string h = "seed,n_collisions,total_time";
    for (std::size_t j = 1; j <= 2 * n; ++j) h += ",lambda_" + std::to_string(j);
    h += ",pairing_residual,flags,config";
    return h;
}

std::string spectrum_csv_row(std::uint64_t seed, const SpectrumReport& report, std::size_t n,
                             std::string_view config) {
    std::string row = std::to_string(seed) + "," + std::to_string(report.collisions) + "," +
                      format_double(report.total_time);
    for (std::size_t j = 0; j < 2 * n; ++j) {
        row += ",";
        if (j < report.exponents.size()) row += format_double(report.exponents[j]);
    }
    row += "," + format_double(report.pairing_residual) + ",";
    // Flags: 1-based positions of the two constraint exponents and how they were found.
    std::string flags;
    if (report.flow_index) flags += "flow=" + std::to_string(*report.flow_index + 1);
    if (report.energy_index) flags += ";energy=" + std::to_string(*report.energy_index + 1);
    if (report.flow_index) flags += report.identified_by_angle ? ";angle" : ";nearest-zero";
    if (report.termination) flags += std::string(flags.empty() ? "" : ";") + "singular";
    row += flags;
    row += ",";
    row += config;
    return row;
}

} // namespace fallingballs
