#pragma once

// Trace CSV: fixed header, '.' decimal point regardless of locale, shortest
// round-trip number formatting, LF line endings.

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wncs/harness.hpp"

namespace wncs {

inline constexpr std::string_view kCsvHeader = "t,r,y,y_d,td_ms,tm_ms,rule,e1,e2,y_asp,drive,duty_pct";

namespace detail {

inline void put_number(std::string& out, double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    out.append(buf.data(), ptr);
}

inline double get_number(std::string_view text, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

inline DelayRule parse_rule(std::string_view text, std::size_t line) {
    for (DelayRule r : {DelayRule::Normal, DelayRule::Vacant, DelayRule::Rejection, DelayRule::Delayed}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    throw std::runtime_error("csv line " + std::to_string(line) + ": unknown rule '" + std::string(text) + "'");
}

}  // namespace detail

inline std::string format_csv(const SimTrace& trace) {
    std::string out(kCsvHeader);
    out.push_back('\n');
    for (const TraceRecord& rec : trace) {
        for (double v : {rec.t, rec.r, rec.y, rec.y_d, rec.td_ms, rec.tm_ms}) {
            detail::put_number(out, v);
            out.push_back(',');
        }
        out.append(to_string(rec.rule));
        for (double v : {rec.e1, rec.e2, rec.y_asp, rec.drive, rec.duty_pct}) {
            out.push_back(',');
            detail::put_number(out, v);
        }
        out.push_back('\n');
    }
    return out;
}

inline void write_csv(const SimTrace& trace, std::ostream& out) {
    const std::string text = format_csv(trace);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline void export_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
    }
    write_csv(trace, out);
    out.flush();
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed: " + std::strerror(errno));
    }
}

inline SimTrace parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::runtime_error("csv: missing or unexpected header");
    }
    SimTrace trace;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest = rest.substr(comma + 1);
        }
        if (fields.size() != 12) {
            throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 12 fields");
        }
        auto num = [&](std::size_t k) { return detail::get_number(fields[k], lineno); };
        trace.push_back({num(0), num(1), num(2), num(3), num(4), num(5), detail::parse_rule(fields[6], lineno),
                         num(7), num(8), num(9), num(10), num(11)});
    }
    return trace;
}

inline SimTrace parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_csv(in);
}

}  // namespace wncs
