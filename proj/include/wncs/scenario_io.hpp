#pragma once

// Flat key=value scenario files. One key per line, '#' starts a comment.
// Times are in seconds. See scenarios/README.md for the schema.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "wncs/harness.hpp"

namespace wncs {

class ScenarioParseError : public std::runtime_error {
public:
    ScenarioParseError(std::size_t line, const std::string& what)
        : std::runtime_error("scenario line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ScenarioParseError(line, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

// "0:100, 8:130"
inline std::vector<ReferenceStep> parse_reference(std::string_view text, std::size_t line) {
    std::vector<ReferenceStep> steps;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw ScenarioParseError(line, "reference entries are time:value");
        }
        steps.push_back({parse_number<double>(trim(item.substr(0, colon)), line),
                         parse_number<double>(trim(item.substr(colon + 1)), line)});
    }
    return steps;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
    Scenario s;
    std::set<std::string, std::less<>> seen;
    std::optional<double> kp;
    std::optional<double> ki;
    std::optional<double> i_thres;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = detail::trim(text);
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ScenarioParseError(line, "expected key = value");
        }
        const std::string key(detail::trim(text.substr(0, eq)));
        const std::string_view value = detail::trim(text.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ScenarioParseError(line, "duplicate key '" + key + "'");
        }
        try {
            if (key == "mode") {
                s.mode = parse_mode(value);
            } else if (key == "series") {
                s.series = parse_series(value);
            } else if (key == "fixed_tm") {
                s.fixed_tm = detail::parse_number<double>(value, line);
            } else if (key == "delay_lo") {
                s.delay_lo = detail::parse_number<double>(value, line);
            } else if (key == "delay_hi") {
                s.delay_hi = detail::parse_number<double>(value, line);
            } else if (key == "reference") {
                s.reference = detail::parse_reference(value, line);
            } else if (key == "duration") {
                s.duration = detail::parse_number<double>(value, line);
            } else if (key == "seed") {
                s.seed = detail::parse_number<std::uint64_t>(value, line);
            } else if (key == "initial_tm") {
                s.initial_tm = detail::parse_number<double>(value, line);
            } else if (key == "kp") {
                kp = detail::parse_number<double>(value, line);
            } else if (key == "ki") {
                ki = detail::parse_number<double>(value, line);
            } else if (key == "i_thres") {
                i_thres = detail::parse_number<double>(value, line);
            } else {
                throw ScenarioParseError(line, "unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw ScenarioParseError(line, e.what());
        }
    }
    if (kp || ki) {
        s.pi = PiConfig::with_gains(kp.value_or(kDefaultKp), ki.value_or(kDefaultKi));
    }
    if (i_thres) {
        s.pi.i_thres = *i_thres;
    }
    s.validate();
    return s;
}

inline Scenario parse_scenario(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_scenario(in);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scenario file '" + path + "'");
    }
    return parse_scenario(in);
}

}  // namespace wncs
