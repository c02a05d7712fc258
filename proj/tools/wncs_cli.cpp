// Command-line front end: closed-loop runs, stability sweeps, approximant scores.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wncs/wncs.hpp"

namespace {

void print_number(std::ostream& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
}

int run_command(const std::string& scenario_path, const std::optional<std::string>& mode,
                const std::optional<std::string>& series, const std::optional<std::uint64_t>& seed,
                const std::string& out_path) {
    wncs::Scenario s = scenario_path.empty() ? wncs::Scenario{} : wncs::load_scenario(scenario_path);
    if (mode) {
        s.mode = wncs::parse_mode(*mode);
        if (s.mode == wncs::CompensatorMode::Classical && !s.fixed_tm) {
            s.fixed_tm = 0.06;
        }
    }
    if (series) {
        s.series = wncs::parse_series(*series);
    }
    if (seed) {
        s.seed = *seed;
    }
    const wncs::SimTrace trace = wncs::run_scenario(s);
    if (out_path.empty() || out_path == "-") {
        wncs::write_csv(trace, std::cout);
    } else {
        wncs::export_csv(trace, out_path);
    }

    const wncs::RunMetrics m = wncs::compute_metrics(trace);
    std::fprintf(stderr, "max duty %.1f%%  min duty %.1f%%  sse %.2f%%  oscillating %s  settling %.2f s\n",
                 m.max_duty, m.min_duty, m.sse_pct, m.oscillating ? "yes" : "no", m.settling_time);
    return 0;
}

int sweep_command(double td_min, double td_max, int steps, const std::string& out_path) {
    if (steps < 1 || !(td_min > 0.0) || td_max < td_min) {
        throw std::invalid_argument("sweep-stability: need 0 < td-min <= td-max and steps >= 1");
    }
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty() && out_path != "-") {
        file.open(out_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw std::runtime_error("cannot open '" + out_path + "' for writing");
        }
        out = &file;
    }
    *out << "td,rightmost_real,rightmost_imag\n";
    for (int k = 0; k <= steps; ++k) {
        const double td = td_min + (td_max - td_min) * k / steps;
        const wncs::RightmostRoot root = wncs::rightmost_root(wncs::speed_loop_dde(td));
        print_number(*out, td);
        *out << ',';
        print_number(*out, root.root.real());
        *out << ',';
        print_number(*out, std::abs(root.root.imag()));
        *out << '\n';
    }
    return 0;
}

int ise_table_command() {
    const double taus[] = {0.04, 0.24, 1.0};
    std::printf("%-10s %12s %12s %12s %12s\n", "series", "tau=0.04", "tau=0.24", "tau=1", "average");
    for (wncs::SeriesKind kind : wncs::kAllSeries) {
        double sum = 0.0;
        std::printf("%-10s", std::string(wncs::to_string(kind)).c_str());
        for (double tau : taus) {
            const double ise = wncs::ise_error(kind, tau).ise;
            sum += ise;
            std::printf(" %12.4f", ise);
        }
        std::printf(" %12.4f\n", sum / 3.0);
    }
    return 0;
}

int critical_delay_command(double lo, double hi) {
    const wncs::ScalarDde dde = wncs::speed_loop_dde(lo);
    const double spectral = wncs::critical_delay(dde, lo, hi);
    const wncs::Crossing crossing = wncs::crossing_oracle(dde);
    std::printf("critical delay (spectral)  %.4f s\n", spectral);
    std::printf("critical delay (crossing)  %.4f s at %.4f rad/s\n", crossing.delay, crossing.omega);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Networked speed-loop simulator with adaptive Smith compensation"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::string> mode;
    std::optional<std::string> series;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    auto* run = app.add_subcommand("run", "simulate a scenario and write its trace as CSV");
    run->add_option("--scenario", scenario_path, "scenario file (defaults apply when omitted)")
        ->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "no-sp, csp or asp");
    run->add_option("--series", series, "DFR or Pade");
    run->add_option("--seed", seed, "channel seed");
    run->add_option("--out", out_path, "CSV output path, '-' for stdout");

    double td_min = 0.1;
    double td_max = 0.8;
    int steps = 70;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep-stability", "rightmost root of the uncompensated loop against delay");
    sweep->add_option("--td-min", td_min, "smallest delay, s");
    sweep->add_option("--td-max", td_max, "largest delay, s");
    sweep->add_option("--steps", steps, "number of intervals");
    sweep->add_option("--out", sweep_out, "CSV output path, '-' for stdout");

    auto* ise = app.add_subcommand("ise-table", "step-response ISE of each delay approximant");

    double crit_lo = 0.1;
    double crit_hi = 0.8;
    auto* crit = app.add_subcommand("critical-delay", "delay at which the uncompensated loop loses stability");
    crit->add_option("--lo", crit_lo, "lower end of the search range, s");
    crit->add_option("--hi", crit_hi, "upper end of the search range, s");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return run_command(scenario_path, mode, series, seed, out_path);
        }
        if (*sweep) {
            return sweep_command(td_min, td_max, steps, sweep_out);
        }
        if (*ise) {
            return ise_table_command();
        }
        if (*crit) {
            return critical_delay_command(crit_lo, crit_hi);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
