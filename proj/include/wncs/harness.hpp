#pragma once

// Closed-loop networked speed control: controller node (estimator, PI,
// compensator) and plant node joined by a delaying channel, run on a 1 ms
// event clock.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wncs/control.hpp"
#include "wncs/delay_approx.hpp"
#include "wncs/estimator.hpp"
#include "wncs/netsim.hpp"
#include "wncs/predictor.hpp"

namespace wncs {

enum class CompensatorMode { NoSp, Classical, Adaptive };

constexpr std::string_view to_string(CompensatorMode mode) {
    switch (mode) {
        case CompensatorMode::NoSp: return "no-sp";
        case CompensatorMode::Classical: return "csp";
        case CompensatorMode::Adaptive: return "asp";
    }
    return "?";
}

inline CompensatorMode parse_mode(std::string_view name) {
    if (name == "no-sp" || name == "nosp") return CompensatorMode::NoSp;
    if (name == "csp") return CompensatorMode::Classical;
    if (name == "asp") return CompensatorMode::Adaptive;
    throw std::invalid_argument("unknown compensator mode: " + std::string(name));
}

struct ReferenceStep {
    double at = 0.0;  // s
    double value = 0.0;
};

struct Scenario {
    CompensatorMode mode = CompensatorMode::Adaptive;
    SeriesKind series = SeriesKind::DFR;
    std::optional<double> fixed_tm;  // s, csp only
    double delay_lo = 0.0;           // s, round trip
    double delay_hi = 0.0;           // s
    std::vector<ReferenceStep> reference{{0.0, 100.0}, {8.0, 130.0}};
    double duration = 20.0;  // s
    std::uint64_t seed = 1;
    double initial_tm = 0.0;  // s
    PiConfig pi{};

    void validate() const {
        if (!(duration > 0.0)) {
            throw std::invalid_argument("scenario: duration must be positive");
        }
        if (!(delay_lo >= 0.0 && delay_lo <= delay_hi)) {
            throw std::invalid_argument("scenario: delay bounds must satisfy 0 <= lo <= hi");
        }
        if (mode == CompensatorMode::Classical && !fixed_tm) {
            throw std::invalid_argument("scenario: csp needs a fixed delay model");
        }
        if (fixed_tm && !(*fixed_tm >= 0.0)) {
            throw std::invalid_argument("scenario: fixed delay model must be non-negative");
        }
        if (!(initial_tm >= 0.0)) {
            throw std::invalid_argument("scenario: initial delay estimate must be non-negative");
        }
        if (series != SeriesKind::DFR && series != SeriesKind::Pade) {
            throw std::invalid_argument("scenario: series must be DFR or Pade");
        }
        if (reference.empty() || reference.front().at != 0.0) {
            throw std::invalid_argument("scenario: reference must start at t = 0");
        }
        for (std::size_t k = 1; k < reference.size(); ++k) {
            if (!(reference[k].at > reference[k - 1].at)) {
                throw std::invalid_argument("scenario: reference times must increase");
            }
        }
        pi.validate();
    }

    double reference_at(double t) const {
        double r = reference.front().value;
        for (const ReferenceStep& step : reference) {
            if (step.at <= t) {
                r = step.value;
            }
        }
        return r;
    }
};

/// Test hooks that replace parts of the physical loop with idealized ones.
struct LoopOptions {
    enum class PlantKind { FineMotor, MatchedNominal };
    PlantKind plant = PlantKind::FineMotor;
    std::optional<ChannelConfig> channel;     // overrides the scenario's round-trip channel
    std::optional<Millis> pinned_tm;          // asp: predictor uses this instead of the estimate
    std::optional<std::size_t> exact_delay;   // compensator with an exact z^-k delay model
    bool quantize = true;
};

struct TraceRecord {
    double t = 0.0;  // s
    double r = 0.0;
    double y = 0.0;    // plant speed at the sample instant
    double y_d = 0.0;  // feedback used by the controller
    double td_ms = 0.0;  // channel round trip of that feedback
    double tm_ms = 0.0;  // delay estimate
    DelayRule rule = DelayRule::Vacant;
    double e1 = 0.0;
    double e2 = 0.0;
    double y_asp = 0.0;
    double drive = 0.0;
    double duty_pct = 0.0;

    bool operator==(const TraceRecord&) const = default;
};

using SimTrace = std::vector<TraceRecord>;

namespace detail {

// Plant node: applies the newest command that has arrived and answers each
// sampling instant with its speed and an echo of the applied command.
class PlantNode {
public:
    explicit PlantNode(Plant plant) : plant_(std::move(plant)) {}

    void receive(DelayChannel& channel, Millis now) {
        for (const TimedMessage& msg : channel.poll_deliveries(Direction::Forward, now)) {
            if (applied_ && msg.sequence <= applied_->sequence) {
                continue;
            }
            input_ = msg.payload;
            applied_ = Echo{msg.sequence, msg.sent, msg.delivery - msg.sent};
            return_delay_ = msg.return_delay;
        }
    }

    void report(DelayChannel& channel, Millis now) {
        const double y = plant_.speed();
        if (return_delay_) {
            channel.channel_send_after(Direction::Backward, y, now, *return_delay_);
        } else {
            channel.channel_send(Direction::Backward, y, now);
        }
        if (applied_) {
            channel.attach_echo(*applied_);
        }
    }

    void tick(Millis now) {
        if (now % plant_.step() == Millis{0}) {
            plant_.tick(input_);
        }
    }

    // Speed is sampled when a step begins; between steps the last value holds.
    double speed() const { return plant_.speed(); }

private:
    Plant plant_;
    double input_ = 0.0;
    std::optional<Echo> applied_;
    std::optional<Millis> return_delay_;
};

inline Millis to_millis(double seconds) { return Millis{std::llround(seconds * 1000.0)}; }

}  // namespace detail

inline ChannelConfig scenario_channel(const Scenario& s) {
    return ChannelConfig::split_round_trip({detail::to_millis(s.delay_lo), detail::to_millis(s.delay_hi)}, s.seed);
}

/**
 * Runs the loop for s.duration, one record per 20 ms controller sample.
 * Per millisecond: forward deliveries reach the plant; at a sampling instant
 * the plant reports and the controller acts; zero-delay commands are applied;
 * then the plant advances.
 */
inline SimTrace run_scenario(const Scenario& s, const LoopOptions& opt = {}) {
    s.validate();
    const Millis period{20};
    const double period_s = std::chrono::duration_cast<Seconds>(period).count();
    const RationalTF nominal = nominal_model();

    DelayChannel channel(opt.channel.value_or(scenario_channel(s)));
    detail::PlantNode plant(opt.plant == LoopOptions::PlantKind::FineMotor
                                ? Plant::fine_motor(Millis{1})
                                : Plant(nominal, period));
    DelayEstimator estimator(period, detail::to_millis(s.initial_tm));
    PiState pi_state;

    const double initial_model = s.mode == CompensatorMode::Classical ? *s.fixed_tm : s.initial_tm;
    AspState asp = make_asp_state(s.series, initial_model, nominal, period_s);
    std::optional<ExactDelayPredictor> exact;
    if (opt.exact_delay) {
        exact.emplace(nominal, *opt.exact_delay);
    }
    const bool compensated = s.mode != CompensatorMode::NoSp || exact.has_value();

    const Millis end = detail::to_millis(s.duration);
    SimTrace trace;
    trace.reserve(static_cast<std::size_t>(end / period) + 1);

    double y_d = 0.0;
    double td_ms = 0.0;
    double y_asp = 0.0;
    std::vector<Feedback> arrivals;

    for (Millis now{0}; now < end; ++now) {
        plant.receive(channel, now);
        if (now % period == Millis{0}) {
            plant.report(channel, now);

            arrivals.clear();
            std::vector<TimedMessage> delivered = channel.poll_deliveries(Direction::Backward, now);
            for (const TimedMessage& msg : delivered) {
                if (msg.echo) {
                    arrivals.push_back({msg.sequence, msg.echo->sent, msg.delivery, msg.payload});
                }
            }
            const DelayRule rule = estimator.classify_and_measure(arrivals, now);
            if (rule != DelayRule::Vacant) {
                const Feedback& fb = *estimator.accepted();
                y_d = fb.payload;
                for (const TimedMessage& msg : delivered) {
                    if (msg.sequence == fb.sequence) {
                        td_ms = static_cast<double>((msg.echo->forward_delay + (msg.delivery - msg.sent)).count());
                    }
                }
            }

            const double t = std::chrono::duration_cast<Seconds>(now).count();
            const double r = s.reference_at(t);
            const double e1 = r - y_d;
            const double e2 = compensated ? residual(e1, y_asp) : e1;
            const double raw = pi_step(s.pi, pi_state, e2);
            const double drive = opt.quantize ? static_cast<double>(quantize_pwm(raw)) : raw;
            channel.channel_send(Direction::Forward, drive, now);

            trace.push_back({t, r, plant.speed(), y_d, td_ms, static_cast<double>(estimator.t_m().count()), rule,
                             e1, e2, compensated ? y_asp : 0.0, drive, duty_ratio(std::clamp(drive, 0.0, kPwmMax))});

            if (exact) {
                y_asp = exact->step(drive);
            } else if (s.mode == CompensatorMode::Adaptive) {
                asp_retune(asp, s.series, opt.pinned_tm.value_or(estimator.t_m()), nominal, period_s);
                y_asp = asp_step(asp, drive);
            } else if (s.mode == CompensatorMode::Classical) {
                y_asp = asp_step(asp, drive);
            }
        }
        plant.receive(channel, now);
        plant.tick(now);
    }
    return trace;
}

struct RunMetrics {
    double max_duty = 0.0;  // % over the final 60 %
    double min_duty = 0.0;
    double sse_pct = 0.0;  // |mean(r - y)| / mean(r), final 10 %
    bool oscillating = false;
    double settling_time = 0.0;  // s after the last reference change; infinity if never
    int zero_crossings = 0;      // of r - y in the final 40 %
    double error_p2p = 0.0;
};

/// Fraction of the run excluded as transient for the duty extremes.
inline constexpr double kTransientFraction = 0.4;

inline RunMetrics compute_metrics(const SimTrace& trace) {
    if (trace.empty()) {
        throw std::invalid_argument("compute_metrics: empty trace");
    }
    const std::size_t n = trace.size();
    RunMetrics m;

    const auto duty_from = static_cast<std::size_t>(std::floor(kTransientFraction * static_cast<double>(n)));
    m.max_duty = 0.0;
    m.min_duty = 100.0;
    for (std::size_t k = duty_from; k < n; ++k) {
        m.max_duty = std::max(m.max_duty, trace[k].duty_pct);
        m.min_duty = std::min(m.min_duty, trace[k].duty_pct);
    }

    const auto sse_from = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(n)));
    double err_sum = 0.0;
    double ref_sum = 0.0;
    for (std::size_t k = sse_from; k < n; ++k) {
        err_sum += trace[k].r - trace[k].y;
        ref_sum += trace[k].r;
    }
    m.sse_pct = ref_sum != 0.0 ? std::abs(err_sum / ref_sum) * 100.0 : 0.0;

    const auto osc_from = static_cast<std::size_t>(std::floor(0.6 * static_cast<double>(n)));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    int last_sign = 0;
    for (std::size_t k = osc_from; k < n; ++k) {
        const double e = trace[k].r - trace[k].y;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        const int sign = (e > 0.0) - (e < 0.0);
        if (sign != 0) {
            if (last_sign != 0 && sign != last_sign) {
                ++m.zero_crossings;
            }
            last_sign = sign;
        }
    }
    m.error_p2p = hi - lo;
    m.oscillating = m.zero_crossings >= 6 && m.error_p2p > 0.05 * std::abs(trace.back().r);

    std::size_t change = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (trace[k].r != trace[k - 1].r) {
            change = k;
        }
    }
    const double band = 0.05 * std::abs(trace.back().r);
    std::optional<std::size_t> last_out;
    for (std::size_t k = change; k < n; ++k) {
        if (std::abs(trace[k].r - trace[k].y) > band) {
            last_out = k;
        }
    }
    if (!last_out) {
        m.settling_time = 0.0;
    } else if (*last_out + 1 >= n) {
        m.settling_time = std::numeric_limits<double>::infinity();
    } else {
        m.settling_time = trace[*last_out + 1].t - trace[change].t;
    }
    return m;
}

/// Means of |e2| over consecutive windows of `window` seconds.
inline std::vector<double> residual_envelope(const SimTrace& trace, double window = 1.0) {
    std::vector<double> out;
    if (trace.size() < 2) {
        return out;
    }
    const double dt = trace[1].t - trace[0].t;
    const auto len = static_cast<std::size_t>(std::llround(window / dt));
    if (len == 0) {
        throw std::invalid_argument("residual_envelope: window shorter than a sample");
    }
    for (std::size_t start = 0; start + len <= trace.size(); start += len) {
        double sum = 0.0;
        for (std::size_t k = start; k < start + len; ++k) {
            sum += std::abs(trace[k].e2);
        }
        out.push_back(sum / static_cast<double>(len));
    }
    return out;
}

/**
 * After the loop settles on its final setpoint, every 1 s mean of |e2| stays
 * below `fraction` of the setpoint and never exceeds the first settled window.
 */
inline bool residual_settles(const SimTrace& trace, double fraction = 0.05) {
    const RunMetrics m = compute_metrics(trace);
    if (!std::isfinite(m.settling_time)) {
        return false;
    }
    double change_t = trace.front().t;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k].r != trace[k - 1].r) {
            change_t = trace[k].t;
        }
    }
    const double settled_at = change_t + m.settling_time;
    const double dt = trace[1].t - trace[0].t;
    const std::vector<double> env = residual_envelope(trace);
    const auto len = static_cast<std::size_t>(std::llround(1.0 / dt));
    std::optional<double> first;
    for (std::size_t w = 0; w < env.size(); ++w) {
        if (trace[w * len].t < settled_at) {
            continue;
        }
        if (!first) {
            first = env[w];
        }
        if (env[w] >= fraction * std::abs(trace.back().r) || env[w] > *first) {
            return false;
        }
    }
    return first.has_value();
}

}  // namespace wncs
