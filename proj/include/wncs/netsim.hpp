#pragma once

// Discrete-event emulation of the intermediate (bridge) node: every message
// crossing it is held for a random number of milliseconds. Plus the
// fine-step "true" plant driven by whatever command last arrived.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "wncs/lti.hpp"
#include "wncs/predictor.hpp"

namespace wncs {

enum class Direction { Forward, Backward };  // controller->plant, plant->controller

enum class DelayDistribution { Uniform };

struct DelayBounds {
    Millis lo{0};
    Millis hi{0};
};

/**
 * Per-direction delay bounds, or (when round_trip is set) a round-trip bound
 * [lo, hi] split per command as forward = fraction * t_d, backward = the rest,
 * with fraction ~ U[split_lo, split_hi].
 */
struct ChannelConfig {
    DelayBounds forward{};
    DelayBounds backward{};
    std::optional<DelayBounds> round_trip;
    double split_lo = 0.3;
    double split_hi = 0.7;
    std::uint64_t seed = 1;
    DelayDistribution distribution = DelayDistribution::Uniform;

    static ChannelConfig per_direction(DelayBounds fwd, DelayBounds bwd, std::uint64_t seed) {
        ChannelConfig cfg;
        cfg.forward = fwd;
        cfg.backward = bwd;
        cfg.seed = seed;
        return cfg;
    }

    static ChannelConfig split_round_trip(DelayBounds rtt, std::uint64_t seed) {
        ChannelConfig cfg;
        cfg.round_trip = rtt;
        cfg.seed = seed;
        return cfg;
    }

    void validate() const {
        auto check = [](const DelayBounds& b) {
            if (b.lo < Millis{0} || b.hi < b.lo) {
                throw std::invalid_argument("delay bounds must satisfy 0 <= lo <= hi");
            }
        };
        check(forward);
        check(backward);
        if (round_trip) {
            check(*round_trip);
        }
        if (!(split_lo >= 0.0 && split_lo <= split_hi && split_hi <= 1.0)) {
            throw std::invalid_argument("round-trip split fractions must satisfy 0 <= lo <= hi <= 1");
        }
    }
};

/// Identifies the command a feedback sample answers.
struct Echo {
    std::uint64_t sequence = 0;
    Millis sent{0};
    Millis forward_delay{0};
};

struct TimedMessage {
    double payload = 0.0;
    std::uint64_t sequence = 0;
    Millis sent{0};
    Millis delivery{0};
    Direction direction = Direction::Forward;
    std::optional<Millis> return_delay;  // round-trip mode: backward share reserved for replies
    std::optional<Echo> echo;            // feedback only
};

class DelayChannel {
public:
    explicit DelayChannel(ChannelConfig cfg) : cfg_(cfg), rng_(cfg.seed) { cfg_.validate(); }

    const ChannelConfig& config() const { return cfg_; }

    /// Draws the direction's delay and enqueues the message.
    TimedMessage channel_send(Direction dir, double payload, Millis now) {
        if (now < Millis{0}) {
            throw std::invalid_argument("channel_send: negative timestamp");
        }
        std::optional<Millis> return_delay;
        Millis delay{0};
        if (cfg_.round_trip) {
            const Millis total = draw(*cfg_.round_trip);
            const double fraction = std::uniform_real_distribution<double>(cfg_.split_lo, cfg_.split_hi)(rng_);
            const Millis fwd{std::llround(fraction * static_cast<double>(total.count()))};
            delay = dir == Direction::Forward ? fwd : total - fwd;
            return_delay = total - fwd;
        } else {
            delay = draw(dir == Direction::Forward ? cfg_.forward : cfg_.backward);
        }
        TimedMessage msg = enqueue(dir, payload, now, delay);
        if (dir == Direction::Forward) {
            msg.return_delay = return_delay;
            queue_.back().return_delay = return_delay;
        }
        return msg;
    }

    /// Enqueues with an explicit delay (the reserved backward share of a round trip).
    TimedMessage channel_send_after(Direction dir, double payload, Millis now, Millis delay) {
        if (now < Millis{0} || delay < Millis{0}) {
            throw std::invalid_argument("channel_send_after: negative time");
        }
        return enqueue(dir, payload, now, delay);
    }

    /// Attaches an echo to the most recently enqueued message.
    void attach_echo(const Echo& echo) {
        if (queue_.empty()) {
            throw std::logic_error("attach_echo: nothing queued");
        }
        queue_.back().echo = echo;
    }

    /// Removes and returns all messages of `dir` due by `now`, by delivery time then sequence.
    std::vector<TimedMessage> poll_deliveries(Direction dir, Millis now) {
        std::vector<TimedMessage> due;
        auto keep = queue_.begin();
        for (auto it = queue_.begin(); it != queue_.end(); ++it) {
            if (it->direction == dir && it->delivery <= now) {
                due.push_back(std::move(*it));
            } else {
                *keep++ = std::move(*it);
            }
        }
        queue_.erase(keep, queue_.end());
        std::sort(due.begin(), due.end(), [](const TimedMessage& a, const TimedMessage& b) {
            return std::tie(a.delivery, a.sequence) < std::tie(b.delivery, b.sequence);
        });
        return due;
    }

    std::size_t in_flight() const { return queue_.size(); }

    std::uint64_t sent_count(Direction dir) const { return dir == Direction::Forward ? next_fwd_ : next_bwd_; }

private:
    Millis draw(const DelayBounds& b) {
        std::uniform_int_distribution<std::int64_t> dist(b.lo.count(), b.hi.count());
        return Millis{dist(rng_)};
    }

    TimedMessage enqueue(Direction dir, double payload, Millis now, Millis delay) {
        std::uint64_t& seq = dir == Direction::Forward ? next_fwd_ : next_bwd_;
        TimedMessage msg{payload, seq++, now, now + delay, dir, std::nullopt, std::nullopt};
        queue_.push_back(msg);
        return msg;
    }

    ChannelConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<TimedMessage> queue_;
    std::uint64_t next_fwd_ = 0;
    std::uint64_t next_bwd_ = 0;
};

/// Integer-millisecond clock shared by both nodes.
class SimClock {
public:
    SimClock(Millis control_period = Millis{20}, Millis plant_step = Millis{1})
        : period_(control_period), step_(plant_step) {
        if (step_ <= Millis{0} || period_ <= Millis{0} || period_ % step_ != Millis{0}) {
            throw std::invalid_argument("control period must be a positive multiple of the plant step");
        }
    }

    Millis now() const { return now_; }
    Millis control_period() const { return period_; }
    Millis plant_step() const { return step_; }
    bool at_control_sample() const { return now_ % period_ == Millis{0}; }
    void tick() { now_ += step_; }

private:
    Millis period_;
    Millis step_;
    Millis now_{0};
};

/// DC motor model 4.159/(s + 3.888), drive code in, speed out.
inline RationalTF motor_model() { return RationalTF::continuous({4.159}, {1.0, 3.888}); }

/**
 * A strictly proper discrete plant advanced every `step`. speed() is the
 * output at the current instant; tick() applies `input` over the next step.
 */
class Plant {
public:
    Plant(RationalTF discrete_model, Millis step) : model_(std::move(discrete_model)), state_(model_), step_(step) {
        if (!model_.is_discrete() || !model_.strictly_proper()) {
            throw std::invalid_argument("plant model must be discrete and strictly proper");
        }
    }

    /// Zero-order-hold equivalent of the motor at the given fine step.
    static Plant fine_motor(Millis dt = Millis{1}) {
        return Plant(discretize_zoh(motor_model(), std::chrono::duration_cast<Seconds>(dt).count()), dt);
    }

    double speed() const { return tf_free_response(model_, state_); }
    Millis step() const { return step_; }
    const RationalTF& model() const { return model_; }

    double tick(double input) {
        tf_step(model_, state_, input);
        return speed();
    }

private:
    RationalTF model_;
    DifferenceEqState state_;
    Millis step_;
};

/// Advances the plant one step under `input`; returns the new speed.
inline double plant_tick(Plant& plant, double input) { return plant.tick(input); }

}  // namespace wncs
