#pragma once

// Round-trip-time bookkeeping and online delay estimation at the controller.
//
//   t_m = (t2pr - t1pr) + sum_{i=2..v_s} t_pa[i]
//
// t_pa[1] is the present difference t2pr - t1pr itself; t_pa[2], t_pa[3], ...
// are earlier differences, most recent first. v_s counts the vacant samples
// that preceded the present receipt.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <tuple>

#include "wncs/predictor.hpp"

namespace wncs {

enum class DelayRule { Normal, Vacant, Rejection, Delayed };

constexpr std::string_view to_string(DelayRule rule) {
    switch (rule) {
        case DelayRule::Normal: return "normal";
        case DelayRule::Vacant: return "vacant";
        case DelayRule::Rejection: return "rejection";
        case DelayRule::Delayed: return "delayed";
    }
    return "?";
}

/// A feedback sample as seen by the controller.
struct Feedback {
    std::uint64_t sequence = 0;
    Millis echo_sent{0};  // send stamp of the command the plant had applied
    Millis received{0};
    double payload = 0.0;
};

struct EstimatorState {
    Millis t1pr{0};
    Millis t2pr{0};
    std::deque<Millis> past;  // earlier differences, most recent first
    int vacant = 0;
    Millis last_tm{0};
    std::optional<Millis> last_td;
    bool sent = false;
    bool paired = false;          // a receive matches the present send
    bool seen_nonzero = false;    // leading zero payloads count as vacancies
};

class DelayEstimator {
public:
    static constexpr std::size_t kPastDepth = 8;

    explicit DelayEstimator(Millis period = Millis{20}, Millis initial_tm = Millis{0}) : period_(period) {
        if (period_ <= Millis{0}) {
            throw std::invalid_argument("DelayEstimator: period must be positive");
        }
        if (initial_tm < Millis{0}) {
            throw std::invalid_argument("DelayEstimator: initial delay must be non-negative");
        }
        state_.last_tm = initial_tm;
    }

    const EstimatorState& state() const { return state_; }
    Millis t_m() const { return state_.last_tm; }
    std::optional<Millis> last_td() const { return state_.last_td; }
    const std::optional<Feedback>& accepted() const { return accepted_; }

    /// Registers a send stamp; the previous pair's difference joins the past queue.
    void on_send(Millis timestamp) {
        if (timestamp < Millis{0}) {
            throw std::invalid_argument("on_send: negative timestamp");
        }
        if (state_.sent && timestamp < state_.t1pr) {
            throw std::invalid_argument("on_send: send timestamps must be non-decreasing");
        }
        if (state_.paired) {
            state_.past.push_front(state_.t2pr - state_.t1pr);
            if (state_.past.size() > kPastDepth) {
                state_.past.pop_back();
            }
        }
        state_.t1pr = timestamp;
        state_.sent = true;
        state_.paired = false;
    }

    void on_receive(Millis timestamp) {
        if (!state_.sent) {
            throw std::logic_error("on_receive: no send registered");
        }
        if (timestamp < state_.t1pr) {
            throw std::invalid_argument("on_receive: receive precedes its send");
        }
        state_.t2pr = timestamp;
        state_.paired = true;
    }

    void on_vacant() { ++state_.vacant; }

    Millis estimate() const {
        if (!state_.paired) {
            throw std::logic_error("estimate: no receive matches the present send");
        }
        Millis t_m = state_.t2pr - state_.t1pr;
        const auto extra = static_cast<std::size_t>(std::max(state_.vacant - 1, 0));
        const std::size_t n = std::min(extra, state_.past.size());
        for (std::size_t k = 0; k < n; ++k) {
            t_m += state_.past[k];
        }
        return t_m;
    }

    /// Estimate for the present pair; the vacancy count starts over.
    Millis accept() {
        state_.last_tm = estimate();
        state_.vacant = 0;
        return state_.last_tm;
    }

    /**
     * Applies the transmission rules to the feedback that arrived since the
     * previous sample and updates t_m.
     *  - none (or only startup zeros / stale samples): vacant, t_m = last t_d + T
     *  - several: the most recently arrived is kept, the rest discarded
     *  - one: normal if its round trip is below T, delayed otherwise
     * Feedback answering an older command than the present one is discarded.
     */
    DelayRule classify_and_measure(std::span<const Feedback> deliveries, Millis /*now*/) {
        const Feedback* newest = nullptr;
        int usable = 0;
        for (const Feedback& fb : deliveries) {
            if (!state_.seen_nonzero && fb.payload == 0.0) {
                continue;
            }
            if (state_.sent && fb.echo_sent < state_.t1pr) {
                continue;
            }
            ++usable;
            if (newest == nullptr || std::tie(fb.received, fb.sequence) > std::tie(newest->received, newest->sequence)) {
                newest = &fb;
            }
        }
        if (newest == nullptr) {
            on_vacant();
            if (state_.last_td) {
                state_.last_tm = *state_.last_td + period_;
            }
            return DelayRule::Vacant;
        }

        accepted_ = *newest;
        state_.seen_nonzero = true;
        on_send(newest->echo_sent);
        on_receive(newest->received);
        const Millis td = newest->received - newest->echo_sent;
        state_.last_td = td;
        accept();
        if (usable > 1) {
            return DelayRule::Rejection;
        }
        return td < period_ ? DelayRule::Normal : DelayRule::Delayed;
    }

private:
    Millis period_;
    EstimatorState state_;
    std::optional<Feedback> accepted_;
};

}  // namespace wncs
