#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "wncs/netsim.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using wncs::ChannelConfig;
using wncs::DelayChannel;
using wncs::Direction;
using wncs::Millis;

namespace {

ChannelConfig symmetric(long lo, long hi, std::uint64_t seed) {
    return ChannelConfig::per_direction({Millis{lo}, Millis{hi}}, {Millis{lo}, Millis{hi}}, seed);
}

}  // namespace

TEST_CASE("zero delay delivers at the send instant", "[netsim]") {
    DelayChannel ch(symmetric(0, 0, 1));
    const wncs::TimedMessage m = ch.channel_send(Direction::Forward, 3.0, Millis{40});
    CHECK(m.delivery == Millis{40});
    const auto due = ch.poll_deliveries(Direction::Forward, Millis{40});
    REQUIRE(due.size() == 1);
    CHECK(due[0].payload == 3.0);
}

TEST_CASE("uniform delays stay within bounds with the right mean", "[netsim]") {
    DelayChannel ch(symmetric(30, 130, 42));
    double sum = 0.0;
    long lo = 1000;
    long hi = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        const auto m = ch.channel_send(Direction::Forward, 0.0, Millis{0});
        const long d = (m.delivery - m.sent).count();
        sum += static_cast<double>(d);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    CHECK(lo >= 30);
    CHECK(hi <= 130);
    CHECK_THAT(sum / n, WithinRel(80.0, 0.02));
}

TEST_CASE("same seed gives the same delays", "[netsim]") {
    DelayChannel a(symmetric(0, 500, 9));
    DelayChannel b(symmetric(0, 500, 9));
    for (int k = 0; k < 1000; ++k) {
        const Millis now{k};
        const Direction dir = k % 3 == 0 ? Direction::Backward : Direction::Forward;
        CHECK(a.channel_send(dir, 0.0, now).delivery == b.channel_send(dir, 0.0, now).delivery);
    }
}

TEST_CASE("polling returns due messages by delivery time then sequence", "[netsim]") {
    DelayChannel empty(symmetric(0, 0, 1));
    CHECK(empty.poll_deliveries(Direction::Backward, Millis{100}).empty());

    DelayChannel ch(symmetric(0, 0, 1));
    ch.channel_send_after(Direction::Backward, 1.0, Millis{0}, Millis{30});
    ch.channel_send_after(Direction::Backward, 2.0, Millis{10}, Millis{20});
    ch.channel_send_after(Direction::Backward, 3.0, Millis{20}, Millis{5});
    ch.channel_send_after(Direction::Backward, 4.0, Millis{20}, Millis{50});
    const auto due = ch.poll_deliveries(Direction::Backward, Millis{30});
    REQUIRE(due.size() == 3);
    CHECK(due[0].payload == 3.0);  // delivered at 25
    CHECK(due[1].payload == 1.0);  // 30, sequence 0
    CHECK(due[2].payload == 2.0);  // 30, sequence 1
    CHECK(ch.in_flight() == 1);
    CHECK(ch.poll_deliveries(Direction::Forward, Millis{100}).empty());
    CHECK(ch.poll_deliveries(Direction::Backward, Millis{69}).empty());
    CHECK(ch.poll_deliveries(Direction::Backward, Millis{70}).size() == 1);
}

TEST_CASE("no message arrives early, reordering happens, nothing is lost", "[netsim]") {
    DelayChannel ch(symmetric(30, 130, 5));
    const int n = 10000;
    std::vector<wncs::TimedMessage> delivered;
    for (int k = 0; k < n; ++k) {
        const Millis now{20 * k};
        ch.channel_send(Direction::Forward, static_cast<double>(k), now);
        for (const auto& m : ch.poll_deliveries(Direction::Forward, now)) {
            CHECK(m.delivery <= now);
            CHECK(now - m.sent >= Millis{30});
            delivered.push_back(m);
        }
    }
    for (const auto& m : ch.poll_deliveries(Direction::Forward, Millis{20 * n + 1000})) {
        delivered.push_back(m);
    }
    CHECK(delivered.size() == static_cast<std::size_t>(n));
    std::set<std::uint64_t> seqs;
    int inversions = 0;
    for (std::size_t k = 0; k < delivered.size(); ++k) {
        seqs.insert(delivered[k].sequence);
        if (k > 0 && delivered[k].sequence < delivered[k - 1].sequence) {
            ++inversions;
        }
    }
    CHECK(seqs.size() == static_cast<std::size_t>(n));
    CHECK(inversions >= 1);
    CHECK(ch.in_flight() == 0);
}

TEST_CASE("round-trip split keeps the total in bounds", "[netsim]") {
    DelayChannel ch(ChannelConfig::split_round_trip({Millis{370}, Millis{636}}, 77));
    for (int k = 0; k < 5000; ++k) {
        const auto m = ch.channel_send(Direction::Forward, 0.0, Millis{k});
        REQUIRE(m.return_delay.has_value());
        const Millis fwd = m.delivery - m.sent;
        const Millis total = fwd + *m.return_delay;
        CHECK(total >= Millis{370});
        CHECK(total <= Millis{636});
        const double fraction = static_cast<double>(fwd.count()) / static_cast<double>(total.count());
        CHECK(fraction >= 0.3 - 1.0 / 370.0);
        CHECK(fraction <= 0.7 + 1.0 / 370.0);
    }
}

TEST_CASE("channel configuration checks", "[netsim]") {
    CHECK_THROWS_AS(DelayChannel(symmetric(50, 10, 1)), std::invalid_argument);
    CHECK_THROWS_AS(DelayChannel(symmetric(-1, 10, 1)), std::invalid_argument);
    DelayChannel ch(symmetric(0, 0, 1));
    CHECK_THROWS_AS(ch.channel_send(Direction::Forward, 0.0, Millis{-1}), std::invalid_argument);
    CHECK_THROWS_AS(ch.attach_echo({}), std::logic_error);
}

TEST_CASE("simulation clock", "[netsim]") {
    wncs::SimClock clock;
    CHECK(clock.at_control_sample());
    for (int k = 0; k < 19; ++k) {
        clock.tick();
        CHECK_FALSE(clock.at_control_sample());
    }
    clock.tick();
    CHECK(clock.now() == Millis{20});
    CHECK(clock.at_control_sample());
    CHECK_THROWS_AS(wncs::SimClock(Millis{20}, Millis{3}), std::invalid_argument);
}

TEST_CASE("fine-step motor", "[netsim]") {
    {
        wncs::Plant p = wncs::Plant::fine_motor();
        for (int k = 0; k < 100; ++k) {
            CHECK(wncs::plant_tick(p, 0.0) == 0.0);
        }
    }
    {
        wncs::Plant p = wncs::Plant::fine_motor();
        double y = 0.0;
        for (int k = 0; k < 10000; ++k) {
            y = wncs::plant_tick(p, 1.0);
        }
        CHECK_THAT(y, WithinRel(4.159 / 3.888, 1e-9));
    }
    {
        wncs::Plant p = wncs::Plant::fine_motor();
        const double final = 4.159 / 3.888;
        int crossing = -1;
        for (int k = 1; k <= 1000 && crossing < 0; ++k) {
            if (wncs::plant_tick(p, 1.0) >= (1.0 - std::exp(-1.0)) * final) {
                crossing = k;
            }
        }
        CHECK(std::abs(crossing * 1e-3 - 1.0 / 3.888) <= 1e-3);
    }
}
