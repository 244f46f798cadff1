#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsekp/transport.hpp"

using namespace dsekp;
using transport::Broker;
using transport::Delivery;
using transport::NetworkModel;
using transport::VirtualClock;

TEST_CASE("ideal network delivers in publish order at exact base latency") {
    VirtualClock clock;
    Broker broker(NetworkModel{283.0, 0.0, 0.0, 0.0, 1}, clock);

    std::vector<std::string> seen;
    broker.subscribe("t/a", [&](const Delivery& d) { seen.push_back(d.body); });

    broker.publish("t/a", "first");
    broker.publish("t/a", "second");
    broker.run_until(282);
    CHECK(seen.empty());  // not due yet
    broker.run_until(283);
    CHECK(seen == std::vector<std::string>{"first", "second"});
    CHECK(clock.now_ms() == 283);

    for (const auto& d : broker.trace()) CHECK(d.at_ms == 283);
    broker.check_conservation();
}

TEST_CASE("full loss drops every publish and conservation still balances") {
    VirtualClock clock;
    Broker broker(NetworkModel{10.0, 0.0, 1.0, 0.0, 7}, clock);
    size_t handled = 0;
    broker.subscribe("x", [&](const Delivery&) { handled++; });
    for (int i = 0; i < 1000; ++i) broker.publish("x", "p");
    CHECK(broker.run_to_quiescence(1'000'000));
    CHECK(handled == 0);
    auto st = broker.topic_stats().at("x");
    CHECK(st.publishes == 1000);
    CHECK(st.drops == 1000);
    CHECK(st.deliveries == 0);
    CHECK(st.duplicates == 0);
    broker.check_conservation();
}

TEST_CASE("duplication re-delivers the same bytes and is counted") {
    VirtualClock clock;
    Broker broker(NetworkModel{5.0, 0.0, 0.0, 1.0, 3}, clock);  // every publish doubled
    std::vector<std::string> seen;
    broker.subscribe("d", [&](const Delivery& d) { seen.push_back(d.body); });
    broker.publish("d", "payload");
    CHECK(broker.run_to_quiescence(1000));
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] == seen[1]);
    auto st = broker.topic_stats().at("d");
    CHECK(st.publishes == 1);
    CHECK(st.duplicates == 1);
    CHECK(st.deliveries == 2);
    broker.check_conservation();
}

TEST_CASE("mixed loss and duplication conserve messages per topic") {
    VirtualClock clock;
    Broker broker(NetworkModel{20.0, 4.0, 0.3, 0.2, 11}, clock);
    broker.subscribe("m", [](const Delivery&) {});
    for (int i = 0; i < 5000; ++i) broker.publish("m", "x");
    CHECK(broker.run_to_quiescence(10'000'000));
    auto st = broker.topic_stats().at("m");
    CHECK(st.publishes == 5000);
    CHECK(st.publishes + st.duplicates == st.deliveries + st.drops);
    CHECK(st.drops > 1000);       // ~30 %
    CHECK(st.duplicates > 400);   // ~20 % of kept
    broker.check_conservation();
}

TEST_CASE("same seed and script give a byte-identical trace, jitter included") {
    auto run = [] {
        VirtualClock clock;
        Broker broker(NetworkModel{250.0, 40.0, 0.1, 0.05, 99}, clock);
        broker.subscribe("j", [](const Delivery&) {});
        for (int i = 0; i < 500; ++i) broker.publish("j", "m" + std::to_string(i));
        broker.run_to_quiescence(1'000'000);
        return broker.trace();
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].at_ms == b[i].at_ms);
        CHECK(a[i].body == b[i].body);
        CHECK(a[i].topic == b[i].topic);
    }
}

TEST_CASE("gaussian jitter spreads latencies around the base without going negative") {
    VirtualClock clock;
    Broker broker(NetworkModel{100.0, 30.0, 0.0, 0.0, 21}, clock);
    std::vector<uint64_t> arrivals;
    broker.subscribe("g", [&](const Delivery& d) { arrivals.push_back(d.at_ms); });
    for (int i = 0; i < 4000; ++i) broker.publish("g", "x");
    CHECK(broker.run_to_quiescence(10'000'000));

    double mean = 0.0;
    uint64_t lo = UINT64_MAX, hi = 0;
    for (auto t : arrivals) {
        mean += double(t);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    mean /= double(arrivals.size());
    CHECK(std::fabs(mean - 100.0) < 2.0);  // se ~ 30/sqrt(4000) ~ 0.5
    CHECK(lo < 100);
    CHECK(hi > 100);
}

TEST_CASE("timers and deliveries interleave in time order, fifo on ties") {
    VirtualClock clock;
    Broker broker(NetworkModel{10.0, 0.0, 0.0, 0.0, 1}, clock);
    std::vector<std::string> order;
    broker.subscribe("t", [&](const Delivery& d) { order.push_back("msg:" + d.body); });

    broker.schedule(10, [&] { order.push_back("timer-a"); });
    broker.publish("t", "1");             // arrives at 10, queued after timer-a
    broker.schedule(5, [&] { order.push_back("timer-early"); });
    broker.schedule(10, [&] { order.push_back("timer-b"); });
    broker.run_until(50);

    CHECK(order == std::vector<std::string>{"timer-early", "timer-a", "msg:1", "timer-b"});
}

TEST_CASE("handlers can publish and schedule re-entrantly") {
    VirtualClock clock;
    Broker broker(NetworkModel{1.0, 0.0, 0.0, 0.0, 1}, clock);
    std::vector<uint64_t> times;
    broker.subscribe("ping", [&](const Delivery& d) {
        times.push_back(d.at_ms);
        if (times.size() < 4) broker.publish("ping", d.body);
    });
    broker.publish("ping", "x");
    CHECK(broker.run_to_quiescence(100));
    CHECK(times == std::vector<uint64_t>{1, 2, 3, 4});
}

TEST_CASE("run_to_quiescence refuses to advance past its horizon") {
    VirtualClock clock;
    Broker broker(NetworkModel{0.0, 0.0, 0.0, 0.0, 1}, clock);
    size_t fired = 0;
    std::function<void()> loop = [&] {
        fired++;
        broker.schedule(clock.now_ms() + 1000, loop);
    };
    broker.schedule(0, loop);
    CHECK_FALSE(broker.run_to_quiescence(10'000));  // still events queued
    CHECK(fired == 11);                             // t = 0..10000 inclusive
    CHECK(clock.now_ms() == 10'000);
    CHECK_THROWS_AS(broker.check_conservation(), std::logic_error);
}

TEST_CASE("single-segment wildcard matches one segment only") {
    VirtualClock clock;
    Broker broker(NetworkModel{0.0, 0.0, 0.0, 0.0, 1}, clock);
    std::vector<std::string> acks;
    broker.subscribe("dsekp/init/ack/+",
                     [&](const Delivery& d) { acks.push_back(d.topic); });

    broker.publish("dsekp/init/ack/esp32-01", "a");
    broker.publish("dsekp/init/ack/esp32-02", "b");
    broker.publish("dsekp/init/ack", "too-short");
    broker.publish("dsekp/init/ack/esp32-01/extra", "too-deep");
    broker.run_until(10);

    CHECK(acks == std::vector<std::string>{"dsekp/init/ack/esp32-01",
                                           "dsekp/init/ack/esp32-02"});
}

TEST_CASE("duplicate subscription patterns are refused") {
    VirtualClock clock;
    Broker broker(NetworkModel{}, clock);
    broker.subscribe("a/b", [](const Delivery&) {});
    CHECK_THROWS_AS(broker.subscribe("a/b", [](const Delivery&) {}), std::logic_error);
}

TEST_CASE("clock never runs backwards") {
    VirtualClock clock;
    clock.advance_to(100);
    clock.advance_to(50);
    CHECK(clock.now_ms() == 100);
}
