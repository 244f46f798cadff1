#include "dsekp/transport.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dsekp::transport {

namespace {

// Segment-wise topic match; "+" matches exactly one segment.
bool topic_matches(const std::string& pattern, const std::string& topic) {
    size_t p = 0, t = 0;
    while (true) {
        size_t pe = pattern.find('/', p);
        size_t te = topic.find('/', t);
        std::string_view pseg(pattern.data() + p,
                              (pe == std::string::npos ? pattern.size() : pe) - p);
        std::string_view tseg(topic.data() + t,
                              (te == std::string::npos ? topic.size() : te) - t);
        if (pseg != "+" && pseg != tseg) return false;
        if (tseg.empty()) return false;  // "+" never matches an empty segment
        if (pe == std::string::npos || te == std::string::npos)
            return pe == std::string::npos && te == std::string::npos;
        p = pe + 1;
        t = te + 1;
    }
}

}  // namespace

Broker::Broker(NetworkModel model, VirtualClock& clock)
    : model_(model), clock_(clock), rng_(model.seed) {}

// Uniform in [0,1) built directly from generator bits so the stream does
// not depend on the standard library's distribution internals. The same
// goes for the Box-Muller transform below; reruns of one profile must be
// byte-identical.
static double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint64_t Broker::sample_latency_ms() {
    double latency = model_.base_latency_ms;
    if (model_.jitter_std_ms > 0.0) {
        double u1 = uniform01(rng_);
        double u2 = uniform01(rng_);
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
        latency += model_.jitter_std_ms * z;
    }
    if (latency < 0.0) latency = 0.0;
    return static_cast<uint64_t>(std::llround(latency));
}

void Broker::push_event(uint64_t at_ms, std::function<void()> action) {
    events_.push(Event{at_ms, next_order_++, std::move(action)});
}

void Broker::publish(const std::string& topic, std::string body, std::string source) {
    TopicStats& st = stats_[topic];
    st.publishes++;

    if (uniform01(rng_) < model_.loss_prob) {
        st.drops++;
        return;
    }

    uint64_t now = clock_.now_ms();
    uint64_t first_at = now + sample_latency_ms();
    bool duplicated = uniform01(rng_) < model_.dup_prob;

    Delivery first{first_at, topic, body, source};
    push_event(first_at, [this, d = std::move(first)] { deliver(d); });

    if (duplicated) {
        st.duplicates++;
        uint64_t second_at = now + sample_latency_ms();
        Delivery second{second_at, topic, std::move(body), std::move(source)};
        push_event(second_at, [this, d = std::move(second)] { deliver(d); });
    }
}

void Broker::subscribe(const std::string& pattern, Handler handler) {
    for (const auto& [existing, _] : subscriptions_)
        if (existing == pattern)
            throw std::logic_error("duplicate subscription: " + pattern);
    subscriptions_.emplace_back(pattern, std::move(handler));
}

void Broker::schedule(uint64_t at_ms, std::function<void()> fn) {
    push_event(std::max(at_ms, clock_.now_ms()), std::move(fn));
}

void Broker::deliver(const Delivery& d) {
    stats_[d.topic].deliveries++;
    trace_.push_back(d);
    for (const auto& [pattern, handler] : subscriptions_)
        if (topic_matches(pattern, d.topic)) handler(d);
}

void Broker::pop_and_run() {
    Event ev = events_.top();
    events_.pop();
    clock_.advance_to(ev.at_ms);
    ev.action();
}

void Broker::run_until(uint64_t t_end_ms) {
    while (pending() && next_event_time() <= t_end_ms) pop_and_run();
    clock_.advance_to(t_end_ms);
}

bool Broker::run_to_quiescence(uint64_t t_limit_ms) {
    while (pending() && next_event_time() <= t_limit_ms) pop_and_run();
    return !pending();
}

void Broker::check_conservation() const {
    if (pending())
        throw std::logic_error("conservation checked while events are still queued");
    for (const auto& [topic, st] : stats_) {
        if (st.publishes + st.duplicates != st.deliveries + st.drops)
            throw std::logic_error("message conservation violated on topic " + topic);
    }
}

}  // namespace dsekp::transport
