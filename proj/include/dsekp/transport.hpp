#pragma once

// Deterministic in-process pub/sub broker over a virtual clock. All
// randomness (loss, jitter, duplication) comes from one seeded stream,
// so a run is a pure function of its profile and seed.

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "dsekp/bytes.hpp"

namespace dsekp::transport {

struct NetworkModel {
    double base_latency_ms = 0.0;
    double jitter_std_ms = 0.0;  // gaussian std-dev added to base
    double loss_prob = 0.0;      // drop probability per publish
    double dup_prob = 0.0;       // probability a kept publish arrives twice
    uint64_t seed = 0;
};

class VirtualClock {
  public:
    uint64_t now_ms() const { return now_ms_; }

    // Time only moves forward.
    void advance_to(uint64_t t_ms) {
        if (t_ms > now_ms_) now_ms_ = t_ms;
    }

  private:
    uint64_t now_ms_ = 0;
};

// One message copy arriving at the broker. `source` tags who published
// it (honest component or adversary) so outcomes can be attributed.
struct Delivery {
    uint64_t at_ms = 0;
    std::string topic;
    std::string body;
    std::string source;
};

struct TopicStats {
    uint64_t publishes = 0;
    uint64_t deliveries = 0;
    uint64_t drops = 0;
    uint64_t duplicates = 0;
};

class Broker {
  public:
    using Handler = std::function<void(const Delivery&)>;

    Broker(NetworkModel model, VirtualClock& clock);

    // Samples, per publish and in this order: loss, then (if kept) a
    // latency, then duplication, then (if duplicated) a second
    // independent latency. Latency = max(0, base + N(0, jitter)) rounded
    // to whole milliseconds.
    void publish(const std::string& topic, std::string body, std::string source = "");

    // Exact-match pattern, or a single trailing "+" segment that matches
    // any one segment ("a/b/+"). One subscription per pattern; a second
    // subscribe on the same pattern throws std::logic_error.
    void subscribe(const std::string& pattern, Handler handler);

    // Timer callback at an absolute virtual time (>= now).
    void schedule(uint64_t at_ms, std::function<void()> fn);

    // Processes every event with time <= t_end in (time, insertion)
    // order, then advances the clock to t_end.
    void run_until(uint64_t t_end_ms);

    // Drains the queue, refusing to advance past t_limit (guards runs
    // that would never go quiescent, e.g. retry loops under full loss).
    // Returns true when the queue emptied.
    bool run_to_quiescence(uint64_t t_limit_ms);

    // Ordered record of every delivered copy since construction.
    const std::vector<Delivery>& trace() const { return trace_; }

    const std::map<std::string, TopicStats>& topic_stats() const { return stats_; }

    // Per-topic conservation: publishes + duplicates == deliveries +
    // drops once the queue is empty. Throws std::logic_error otherwise.
    void check_conservation() const;

    VirtualClock& clock() { return clock_; }

  private:
    struct Event {
        uint64_t at_ms;
        uint64_t order;  // insertion counter; FIFO among equal times
        std::function<void()> action;
    };
    struct EventLater {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at_ms != b.at_ms) return a.at_ms > b.at_ms;
            return a.order > b.order;
        }
    };

    uint64_t sample_latency_ms();
    void push_event(uint64_t at_ms, std::function<void()> action);
    void deliver(const Delivery& d);
    bool pending() const { return !events_.empty(); }
    uint64_t next_event_time() const { return events_.top().at_ms; }
    void pop_and_run();

    NetworkModel model_;
    VirtualClock& clock_;
    std::mt19937_64 rng_;
    uint64_t next_order_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventLater> events_;
    std::vector<std::pair<std::string, Handler>> subscriptions_;
    std::vector<Delivery> trace_;
    std::map<std::string, TopicStats> stats_;
};

}  // namespace dsekp::transport
