#pragma once

// Experiment orchestration: provisions identities, wires devices and the
// edge to the broker, drives the send schedule, and collects artifacts
// (logs, trace, summary). A run is a pure function of its profile.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsekp/adversary.hpp"
#include "dsekp/metrics.hpp"
#include "dsekp/transport.hpp"

namespace dsekp::runner {

enum class Mode { Psk, Dsekp };

std::optional<Mode> parse_mode(const std::string& name);
const char* to_string(Mode m);

struct RunProfile {
    Mode mode = Mode::Dsekp;
    uint32_t packets = 100;  // data packets per device
    uint32_t interval_ms = 2000;
    uint32_t devices = 1;
    double latency_base_ms = 0.0;
    double latency_jitter_ms = 0.0;
    double loss = 0.0;
    double dup = 0.0;
    std::optional<uint32_t> reboot_every;  // power-cycle after every k packets
    uint64_t seed = 1;
    uint32_t ack_timeout_ms = 5000;
    uint32_t max_init_retries = 3;    // resends before drawing fresh parameters
    uint64_t session_timeout_s = 3600;  // idle rotation; off when reboot_every set

    // Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

struct RunCounters {
    uint64_t data_sent = 0;
    uint64_t accepted_unique = 0;
    uint64_t accepted_duplicates = 0;  // psk repeats that still decrypt
    uint64_t inits_sent = 0;           // includes resends
    uint64_t acks_ok = 0;
    std::map<std::string, uint64_t> rejections;  // honest traffic only
};

struct RunArtifacts {
    std::vector<metrics::ClientLogRecord> client;
    std::vector<metrics::ServerLogRecord> server;
    RunCounters counters;
    std::vector<transport::Delivery> trace;
    std::map<std::string, transport::TopicStats> topic_stats;
    std::string sessions_json;
    uint64_t finished_at_ms = 0;
    bool quiescent = true;  // false when the safety horizon cut the run
};

RunArtifacts run_experiment(const RunProfile& profile);

struct AttackOutcome {
    adversary::AttackReport report;
    RunArtifacts honest;
};

// Runs the profile honestly until its midpoint, lets the adversary
// record everything delivered so far, then interleaves the injections
// with the remaining honest traffic.
AttackOutcome run_attack(const RunProfile& profile, const adversary::AttackScenario& scenario);

std::string summary_json(const RunProfile& profile, const RunArtifacts& art);

// Writes client_logs.csv, server_logs.csv, summary.json, trace.jsonl and
// sessions.json under out_dir (created if missing).
void write_artifacts(const std::filesystem::path& out_dir, const RunProfile& profile,
                     const RunArtifacts& art);

}  // namespace dsekp::runner
