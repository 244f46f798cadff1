#pragma once

// Attacker-on-the-broker harness. The adversary sees every delivered
// message (the broker trace), can record them and can publish arbitrary
// bytes to any topic, but holds no key material. Each scenario builds
// `count` injections from a captured archive; outcomes are attributed
// through the delivery source tag and tallied by the run loop.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dsekp/transport.hpp"
#include "dsekp/wire.hpp"

namespace dsekp::adversary {

enum class AttackKind {
    ReplayData,          // re-publish captured data bodies verbatim
    ReplayInit,          // re-publish captured handshakes verbatim
    TamperBitflip,       // fresh sequence, one bit flipped in iv/ct/tag
    ForgeInit,           // handshake for a known dev_id with a random proof
    CrossSessionSplice,  // old ciphertext relabeled with the newest session ctr
};

std::optional<AttackKind> parse_attack_kind(const std::string& name);
const char* to_string(AttackKind k);

struct AttackScenario {
    AttackKind kind = AttackKind::ReplayData;
    uint32_t count = 0;
};

struct AttackReport {
    std::string scenario;
    uint64_t injected = 0;
    uint64_t accepted = 0;
    uint64_t accepted_duplicates = 0;            // psk rows flagged as repeats
    std::map<std::string, uint64_t> rejected;    // reason -> count
    std::string to_json() const;                 // single line
};

// The source tag adversary publishes carry.
inline constexpr const char* kSource = "adversary";

class Adversary {
  public:
    Adversary(AttackScenario scenario, uint64_t seed);

    // Classifies the archive (captured deliveries so far). Throws
    // std::runtime_error when the archive lacks the material the
    // scenario needs.
    void study(const std::vector<transport::Delivery>& archive);

    // Builds injection i. `now_ms` feeds fresh timestamps for forged
    // handshakes. Call in order: draws from the adversary RNG.
    std::pair<std::string, std::string> forge(size_t i, uint64_t now_ms);

    // Schedules all `count` injections on the broker, spaced from
    // start_ms, each published with the adversary source tag.
    void arm(transport::Broker& broker, uint64_t start_ms, uint64_t spacing_ms,
             AttackReport& report);

    const AttackScenario& scenario() const { return scenario_; }

  private:
    AttackScenario scenario_;
    std::mt19937_64 rng_;

    // Classified capture material.
    struct CapturedData {
        std::string topic;
        wire::Message decoded;
        std::string body;
    };
    std::vector<CapturedData> data_pool_;    // payload traffic
    std::vector<std::string> init_pool_;     // handshake bodies
    std::vector<std::string> dev_ids_;       // identities seen on the wire
    std::map<std::string, uint16_t> latest_ctr_;  // per device
    std::vector<CapturedData> splice_pool_;  // data from non-latest sessions
};

}  // namespace dsekp::adversary
