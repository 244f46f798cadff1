#pragma once

// Sender-side protocol engine for one device. Pure state machine: the
// caller (the run loop) owns timing and transport, the device only
// builds messages and reacts to acks.
//
//   Idle --begin_session--> AwaitAck --valid ok ack--> Active
//   Active --rotate/reboot--> Idle (then begin_session again)
//
// Message sequence numbers start at 1 and are gapless within a session.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "dsekp/bytes.hpp"
#include "dsekp/crypto.hpp"
#include "dsekp/wire.hpp"

namespace dsekp {

enum class Phase { Idle, AwaitAck, Active };

enum class AckError {
    CtrMismatch,  // ack names a different session counter
    Rejected,     // edge said no
    BadProof,     // proof absent or fails verification
};

const char* to_string(AckError e);
const char* to_string(Phase p);

struct NotActive : std::logic_error {
    using std::logic_error::logic_error;
};

// Everything a live session needs on the device side.
struct DeviceSession {
    crypto::SessionParams params;
    crypto::SessionSecret secret;
    std::array<uint8_t, 4> iv_prefix{};
    uint64_t next_msg_seq = 1;
};

class Device {
  public:
    Device(crypto::DeviceIdentity identity, uint64_t rng_seed);

    // Draws fresh session parameters, derives the secret and returns the
    // init message to publish. Allowed from Idle and from Active (a
    // rotation abandons the old session). Phase becomes AwaitAck.
    wire::InitMessage begin_session(uint64_t now_ms);

    // Re-encode the pending init unchanged (ack timed out, message may
    // have been lost). Only valid in AwaitAck.
    wire::InitMessage current_init() const;

    // Precondition: phase == AwaitAck. Returns nullopt and moves to
    // Active when the ack verifies; otherwise reports why and stays in
    // AwaitAck (the caller decides whether to retry or rotate).
    std::optional<AckError> on_ack(const wire::InitAck& ack);

    // Seal one reading under the session key. Precondition: Active,
    // otherwise throws NotActive. Consumes one sequence number.
    wire::DsekpDataPacket next_data_packet(const std::string& plaintext, uint64_t now_ms);

    // Power-cycle: all session state is lost, phase returns to Idle. The
    // RNG keeps its stream (a real device reseeds from hardware; here
    // continuity keeps runs deterministic).
    void simulate_reboot();

    // --- static-key baseline ------------------------------------------
    void configure_psk(const crypto::AesKey& key);
    wire::PskDataPacket next_psk_packet(const std::string& plaintext, uint64_t now_ms);

    // Synthetic sensor reading, fixed 15-byte shape "T=25.3C,H=45.2%"
    // (temperature 20.0-35.0, humidity 30.0-90.0).
    std::string next_reading();

    Phase phase() const { return phase_; }
    const crypto::DeviceIdentity& identity() const { return identity_; }
    const DeviceSession* session() const {
        return phase_ == Phase::Idle ? nullptr : &session_;
    }

  private:
    crypto::DeviceIdentity identity_;
    std::mt19937_64 rng_;
    Phase phase_ = Phase::Idle;
    DeviceSession session_;
    std::optional<crypto::AesKey> psk_;
    uint64_t psk_seq_ = 1;  // lifetime-monotonic, survives reboots
};

}  // namespace dsekp
