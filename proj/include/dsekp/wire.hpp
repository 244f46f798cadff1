#pragma once

// Wire format: every message is a single-line JSON object with a fixed
// key order, binary fields as lowercase hex. Encoding is canonical so a
// byte-identical re-encode is guaranteed, which the replay rules and the
// deterministic traces rely on.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "dsekp/bytes.hpp"
#include "dsekp/crypto.hpp"

namespace dsekp::wire {

// Topic layout. Acks are per-device so a device only sees its own.
inline constexpr const char* kTopicPskData = "psk/data";
inline constexpr const char* kTopicInit = "dsekp/init";
inline constexpr const char* kTopicData = "dsekp/data";
inline constexpr const char* kTopicAckPrefix = "dsekp/init/ack/";

std::string ack_topic(const std::string& dev_id);

// Baseline data packet, published on psk/data.
// Keys: seq, dev_id, ciphertext, iv, tag, sendts_ms.
struct PskDataPacket {
    uint64_t seq = 0;
    std::string dev_id;
    Bytes ciphertext;
    crypto::Iv iv{};
    crypto::Tag tag{};
    uint64_t sendts_ms = 0;

    bool operator==(const PskDataPacket&) const = default;
};

// Session data packet, published on dsekp/data.
// Keys: seq, dev_id, sessctr_id, ciphertext, iv, tag, sendts_ms.
struct DsekpDataPacket {
    uint64_t seq = 0;
    std::string dev_id;
    uint16_t sessctr_id = 0;
    Bytes ciphertext;
    crypto::Iv iv{};
    crypto::Tag tag{};
    uint64_t sendts_ms = 0;

    bool operator==(const DsekpDataPacket&) const = default;
};

// Session-establishment request, published on dsekp/init.
// Keys: dev_id, sess_ctr, t, dev_nonce, init_proof.
struct InitMessage {
    std::string dev_id;
    uint16_t sess_ctr = 0;
    uint32_t t = 0;
    crypto::Nonce dev_nonce{};
    crypto::Proof init_proof{};

    bool operator==(const InitMessage&) const = default;
};

enum class AckStatus { Ok, Rejected };

// Handshake response, published on dsekp/init/ack/{dev_id}.
// Keys: dev_id, sessctr_id, status, and ack_proof only when status is ok.
struct InitAck {
    std::string dev_id;
    uint16_t sessctr_id = 0;
    AckStatus status = AckStatus::Rejected;
    std::optional<crypto::Proof> ack_proof;

    bool operator==(const InitAck&) const = default;
};

using Message = std::variant<PskDataPacket, DsekpDataPacket, InitMessage, InitAck>;

struct DecodeError {
    std::string reason;
};

using DecodeResult = std::variant<Message, DecodeError>;

std::string encode(const PskDataPacket& m);
std::string encode(const DsekpDataPacket& m);
std::string encode(const InitMessage& m);
std::string encode(const InitAck& m);

// Dispatches on topic, then enforces the exact key set, key order
// indifferent on input, field types and hex lengths.
DecodeResult decode(const std::string& topic, const std::string& body);

// Byte string both sides MAC to authenticate a handshake:
// dev_id || 0x00 || BE16(sess_ctr) || BE32(t) || dev_nonce.
// Throws std::invalid_argument when dev_id contains NUL (the separator
// would be ambiguous).
Bytes canonical_init_payload(const std::string& dev_id, uint16_t sess_ctr, uint32_t t,
                             const crypto::Nonce& dev_nonce);

// Ack proofs prepend a direction label so an init proof can never pass
// as an ack proof: HMAC(secret, "ACK" || canonical_init_payload).
Bytes ack_proof_payload(const std::string& dev_id, uint16_t sess_ctr, uint32_t t,
                        const crypto::Nonce& dev_nonce);

}  // namespace dsekp::wire
