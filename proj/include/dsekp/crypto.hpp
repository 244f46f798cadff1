#pragma once

// Session-key derivation and packet protection.
//
// Key schedule: a device and the edge share a long-lived DEV_SECRET and
// EDGE_SALT. Each session mixes a fresh 12-byte nonce, a 16-bit session
// counter and a 32-bit unix timestamp into
//
//   IKM  = DEV_SECRET || DevNonce || BE16(SessCtr) || BE32(T)
//   SessionSecret = HKDF-SHA256(salt = EDGE_SALT, ikm = IKM, info = "", L = 32)
//
// The first 16 bytes of the session secret key AES-128-GCM for data
// packets; the full 32 bytes key the HMAC proofs that authenticate the
// handshake.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "dsekp/bytes.hpp"

namespace dsekp::crypto {

constexpr size_t kNonceLen = 12;
constexpr size_t kIvLen = 12;
constexpr size_t kTagLen = 16;
constexpr size_t kAesKeyLen = 16;
constexpr size_t kSecretLen = 32;
constexpr size_t kMinSecretLen = 16;

using Nonce = std::array<uint8_t, kNonceLen>;
using Iv = std::array<uint8_t, kIvLen>;
using Tag = std::array<uint8_t, kTagLen>;
using AesKey = std::array<uint8_t, kAesKeyLen>;
using Proof = std::array<uint8_t, kSecretLen>;

// Long-lived provisioning material for one device. dev_id doubles as a
// topic segment and an AAD component, so it may not contain '/', '#',
// '+', NUL or whitespace and may not be empty.
struct DeviceIdentity {
    std::string dev_id;
    Bytes dev_secret;  // >= 16 bytes
    Bytes edge_salt;   // >= 16 bytes

    // Throws std::invalid_argument when a field is out of contract.
    void validate() const;
};

// Per-session public parameters. These travel in the clear inside the
// init message; secrecy rests entirely on dev_secret.
struct SessionParams {
    Nonce dev_nonce{};
    uint16_t sess_ctr = 0;
    uint32_t timestamp_t = 0;  // unix seconds at session start
};

struct SessionSecret {
    std::array<uint8_t, kSecretLen> bytes{};

    AesKey aes_key() const {
        AesKey k;
        std::copy_n(bytes.begin(), kAesKeyLen, k.begin());
        return k;
    }
};

struct AeadEnvelope {
    Iv iv{};
    Bytes ciphertext;
    Tag tag{};
};

std::array<uint8_t, 32> hmac_sha256(BytesView key, BytesView data);

// RFC 5869 extract-and-expand. Length is capped at 255 * 32.
Bytes hkdf_sha256(BytesView salt, BytesView ikm, BytesView info, size_t length);

Bytes build_ikm(const DeviceIdentity& id, const SessionParams& params);

SessionSecret derive_session_secret(const DeviceIdentity& id, const SessionParams& params);

Proof compute_hmac_proof(const SessionSecret& secret, BytesView payload);

AeadEnvelope aead_seal(const AesKey& key, const Iv& iv, BytesView aad, BytesView plaintext);

// Empty optional on tag mismatch (or any decrypt failure).
std::optional<Bytes> aead_open(const AesKey& key, const AeadEnvelope& env, BytesView aad);

// Data-packet IV: 4-byte per-session random prefix followed by the
// 64-bit message sequence, so IVs never repeat within a session.
Iv make_iv(const std::array<uint8_t, 4>& session_prefix, uint64_t msg_seq);

// AAD binds a data packet to its device, session and sequence:
// dev_id || 0x00 || BE16(sess_ctr) || BE64(msg_seq). The static-key
// baseline uses sess_ctr = 0.
Bytes data_aad(const std::string& dev_id, uint16_t sess_ctr, uint64_t msg_seq);

}  // namespace dsekp::crypto
