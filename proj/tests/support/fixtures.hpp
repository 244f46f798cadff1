#pragma once

// Hand-built protocol fixtures shared by the test suites: a provisioned
// identity plus honestly-formed handshakes and data packets with
// caller-chosen parameters, so acceptance and rejection cases are exact.

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dsekp/crypto.hpp"
#include "dsekp/wire.hpp"

namespace fixtures {

inline dsekp::Bytes unhex(std::string_view h) {
    dsekp::Bytes out;
    if (!dsekp::from_hex(h, out)) throw std::runtime_error("fixture hex is malformed");
    return out;
}

inline dsekp::crypto::DeviceIdentity test_identity(const std::string& id = "esp32-01") {
    dsekp::crypto::DeviceIdentity ident;
    ident.dev_id = id;
    ident.dev_secret = unhex("000102030405060708090a0b0c0d0e0f10111213");
    ident.edge_salt = unhex("aabbccddeeff00112233445566778899");
    return ident;
}

inline dsekp::wire::InitMessage make_init(const dsekp::crypto::DeviceIdentity& ident,
                                          uint16_t ctr, uint32_t t,
                                          uint8_t nonce_fill = 0x44) {
    dsekp::wire::InitMessage m;
    m.dev_id = ident.dev_id;
    m.sess_ctr = ctr;
    m.t = t;
    m.dev_nonce.fill(nonce_fill);
    auto secret = dsekp::crypto::derive_session_secret(ident, {m.dev_nonce, ctr, t});
    m.init_proof = dsekp::crypto::compute_hmac_proof(
        secret, dsekp::wire::canonical_init_payload(m.dev_id, ctr, t, m.dev_nonce));
    return m;
}

inline dsekp::wire::DsekpDataPacket seal_packet(const dsekp::crypto::DeviceIdentity& ident,
                                                const dsekp::crypto::SessionParams& params,
                                                uint64_t seq, const std::string& plain,
                                                uint64_t send_ms) {
    auto secret = dsekp::crypto::derive_session_secret(ident, params);
    std::array<uint8_t, 4> prefix{0xde, 0xad, 0xbe, 0xef};
    auto iv = dsekp::crypto::make_iv(prefix, seq);
    auto env = dsekp::crypto::aead_seal(
        secret.aes_key(), iv, dsekp::crypto::data_aad(ident.dev_id, params.sess_ctr, seq),
        dsekp::to_bytes(plain));
    dsekp::wire::DsekpDataPacket pkt;
    pkt.seq = seq;
    pkt.dev_id = ident.dev_id;
    pkt.sessctr_id = params.sess_ctr;
    pkt.ciphertext = env.ciphertext;
    pkt.iv = env.iv;
    pkt.tag = env.tag;
    pkt.sendts_ms = send_ms;
    return pkt;
}

inline dsekp::wire::PskDataPacket seal_psk_packet(const dsekp::crypto::AesKey& key,
                                                  const std::string& dev_id, uint64_t seq,
                                                  const std::string& plain, uint64_t send_ms) {
    dsekp::crypto::Iv iv{};
    iv[3] = static_cast<uint8_t>(seq >> 8);
    iv[11] = static_cast<uint8_t>(seq);
    auto env = dsekp::crypto::aead_seal(key, iv, dsekp::crypto::data_aad(dev_id, 0, seq),
                                        dsekp::to_bytes(plain));
    dsekp::wire::PskDataPacket pkt;
    pkt.seq = seq;
    pkt.dev_id = dev_id;
    pkt.ciphertext = env.ciphertext;
    pkt.iv = env.iv;
    pkt.tag = env.tag;
    pkt.sendts_ms = send_ms;
    return pkt;
}

}  // namespace fixtures
