#include "dsekp/device.hpp"

#include <cstdio>
#include <stdexcept>

namespace dsekp {

namespace {

// One generator call per byte, low octet only; keeps the stream layout
// independent of how many bytes each field needs.
template <typename It>
void fill_random(std::mt19937_64& rng, It begin, It end) {
    for (It it = begin; it != end; ++it)
        *it = static_cast<uint8_t>(rng() & 0xff);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

const char* to_string(AckError e) {
    switch (e) {
        case AckError::CtrMismatch: return "ctr_mismatch";
        case AckError::Rejected: return "rejected";
        case AckError::BadProof: return "bad_proof";
    }
    return "?";
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Idle: return "idle";
        case Phase::AwaitAck: return "await_ack";
        case Phase::Active: return "active";
    }
    return "?";
}

Device::Device(crypto::DeviceIdentity identity, uint64_t rng_seed)
    : identity_(std::move(identity)), rng_(rng_seed) {
    identity_.validate();
}

wire::InitMessage Device::begin_session(uint64_t now_ms) {
    DeviceSession fresh;
    fill_random(rng_, fresh.params.dev_nonce.begin(), fresh.params.dev_nonce.end());
    fresh.params.sess_ctr = static_cast<uint16_t>(rng_() & 0xffff);
    fresh.params.timestamp_t = static_cast<uint32_t>(now_ms / 1000);
    fill_random(rng_, fresh.iv_prefix.begin(), fresh.iv_prefix.end());
    fresh.secret = crypto::derive_session_secret(identity_, fresh.params);
    fresh.next_msg_seq = 1;

    session_ = fresh;
    phase_ = Phase::AwaitAck;
    return current_init();
}

wire::InitMessage Device::current_init() const {
    if (phase_ != Phase::AwaitAck)
        throw std::logic_error("no pending init outside AwaitAck");
    wire::InitMessage m;
    m.dev_id = identity_.dev_id;
    m.sess_ctr = session_.params.sess_ctr;
    m.t = session_.params.timestamp_t;
    m.dev_nonce = session_.params.dev_nonce;
    m.init_proof = crypto::compute_hmac_proof(
        session_.secret,
        wire::canonical_init_payload(m.dev_id, m.sess_ctr, m.t, m.dev_nonce));
    return m;
}

std::optional<AckError> Device::on_ack(const wire::InitAck& ack) {
    if (phase_ != Phase::AwaitAck)
        throw std::logic_error("on_ack outside AwaitAck");
    if (ack.sessctr_id != session_.params.sess_ctr)
        return AckError::CtrMismatch;
    if (ack.status != wire::AckStatus::Ok)
        return AckError::Rejected;
    if (!ack.ack_proof)
        return AckError::BadProof;
    auto expected = crypto::compute_hmac_proof(
        session_.secret,
        wire::ack_proof_payload(identity_.dev_id, session_.params.sess_ctr,
                                session_.params.timestamp_t, session_.params.dev_nonce));
    if (!constant_time_equal(*ack.ack_proof, expected))
        return AckError::BadProof;
    phase_ = Phase::Active;
    return std::nullopt;
}

wire::DsekpDataPacket Device::next_data_packet(const std::string& plaintext, uint64_t now_ms) {
    if (phase_ != Phase::Active)
        throw NotActive("next_data_packet requires an established session");
    const uint64_t seq = session_.next_msg_seq++;
    auto iv = crypto::make_iv(session_.iv_prefix, seq);
    auto aad = crypto::data_aad(identity_.dev_id, session_.params.sess_ctr, seq);
    auto env = crypto::aead_seal(session_.secret.aes_key(), iv, aad, to_bytes(plaintext));

    wire::DsekpDataPacket pkt;
    pkt.seq = seq;
    pkt.dev_id = identity_.dev_id;
    pkt.sessctr_id = session_.params.sess_ctr;
    pkt.ciphertext = std::move(env.ciphertext);
    pkt.iv = env.iv;
    pkt.tag = env.tag;
    pkt.sendts_ms = now_ms;
    return pkt;
}

void Device::simulate_reboot() {
    session_ = DeviceSession{};
    phase_ = Phase::Idle;
}

void Device::configure_psk(const crypto::AesKey& key) {
    psk_ = key;
}

wire::PskDataPacket Device::next_psk_packet(const std::string& plaintext, uint64_t now_ms) {
    if (!psk_) throw std::logic_error("static key not configured");
    const uint64_t seq = psk_seq_++;
    crypto::Iv iv{};
    fill_random(rng_, iv.begin(), iv.end());
    auto aad = crypto::data_aad(identity_.dev_id, 0, seq);
    auto env = crypto::aead_seal(*psk_, iv, aad, to_bytes(plaintext));

    wire::PskDataPacket pkt;
    pkt.seq = seq;
    pkt.dev_id = identity_.dev_id;
    pkt.ciphertext = std::move(env.ciphertext);
    pkt.iv = env.iv;
    pkt.tag = env.tag;
    pkt.sendts_ms = now_ms;
    return pkt;
}

std::string Device::next_reading() {
    double temp = 20.0 + uniform01(rng_) * 15.0;
    double hum = 30.0 + uniform01(rng_) * 60.0;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "T=%.1fC,H=%.1f%%", temp, hum);
    return buf;
}

}  // namespace dsekp
