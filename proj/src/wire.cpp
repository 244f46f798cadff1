#include "dsekp/wire.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace dsekp::wire {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string hex(BytesView b) { return to_hex(b); }

// --- typed field extraction -------------------------------------------------

struct FieldError {
    std::string reason;
};

class Fields {
  public:
    explicit Fields(const ordered_json& j) : j_(j) {}

    bool has_exactly(std::initializer_list<const char*> keys) const {
        if (j_.size() != keys.size()) return false;
        for (const char* k : keys)
            if (!j_.contains(k)) return false;
        return true;
    }

    uint64_t u64(const char* key) const {
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned())
            throw FieldError{std::string(key) + " must be a non-negative integer"};
        return v.get<uint64_t>();
    }

    uint16_t u16(const char* key) const {
        uint64_t v = u64(key);
        if (v > 0xffff) throw FieldError{std::string(key) + " exceeds 16 bits"};
        return static_cast<uint16_t>(v);
    }

    uint32_t u32(const char* key) const {
        uint64_t v = u64(key);
        if (v > 0xffffffffULL) throw FieldError{std::string(key) + " exceeds 32 bits"};
        return static_cast<uint32_t>(v);
    }

    std::string str(const char* key) const {
        const auto& v = j_.at(key);
        if (!v.is_string()) throw FieldError{std::string(key) + " must be a string"};
        return v.get<std::string>();
    }

    Bytes hex_bytes(const char* key) const {
        Bytes out;
        if (!from_hex(str(key), out))
            throw FieldError{std::string(key) + " is not lowercase hex"};
        return out;
    }

    template <size_t N>
    std::array<uint8_t, N> hex_array(const char* key) const {
        Bytes b = hex_bytes(key);
        if (b.size() != N)
            throw FieldError{std::string(key) + " must encode exactly " + std::to_string(N) +
                             " bytes"};
        std::array<uint8_t, N> out{};
        std::copy(b.begin(), b.end(), out.begin());
        return out;
    }

  private:
    const ordered_json& j_;
};

DecodeResult decode_psk_data(const Fields& f) {
    if (!f.has_exactly({"seq", "dev_id", "ciphertext", "iv", "tag", "sendts_ms"}))
        return DecodeError{"psk data packet has wrong key set"};
    PskDataPacket m;
    m.seq = f.u64("seq");
    m.dev_id = f.str("dev_id");
    m.ciphertext = f.hex_bytes("ciphertext");
    m.iv = f.hex_array<crypto::kIvLen>("iv");
    m.tag = f.hex_array<crypto::kTagLen>("tag");
    m.sendts_ms = f.u64("sendts_ms");
    return Message{std::move(m)};
}

DecodeResult decode_dsekp_data(const Fields& f) {
    if (!f.has_exactly({"seq", "dev_id", "sessctr_id", "ciphertext", "iv", "tag", "sendts_ms"}))
        return DecodeError{"session data packet has wrong key set"};
    DsekpDataPacket m;
    m.seq = f.u64("seq");
    m.dev_id = f.str("dev_id");
    m.sessctr_id = f.u16("sessctr_id");
    m.ciphertext = f.hex_bytes("ciphertext");
    m.iv = f.hex_array<crypto::kIvLen>("iv");
    m.tag = f.hex_array<crypto::kTagLen>("tag");
    m.sendts_ms = f.u64("sendts_ms");
    return Message{std::move(m)};
}

DecodeResult decode_init(const Fields& f) {
    if (!f.has_exactly({"dev_id", "sess_ctr", "t", "dev_nonce", "init_proof"}))
        return DecodeError{"init message has wrong key set"};
    InitMessage m;
    m.dev_id = f.str("dev_id");
    m.sess_ctr = f.u16("sess_ctr");
    m.t = f.u32("t");
    m.dev_nonce = f.hex_array<crypto::kNonceLen>("dev_nonce");
    m.init_proof = f.hex_array<crypto::kSecretLen>("init_proof");
    return Message{std::move(m)};
}

DecodeResult decode_ack(const Fields& f) {
    bool with_proof = f.has_exactly({"dev_id", "sessctr_id", "status", "ack_proof"});
    if (!with_proof && !f.has_exactly({"dev_id", "sessctr_id", "status"}))
        return DecodeError{"ack has wrong key set"};
    InitAck m;
    m.dev_id = f.str("dev_id");
    m.sessctr_id = f.u16("sessctr_id");
    std::string status = f.str("status");
    if (status == "ok")
        m.status = AckStatus::Ok;
    else if (status == "rejected")
        m.status = AckStatus::Rejected;
    else
        return DecodeError{"ack status must be ok or rejected"};
    if (with_proof != (m.status == AckStatus::Ok))
        return DecodeError{"ack_proof must be present exactly when status is ok"};
    if (with_proof) m.ack_proof = f.hex_array<crypto::kSecretLen>("ack_proof");
    return Message{std::move(m)};
}

}  // namespace

std::string ack_topic(const std::string& dev_id) {
    return std::string(kTopicAckPrefix) + dev_id;
}

std::string encode(const PskDataPacket& m) {
    ordered_json j;
    j["seq"] = m.seq;
    j["dev_id"] = m.dev_id;
    j["ciphertext"] = hex(m.ciphertext);
    j["iv"] = hex(m.iv);
    j["tag"] = hex(m.tag);
    j["sendts_ms"] = m.sendts_ms;
    return j.dump();
}

std::string encode(const DsekpDataPacket& m) {
    ordered_json j;
    j["seq"] = m.seq;
    j["dev_id"] = m.dev_id;
    j["sessctr_id"] = m.sessctr_id;
    j["ciphertext"] = hex(m.ciphertext);
    j["iv"] = hex(m.iv);
    j["tag"] = hex(m.tag);
    j["sendts_ms"] = m.sendts_ms;
    return j.dump();
}

std::string encode(const InitMessage& m) {
    ordered_json j;
    j["dev_id"] = m.dev_id;
    j["sess_ctr"] = m.sess_ctr;
    j["t"] = m.t;
    j["dev_nonce"] = hex(m.dev_nonce);
    j["init_proof"] = hex(m.init_proof);
    return j.dump();
}

std::string encode(const InitAck& m) {
    ordered_json j;
    j["dev_id"] = m.dev_id;
    j["sessctr_id"] = m.sessctr_id;
    j["status"] = m.status == AckStatus::Ok ? "ok" : "rejected";
    if (m.status == AckStatus::Ok) {
        if (!m.ack_proof) throw std::logic_error("ok ack without proof");
        j["ack_proof"] = hex(*m.ack_proof);
    }
    return j.dump();
}

DecodeResult decode(const std::string& topic, const std::string& body) {
    auto j = ordered_json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return DecodeError{"body is not valid JSON"};
    if (!j.is_object()) return DecodeError{"body is not a JSON object"};
    Fields f(j);

    try {
        if (topic == kTopicPskData) return decode_psk_data(f);
        if (topic == kTopicData) return decode_dsekp_data(f);
        if (topic == kTopicInit) return decode_init(f);
        if (topic.starts_with(kTopicAckPrefix) &&
            topic.size() > std::string_view(kTopicAckPrefix).size())
            return decode_ack(f);
    } catch (const FieldError& e) {
        return DecodeError{e.reason};
    }
    return DecodeError{"unknown topic: " + topic};
}

Bytes canonical_init_payload(const std::string& dev_id, uint16_t sess_ctr, uint32_t t,
                             const crypto::Nonce& dev_nonce) {
    if (dev_id.find('\0') != std::string::npos)
        throw std::invalid_argument("dev_id contains NUL");
    Bytes payload = to_bytes(dev_id);
    payload.push_back(0x00);
    append_be16(payload, sess_ctr);
    append_be32(payload, t);
    append(payload, dev_nonce);
    return payload;
}

Bytes ack_proof_payload(const std::string& dev_id, uint16_t sess_ctr, uint32_t t,
                        const crypto::Nonce& dev_nonce) {
    Bytes payload = to_bytes("ACK");
    append(payload, canonical_init_payload(dev_id, sess_ctr, t, dev_nonce));
    return payload;
}

}  // namespace dsekp::wire
