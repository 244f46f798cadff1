#include "dsekp/edge.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsekp {

namespace {
using ordered_json = nlohmann::ordered_json;
}

const char* to_string(InitReject r) {
    switch (r) {
        case InitReject::UnknownDevice: return "unknown_device";
        case InitReject::BadProof: return "bad_proof";
        case InitReject::StaleTimestamp: return "stale_timestamp";
        case InitReject::DuplicateCtr: return "duplicate_ctr";
    }
    return "?";
}

const char* to_string(DataReject r) {
    switch (r) {
        case DataReject::UnknownSession: return "unknown_session";
        case DataReject::Replay: return "replay";
        case DataReject::AuthFailure: return "auth_failure";
    }
    return "?";
}

Edge::Edge(uint32_t skew_window_s, size_t session_capacity)
    : skew_window_s_(skew_window_s), session_capacity_(session_capacity) {
    if (session_capacity_ == 0) throw std::invalid_argument("session capacity must be positive");
}

void Edge::register_device(const crypto::DeviceIdentity& identity) {
    identity.validate();
    auto [it, inserted] = devices_.try_emplace(identity.dev_id, DeviceState{identity, {}, {}});
    if (!inserted) throw std::invalid_argument("device already registered: " + identity.dev_id);
}

bool Edge::knows_device(const std::string& dev_id) const {
    return devices_.contains(dev_id);
}

EdgeSession* Edge::find_session(DeviceState& dev, uint16_t sess_ctr) {
    for (auto& s : dev.sessions)
        if (s.params.sess_ctr == sess_ctr) return &s;
    return nullptr;
}

void Edge::enforce_capacity(DeviceState& dev) {
    while (dev.sessions.size() > session_capacity_) dev.sessions.pop_back();
    if (dev.sessions.size() > session_capacity_)
        throw std::logic_error("session store exceeds capacity");
}

InitOutcome Edge::handle_init(const wire::InitMessage& msg, uint64_t now_ms) {
    auto rejected = [&](InitReject why) {
        InitOutcome out;
        out.ack.dev_id = msg.dev_id;
        out.ack.sessctr_id = msg.sess_ctr;
        out.ack.status = wire::AckStatus::Rejected;
        out.rejected = why;
        return out;
    };

    auto it = devices_.find(msg.dev_id);
    if (it == devices_.end()) return rejected(InitReject::UnknownDevice);
    DeviceState& dev = it->second;

    crypto::SessionParams params;
    params.dev_nonce = msg.dev_nonce;
    params.sess_ctr = msg.sess_ctr;
    params.timestamp_t = msg.t;
    auto secret = crypto::derive_session_secret(dev.identity, params);

    // Proof before timestamp: an unauthenticated sender learns nothing
    // about our clock window.
    auto expected = crypto::compute_hmac_proof(
        secret, wire::canonical_init_payload(msg.dev_id, msg.sess_ctr, msg.t, msg.dev_nonce));
    if (!constant_time_equal(msg.init_proof, expected)) return rejected(InitReject::BadProof);

    const int64_t skew = static_cast<int64_t>(msg.t) - static_cast<int64_t>(now_ms / 1000);
    if (skew > static_cast<int64_t>(skew_window_s_) || -skew > static_cast<int64_t>(skew_window_s_))
        return rejected(InitReject::StaleTimestamp);

    if (find_session(dev, msg.sess_ctr)) return rejected(InitReject::DuplicateCtr);

    dev.sessions.push_front(EdgeSession{params, secret, 0, now_ms});
    enforce_capacity(dev);

    InitOutcome out;
    out.ack.dev_id = msg.dev_id;
    out.ack.sessctr_id = msg.sess_ctr;
    out.ack.status = wire::AckStatus::Ok;
    out.ack.ack_proof = crypto::compute_hmac_proof(
        secret, wire::ack_proof_payload(msg.dev_id, msg.sess_ctr, msg.t, msg.dev_nonce));
    return out;
}

DataResult Edge::handle_data(const wire::DsekpDataPacket& pkt, uint64_t now_ms) {
    auto it = devices_.find(pkt.dev_id);
    if (it == devices_.end()) return DataReject::UnknownSession;
    EdgeSession* session = find_session(it->second, pkt.sessctr_id);
    if (!session) return DataReject::UnknownSession;

    if (pkt.seq <= session->highest_seq) return DataReject::Replay;

    auto aad = crypto::data_aad(pkt.dev_id, pkt.sessctr_id, pkt.seq);
    crypto::AeadEnvelope env{pkt.iv, pkt.ciphertext, pkt.tag};
    auto plaintext = crypto::aead_open(session->secret.aes_key(), env, aad);
    if (!plaintext) return DataReject::AuthFailure;

    session->highest_seq = pkt.seq;

    DataOutcome out;
    auto& r = out.record;
    r.seq = pkt.seq;
    r.timestamp = metrics::format_iso8601_ms(now_ms);
    r.dev_id = pkt.dev_id;
    r.sessctr_id = pkt.sessctr_id;
    r.ciphertext_hex = to_hex(pkt.ciphertext);
    r.iv_hex = to_hex(pkt.iv);
    r.tag_hex = to_hex(pkt.tag);
    r.plaintext = to_string(*plaintext);
    r.recvts_ms = now_ms;
    r.latency_ms = static_cast<double>(now_ms) - static_cast<double>(pkt.sendts_ms);
    r.payload_size = wire::encode(pkt).size();
    r.bin_1s = now_ms / 1000;
    return out;
}

DataResult Edge::handle_psk_data(const crypto::AesKey& key, const wire::PskDataPacket& pkt,
                                 uint64_t now_ms) {
    auto it = devices_.find(pkt.dev_id);
    if (it == devices_.end()) return DataReject::UnknownSession;

    auto aad = crypto::data_aad(pkt.dev_id, 0, pkt.seq);
    crypto::AeadEnvelope env{pkt.iv, pkt.ciphertext, pkt.tag};
    auto plaintext = crypto::aead_open(key, env, aad);
    if (!plaintext) return DataReject::AuthFailure;

    DataOutcome out;
    out.duplicate = !it->second.psk_seqs_seen.insert(pkt.seq).second;

    auto& r = out.record;
    r.seq = pkt.seq;
    r.timestamp = metrics::format_iso8601_ms(now_ms);
    r.dev_id = pkt.dev_id;
    r.ciphertext_hex = to_hex(pkt.ciphertext);
    r.iv_hex = to_hex(pkt.iv);
    r.tag_hex = to_hex(pkt.tag);
    r.plaintext = to_string(*plaintext);
    r.recvts_ms = now_ms;
    r.latency_ms = static_cast<double>(now_ms) - static_cast<double>(pkt.sendts_ms);
    r.payload_size = wire::encode(pkt).size();
    r.bin_1s = now_ms / 1000;
    return out;
}

size_t Edge::session_count(const std::string& dev_id) const {
    auto it = devices_.find(dev_id);
    return it == devices_.end() ? 0 : it->second.sessions.size();
}

std::vector<uint16_t> Edge::session_ctrs(const std::string& dev_id) const {
    std::vector<uint16_t> out;
    auto it = devices_.find(dev_id);
    if (it == devices_.end()) return out;
    for (const auto& s : it->second.sessions) out.push_back(s.params.sess_ctr);
    return out;
}

std::string Edge::sessions_to_json() const {
    ordered_json arr = ordered_json::array();
    for (const auto& [dev_id, dev] : devices_) {
        for (const auto& s : dev.sessions) {
            ordered_json j;
            j["dev_id"] = dev_id;
            j["sess_ctr"] = s.params.sess_ctr;
            j["t"] = s.params.timestamp_t;
            j["dev_nonce_hex"] = to_hex(s.params.dev_nonce);
            j["established_at"] = s.established_at_ms;
            arr.push_back(std::move(j));
        }
    }
    return arr.dump();
}

void Edge::save_sessions(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << sessions_to_json() << '\n';
}

void Edge::load_sessions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();

    auto arr = ordered_json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
    if (arr.is_discarded() || !arr.is_array())
        throw std::runtime_error("session file is not a JSON array");

    for (auto& [_, dev] : devices_) dev.sessions.clear();

    for (const auto& j : arr) {
        if (!j.is_object() || !j.contains("dev_id") || !j.contains("sess_ctr") ||
            !j.contains("t") || !j.contains("dev_nonce_hex") || !j.contains("established_at"))
            throw std::runtime_error("session entry has wrong key set");

        const std::string dev_id = j.at("dev_id").get<std::string>();
        auto it = devices_.find(dev_id);
        if (it == devices_.end())
            throw std::runtime_error("session file names unregistered device " + dev_id);
        DeviceState& dev = it->second;

        crypto::SessionParams params;
        uint64_t ctr = j.at("sess_ctr").get<uint64_t>();
        if (ctr > 0xffff) throw std::runtime_error("sess_ctr out of range");
        params.sess_ctr = static_cast<uint16_t>(ctr);
        params.timestamp_t = j.at("t").get<uint32_t>();
        if (!from_hex(j.at("dev_nonce_hex").get<std::string>(), params.dev_nonce))
            throw std::runtime_error("dev_nonce_hex malformed");

        if (find_session(dev, params.sess_ctr))
            throw std::runtime_error("duplicate session counter in file");

        EdgeSession s;
        s.params = params;
        s.secret = crypto::derive_session_secret(dev.identity, params);
        s.highest_seq = 0;
        s.established_at_ms = j.at("established_at").get<uint64_t>();
        dev.sessions.push_back(std::move(s));  // file order is most recent first
        enforce_capacity(dev);
    }
}

}  // namespace dsekp
