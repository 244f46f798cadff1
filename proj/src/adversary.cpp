#include "dsekp/adversary.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace dsekp::adversary {

namespace {

// Fresh sequence numbers far above anything honest traffic uses, so a
// tampered or spliced packet is never rejected as a replay; the point is
// to show the cryptographic check rejecting it.
constexpr uint64_t kFreshSeqBase = 1'000'000'000ULL;

uint64_t pick(std::mt19937_64& rng, uint64_t bound) {
    return rng() % bound;  // modulo bias is irrelevant for the harness
}

}  // namespace

std::optional<AttackKind> parse_attack_kind(const std::string& name) {
    if (name == "replay_data") return AttackKind::ReplayData;
    if (name == "replay_init") return AttackKind::ReplayInit;
    if (name == "tamper_bitflip") return AttackKind::TamperBitflip;
    if (name == "forge_init") return AttackKind::ForgeInit;
    if (name == "cross_session_splice") return AttackKind::CrossSessionSplice;
    return std::nullopt;
}

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::ReplayData: return "replay_data";
        case AttackKind::ReplayInit: return "replay_init";
        case AttackKind::TamperBitflip: return "tamper_bitflip";
        case AttackKind::ForgeInit: return "forge_init";
        case AttackKind::CrossSessionSplice: return "cross_session_splice";
    }
    return "?";
}

std::string AttackReport::to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["injected"] = injected;
    j["accepted"] = accepted;
    j["accepted_duplicates"] = accepted_duplicates;
    j["rejected"] = nlohmann::ordered_json::object();
    for (const auto& [reason, count] : rejected) j["rejected"][reason] = count;
    return j.dump();
}

Adversary::Adversary(AttackScenario scenario, uint64_t seed)
    : scenario_(scenario), rng_(seed) {}

void Adversary::study(const std::vector<transport::Delivery>& archive) {
    auto note_dev = [&](const std::string& dev_id) {
        for (const auto& d : dev_ids_)
            if (d == dev_id) return;
        dev_ids_.push_back(dev_id);
    };

    for (const auto& d : archive) {
        auto decoded = wire::decode(d.topic, d.body);
        auto* msg = std::get_if<wire::Message>(&decoded);
        if (!msg) continue;
        if (auto* pkt = std::get_if<wire::DsekpDataPacket>(msg)) {
            note_dev(pkt->dev_id);
            latest_ctr_[pkt->dev_id] = pkt->sessctr_id;  // archive is in delivery order
            data_pool_.push_back({d.topic, *msg, d.body});
        } else if (auto* psk = std::get_if<wire::PskDataPacket>(msg)) {
            note_dev(psk->dev_id);
            data_pool_.push_back({d.topic, *msg, d.body});
        } else if (std::holds_alternative<wire::InitMessage>(*msg)) {
            note_dev(std::get<wire::InitMessage>(*msg).dev_id);
            init_pool_.push_back(d.body);
        }
    }

    for (const auto& c : data_pool_) {
        if (auto* pkt = std::get_if<wire::DsekpDataPacket>(&c.decoded)) {
            if (pkt->sessctr_id != latest_ctr_.at(pkt->dev_id)) splice_pool_.push_back(c);
        }
    }

    switch (scenario_.kind) {
        case AttackKind::ReplayData:
        case AttackKind::TamperBitflip:
            if (data_pool_.empty())
                throw std::runtime_error("archive holds no data traffic to work from");
            break;
        case AttackKind::ReplayInit:
            if (init_pool_.empty())
                throw std::runtime_error("archive holds no handshake traffic to work from");
            break;
        case AttackKind::ForgeInit:
            if (dev_ids_.empty())
                throw std::runtime_error("archive names no device to impersonate");
            break;
        case AttackKind::CrossSessionSplice:
            if (splice_pool_.empty())
                throw std::runtime_error(
                    "archive holds no data from a superseded session to splice");
            break;
    }
}

std::pair<std::string, std::string> Adversary::forge(size_t i, uint64_t now_ms) {
    switch (scenario_.kind) {
        case AttackKind::ReplayData: {
            const auto& c = data_pool_[i % data_pool_.size()];
            return {c.topic, c.body};
        }
        case AttackKind::ReplayInit:
            return {wire::kTopicInit, init_pool_[i % init_pool_.size()]};

        case AttackKind::TamperBitflip: {
            const auto& c = data_pool_[i % data_pool_.size()];
            // Mutable copy, fresh seq, then one bit flipped in a
            // uniformly chosen protected field.
            auto flip = [&](auto& pkt) {
                pkt.seq = kFreshSeqBase + i;
                switch (pick(rng_, 3)) {
                    case 0: {
                        size_t bit = pick(rng_, pkt.iv.size() * 8);
                        pkt.iv[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
                        break;
                    }
                    case 1: {
                        if (pkt.ciphertext.empty()) {
                            pkt.tag[0] ^= 1u;
                            break;
                        }
                        size_t bit = pick(rng_, pkt.ciphertext.size() * 8);
                        pkt.ciphertext[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
                        break;
                    }
                    default: {
                        size_t bit = pick(rng_, pkt.tag.size() * 8);
                        pkt.tag[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
                        break;
                    }
                }
            };
            if (auto pkt = std::get_if<wire::DsekpDataPacket>(&c.decoded)) {
                auto copy = *pkt;
                flip(copy);
                return {c.topic, wire::encode(copy)};
            }
            auto copy = std::get<wire::PskDataPacket>(c.decoded);
            flip(copy);
            return {c.topic, wire::encode(copy)};
        }

        case AttackKind::ForgeInit: {
            wire::InitMessage m;
            m.dev_id = dev_ids_[i % dev_ids_.size()];
            m.sess_ctr = static_cast<uint16_t>(rng_() & 0xffff);
            // Fresh timestamp on purpose: the rejection must come from
            // the proof check, not the skew window.
            m.t = static_cast<uint32_t>(now_ms / 1000);
            for (auto& b : m.dev_nonce) b = static_cast<uint8_t>(rng_() & 0xff);
            for (auto& b : m.init_proof) b = static_cast<uint8_t>(rng_() & 0xff);
            return {wire::kTopicInit, wire::encode(m)};
        }

        case AttackKind::CrossSessionSplice: {
            const auto& c = splice_pool_[i % splice_pool_.size()];
            auto pkt = std::get<wire::DsekpDataPacket>(c.decoded);
            pkt.sessctr_id = latest_ctr_.at(pkt.dev_id);
            pkt.seq = kFreshSeqBase + i;
            return {c.topic, wire::encode(pkt)};
        }
    }
    throw std::logic_error("unreachable");
}

void Adversary::arm(transport::Broker& broker, uint64_t start_ms, uint64_t spacing_ms,
                    AttackReport& report) {
    report.scenario = to_string(scenario_.kind);
    for (uint32_t i = 0; i < scenario_.count; ++i) {
        uint64_t at = start_ms + static_cast<uint64_t>(i) * spacing_ms;
        broker.schedule(at, [this, i, &broker, &report] {
            auto [topic, body] = forge(i, broker.clock().now_ms());
            report.injected++;
            broker.publish(topic, std::move(body), kSource);
        });
    }
}

}  // namespace dsekp::adversary
