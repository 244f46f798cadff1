#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsekp/wire.hpp"

using namespace dsekp;

namespace {

wire::PskDataPacket sample_psk() {
    wire::PskDataPacket m;
    m.seq = 1;
    m.dev_id = "esp32-01";
    m.ciphertext = {0xde, 0xad};
    for (size_t i = 0; i < m.iv.size(); ++i) m.iv[i] = uint8_t(i);
    m.tag.fill(0xff);
    m.sendts_ms = 12345;
    return m;
}

wire::DsekpDataPacket sample_data() {
    wire::DsekpDataPacket m;
    m.seq = 7;
    m.dev_id = "esp32-01";
    m.sessctr_id = 513;
    m.ciphertext = {0xde, 0xad, 0xbe};
    for (size_t i = 0; i < m.iv.size(); ++i) m.iv[i] = uint8_t(i);
    m.tag.fill(0xaa);
    m.sendts_ms = 99000;
    return m;
}

wire::InitMessage sample_init() {
    wire::InitMessage m;
    m.dev_id = "esp32-01";
    m.sess_ctr = 258;
    m.t = 1700000000;
    m.dev_nonce.fill(0x0b);
    m.init_proof.fill(0x11);
    return m;
}

wire::InitAck sample_ack_ok() {
    wire::InitAck m;
    m.dev_id = "esp32-01";
    m.sessctr_id = 258;
    m.status = wire::AckStatus::Ok;
    m.ack_proof.emplace();
    m.ack_proof->fill(0x22);
    return m;
}

}  // namespace

TEST_CASE("encodings are single-line json with pinned key order") {
    CHECK(wire::encode(sample_psk()) ==
          R"({"seq":1,"dev_id":"esp32-01","ciphertext":"dead",)"
          R"("iv":"000102030405060708090a0b",)"
          R"("tag":"ffffffffffffffffffffffffffffffff","sendts_ms":12345})");

    CHECK(wire::encode(sample_data()) ==
          R"({"seq":7,"dev_id":"esp32-01","sessctr_id":513,"ciphertext":"deadbe",)"
          R"("iv":"000102030405060708090a0b",)"
          R"("tag":"aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa","sendts_ms":99000})");

    CHECK(wire::encode(sample_init()) ==
          R"({"dev_id":"esp32-01","sess_ctr":258,"t":1700000000,)"
          R"("dev_nonce":"0b0b0b0b0b0b0b0b0b0b0b0b",)"
          R"("init_proof":"1111111111111111111111111111111111111111111111111111111111111111"})");

    CHECK(wire::encode(sample_ack_ok()) ==
          R"({"dev_id":"esp32-01","sessctr_id":258,"status":"ok",)"
          R"("ack_proof":"2222222222222222222222222222222222222222222222222222222222222222"})");

    wire::InitAck rejected;
    rejected.dev_id = "esp32-01";
    rejected.sessctr_id = 258;
    rejected.status = wire::AckStatus::Rejected;
    CHECK(wire::encode(rejected) ==
          R"({"dev_id":"esp32-01","sessctr_id":258,"status":"rejected"})");
}

TEST_CASE("decode inverts encode on every message type") {
    auto rt = [](const auto& msg, const char* topic) {
        auto body = wire::encode(msg);
        auto decoded = wire::decode(topic, body);
        auto* m = std::get_if<wire::Message>(&decoded);
        REQUIRE(m != nullptr);
        using T = std::decay_t<decltype(msg)>;
        REQUIRE(std::holds_alternative<T>(*m));
        CHECK(std::get<T>(*m) == msg);
        CHECK(wire::encode(std::get<T>(*m)) == body);  // byte-identical re-encode
    };
    rt(sample_psk(), wire::kTopicPskData);
    rt(sample_data(), wire::kTopicData);
    rt(sample_init(), wire::kTopicInit);
    rt(sample_ack_ok(), "dsekp/init/ack/esp32-01");

    wire::InitAck rejected;
    rejected.dev_id = "esp32-01";
    rejected.sessctr_id = 3;
    rejected.status = wire::AckStatus::Rejected;
    rt(rejected, "dsekp/init/ack/esp32-01");
}

TEST_CASE("decode refuses malformed bodies with a stated reason") {
    auto reason = [](const char* topic, const std::string& body) {
        auto r = wire::decode(topic, body);
        auto* e = std::get_if<wire::DecodeError>(&r);
        REQUIRE(e != nullptr);
        return e->reason;
    };

    CHECK(reason(wire::kTopicData, "{not json") == "body is not valid JSON");
    CHECK(reason(wire::kTopicData, "[1,2]") == "body is not a JSON object");
    CHECK(reason("nope/topic", wire::encode(sample_psk())).starts_with("unknown topic"));
    CHECK(reason("dsekp/init/ack/", R"({"dev_id":"a","sessctr_id":1,"status":"rejected"})")
              .starts_with("unknown topic"));

    // key-set violations
    CHECK(reason(wire::kTopicPskData, R"({"seq":1})") == "psk data packet has wrong key set");
    auto extra = wire::encode(sample_psk());
    extra.insert(extra.size() - 1, R"(,"bonus":1)");
    CHECK(reason(wire::kTopicPskData, extra) == "psk data packet has wrong key set");
    // a psk body on the session topic lacks sessctr_id
    CHECK(reason(wire::kTopicData, wire::encode(sample_psk())) ==
          "session data packet has wrong key set");

    // type and width violations
    auto body = [&](const char* tweak_key, const std::string& json_value) {
        auto m = sample_data();
        std::string b = wire::encode(m);
        // crude but transparent field surgery on the canonical encoding
        auto key_pos = b.find(std::string("\"") + tweak_key + "\":");
        REQUIRE(key_pos != std::string::npos);
        auto val_start = b.find(':', key_pos) + 1;
        auto val_end = b.find_first_of(",}", val_start);
        return b.substr(0, val_start) + json_value + b.substr(val_end);
    };
    CHECK(reason(wire::kTopicData, body("seq", "-1")) ==
          "seq must be a non-negative integer");
    CHECK(reason(wire::kTopicData, body("seq", "1.5")) ==
          "seq must be a non-negative integer");
    CHECK(reason(wire::kTopicData, body("sessctr_id", "65536")) ==
          "sessctr_id exceeds 16 bits");
    CHECK(reason(wire::kTopicData, body("dev_id", "7")) == "dev_id must be a string");
    CHECK(reason(wire::kTopicData, body("iv", "\"00ff\"")) ==
          "iv must encode exactly 12 bytes");
    CHECK(reason(wire::kTopicData, body("tag", "\"GG\"")).find("lowercase hex") !=
          std::string::npos);

    // uppercase hex is rejected, not normalized
    auto m = sample_data();
    auto b = wire::encode(m);
    auto pos = b.find("deadbe");
    b.replace(pos, 6, "DEADBE");
    CHECK(reason(wire::kTopicData, b).find("lowercase hex") != std::string::npos);
}

TEST_CASE("ack proof presence is tied to status") {
    auto reason = [](const std::string& body) {
        auto r = wire::decode("dsekp/init/ack/esp32-01", body);
        auto* e = std::get_if<wire::DecodeError>(&r);
        REQUIRE(e != nullptr);
        return e->reason;
    };
    // ok without proof
    CHECK(reason(R"({"dev_id":"esp32-01","sessctr_id":1,"status":"ok"})") ==
          "ack_proof must be present exactly when status is ok");
    // rejected with proof
    std::string proof(64, '0');
    CHECK(reason(R"({"dev_id":"esp32-01","sessctr_id":1,"status":"rejected","ack_proof":")" +
                 proof + R"("})") ==
          "ack_proof must be present exactly when status is ok");
    CHECK(reason(R"({"dev_id":"esp32-01","sessctr_id":1,"status":"maybe"})") ==
          "ack status must be ok or rejected");

    // encoding an ok ack without a proof is a programming error
    wire::InitAck bad;
    bad.status = wire::AckStatus::Ok;
    CHECK_THROWS_AS(wire::encode(bad), std::logic_error);
}

TEST_CASE("canonical init payload layout and NUL rejection") {
    crypto::Nonce nonce;
    for (size_t i = 0; i < nonce.size(); ++i) nonce[i] = uint8_t(0x30 + i);
    auto payload = wire::canonical_init_payload("ab", 0x0102, 0x03040506, nonce);

    Bytes expected = {'a', 'b', 0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06};
    expected.insert(expected.end(), nonce.begin(), nonce.end());
    CHECK(payload == expected);

    CHECK_THROWS_AS(wire::canonical_init_payload(std::string("a\0b", 3), 1, 2, nonce),
                    std::invalid_argument);

    auto ack_payload = wire::ack_proof_payload("ab", 0x0102, 0x03040506, nonce);
    Bytes prefix = {'A', 'C', 'K'};
    prefix.insert(prefix.end(), expected.begin(), expected.end());
    CHECK(ack_payload == prefix);
}

TEST_CASE("topic helpers") {
    CHECK(std::string(wire::kTopicPskData) == "psk/data");
    CHECK(std::string(wire::kTopicInit) == "dsekp/init");
    CHECK(std::string(wire::kTopicData) == "dsekp/data");
    CHECK(wire::ack_topic("esp32-07") == "dsekp/init/ack/esp32-07");
}
