#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dsekp/device.hpp"

using namespace dsekp;

namespace {

Bytes unhex(std::string_view h) {
    Bytes out;
    REQUIRE(from_hex(h, out));
    return out;
}

crypto::DeviceIdentity test_identity(const std::string& id = "esp32-01") {
    crypto::DeviceIdentity ident;
    ident.dev_id = id;
    ident.dev_secret = unhex("000102030405060708090a0b0c0d0e0f10111213");
    ident.edge_salt = unhex("aabbccddeeff00112233445566778899");
    return ident;
}

// The edge-side half of a successful handshake, done by hand.
wire::InitAck ok_ack_for(const crypto::DeviceIdentity& ident, const wire::InitMessage& init) {
    crypto::SessionParams params{init.dev_nonce, init.sess_ctr, init.t};
    auto secret = crypto::derive_session_secret(ident, params);
    wire::InitAck ack;
    ack.dev_id = init.dev_id;
    ack.sessctr_id = init.sess_ctr;
    ack.status = wire::AckStatus::Ok;
    ack.ack_proof = crypto::compute_hmac_proof(
        secret, wire::ack_proof_payload(init.dev_id, init.sess_ctr, init.t, init.dev_nonce));
    return ack;
}

Device activated_device(uint64_t seed = 42) {
    Device dev(test_identity(), seed);
    auto init = dev.begin_session(5'000);
    REQUIRE(dev.on_ack(ok_ack_for(test_identity(), init)) == std::nullopt);
    return dev;
}

}  // namespace

TEST_CASE("a fresh device is idle and refuses session operations") {
    Device dev(test_identity(), 1);
    CHECK(dev.phase() == Phase::Idle);
    CHECK(dev.session() == nullptr);
    CHECK_THROWS_AS(dev.next_data_packet("x", 0), NotActive);
    CHECK_THROWS_AS(dev.current_init(), std::logic_error);
    CHECK_THROWS_AS(dev.next_psk_packet("x", 0), std::logic_error);  // psk unset
}

TEST_CASE("begin_session emits a self-consistent, verifiable init") {
    auto ident = test_identity();
    Device dev(ident, 7);
    auto init = dev.begin_session(123'456);

    CHECK(dev.phase() == Phase::AwaitAck);
    CHECK(init.dev_id == "esp32-01");
    CHECK(init.t == 123);  // milliseconds floor to seconds

    crypto::SessionParams params{init.dev_nonce, init.sess_ctr, init.t};
    auto secret = crypto::derive_session_secret(ident, params);
    auto expected = crypto::compute_hmac_proof(
        secret, wire::canonical_init_payload(init.dev_id, init.sess_ctr, init.t, init.dev_nonce));
    CHECK(init.init_proof == expected);
}

TEST_CASE("a resent init is byte-identical to the original") {
    Device dev(test_identity(), 7);
    auto first = dev.begin_session(9'000);
    CHECK(wire::encode(dev.current_init()) == wire::encode(first));
    CHECK(wire::encode(dev.current_init()) == wire::encode(first));  // and again
}

TEST_CASE("ack handling distinguishes mismatch, rejection and bad proof") {
    Device dev(test_identity(), 3);
    auto init = dev.begin_session(1'000);
    auto good = ok_ack_for(test_identity(), init);

    SUBCASE("ack for a different session counter") {
        auto ack = good;
        ack.sessctr_id = static_cast<uint16_t>(ack.sessctr_id + 1);
        CHECK(dev.on_ack(ack) == AckError::CtrMismatch);
        CHECK(dev.phase() == Phase::AwaitAck);
    }
    SUBCASE("rejected") {
        wire::InitAck ack{init.dev_id, init.sess_ctr, wire::AckStatus::Rejected, std::nullopt};
        CHECK(dev.on_ack(ack) == AckError::Rejected);
        CHECK(dev.phase() == Phase::AwaitAck);
    }
    SUBCASE("ok but missing proof") {
        auto ack = good;
        ack.ack_proof = std::nullopt;
        CHECK(dev.on_ack(ack) == AckError::BadProof);
    }
    SUBCASE("ok but corrupted proof") {
        auto ack = good;
        (*ack.ack_proof)[0] ^= 0x01;
        CHECK(dev.on_ack(ack) == AckError::BadProof);
        CHECK(dev.phase() == Phase::AwaitAck);
    }
    SUBCASE("valid ack activates") {
        CHECK(dev.on_ack(good) == std::nullopt);
        CHECK(dev.phase() == Phase::Active);
    }
    SUBCASE("an init proof must not pass as an ack proof") {
        auto ack = good;
        ack.ack_proof = init.init_proof;
        CHECK(dev.on_ack(ack) == AckError::BadProof);
    }
}

TEST_CASE("data packets count up from 1 without gaps and decrypt cleanly") {
    auto ident = test_identity();
    Device dev = activated_device();
    const auto* sess = dev.session();
    REQUIRE(sess != nullptr);

    for (uint64_t want = 1; want <= 5; ++want) {
        auto pkt = dev.next_data_packet("reading-" + std::to_string(want), 6'000 + want);
        CHECK(pkt.seq == want);
        CHECK(pkt.dev_id == "esp32-01");
        CHECK(pkt.sessctr_id == sess->params.sess_ctr);
        CHECK(pkt.iv == crypto::make_iv(sess->iv_prefix, want));
        CHECK(pkt.sendts_ms == 6'000 + want);

        crypto::AeadEnvelope env{pkt.iv, pkt.ciphertext, pkt.tag};
        auto aad = crypto::data_aad(pkt.dev_id, pkt.sessctr_id, pkt.seq);
        auto plain = crypto::aead_open(sess->secret.aes_key(), env, aad);
        REQUIRE(plain.has_value());
        CHECK(to_string(*plain) == "reading-" + std::to_string(want));
    }
}

TEST_CASE("rotation abandons the old session and restarts sequence numbers") {
    Device dev = activated_device();
    dev.next_data_packet("a", 1);
    dev.next_data_packet("b", 2);
    auto old_ctr = dev.session()->params.sess_ctr;
    auto old_nonce = dev.session()->params.dev_nonce;

    auto init = dev.begin_session(10'000);  // rotate from Active
    CHECK(dev.phase() == Phase::AwaitAck);
    CHECK(init.dev_nonce != old_nonce);
    CHECK_THROWS_AS(dev.next_data_packet("c", 3), NotActive);

    REQUIRE(dev.on_ack(ok_ack_for(test_identity(), init)) == std::nullopt);
    auto pkt = dev.next_data_packet("c", 3);
    CHECK(pkt.seq == 1);
    CHECK(pkt.sessctr_id == init.sess_ctr);
    (void)old_ctr;
}

TEST_CASE("reboot clears session state but keeps the static-key counter") {
    Device dev = activated_device();
    dev.configure_psk(crypto::AesKey{});
    CHECK(dev.next_psk_packet("x", 0).seq == 1);
    CHECK(dev.next_psk_packet("x", 0).seq == 2);
    dev.next_data_packet("y", 0);

    dev.simulate_reboot();
    CHECK(dev.phase() == Phase::Idle);
    CHECK(dev.session() == nullptr);
    CHECK_THROWS_AS(dev.next_data_packet("z", 0), NotActive);
    CHECK(dev.next_psk_packet("x", 0).seq == 3);  // lifetime counter, not per boot
}

TEST_CASE("static-key packets use fresh random ivs and counter-zero aad") {
    crypto::AesKey key{};
    key.fill(0x5a);
    Device dev(test_identity(), 11);
    dev.configure_psk(key);

    auto p1 = dev.next_psk_packet("hello", 100);
    auto p2 = dev.next_psk_packet("hello", 200);
    CHECK(p1.iv != p2.iv);
    CHECK(p1.seq + 1 == p2.seq);

    crypto::AeadEnvelope env{p1.iv, p1.ciphertext, p1.tag};
    auto plain = crypto::aead_open(key, env, crypto::data_aad("esp32-01", 0, p1.seq));
    REQUIRE(plain.has_value());
    CHECK(to_string(*plain) == "hello");

    // Same bytes under the session-style AAD must not open.
    CHECK_FALSE(crypto::aead_open(key, env, crypto::data_aad("esp32-01", 1, p1.seq)));
}

TEST_CASE("synthetic readings keep the fixed sensor shape") {
    Device dev(test_identity(), 99);
    for (int i = 0; i < 200; ++i) {
        auto r = dev.next_reading();
        CHECK(r.size() == 15);
        double t = 0, h = 0;
        REQUIRE(std::sscanf(r.c_str(), "T=%lfC,H=%lf%%", &t, &h) == 2);
        CHECK(t >= 20.0);
        CHECK(t <= 35.0);
        CHECK(h >= 30.0);
        CHECK(h <= 90.0);
    }
}

TEST_CASE("same seed replays the same device, different seeds diverge") {
    Device a(test_identity(), 1234);
    Device b(test_identity(), 1234);
    Device c(test_identity(), 1235);

    auto ia = a.begin_session(77'000);
    auto ib = b.begin_session(77'000);
    auto ic = c.begin_session(77'000);
    CHECK(wire::encode(ia) == wire::encode(ib));
    CHECK(ia.dev_nonce != ic.dev_nonce);

    REQUIRE(a.on_ack(ok_ack_for(test_identity(), ia)) == std::nullopt);
    REQUIRE(b.on_ack(ok_ack_for(test_identity(), ib)) == std::nullopt);
    CHECK(wire::encode(a.next_data_packet(a.next_reading(), 78'000)) ==
          wire::encode(b.next_data_packet(b.next_reading(), 78'000)));
}

TEST_CASE("fresh sessions draw distinct nonces across many rotations") {
    Device dev(test_identity(), 8);
    std::set<std::string> nonces;
    for (int i = 0; i < 50; ++i) {
        auto init = dev.begin_session(uint64_t(i) * 1000);
        nonces.insert(to_hex(init.dev_nonce));
        REQUIRE(dev.on_ack(ok_ack_for(test_identity(), init)) == std::nullopt);
    }
    CHECK(nonces.size() == 50);
}
