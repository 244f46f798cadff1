#include "dsekp/crypto.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <memory>
#include <stdexcept>

namespace dsekp::crypto {

namespace {

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

[[noreturn]] void crypto_failure(const char* what) {
    throw std::runtime_error(std::string("crypto backend failure: ") + what);
}

}  // namespace

void DeviceIdentity::validate() const {
    if (dev_id.empty())
        throw std::invalid_argument("dev_id must not be empty");
    for (unsigned char c : dev_id) {
        if (c == '/' || c == '#' || c == '+' || c == '\0' || std::isspace(c))
            throw std::invalid_argument("dev_id contains a character reserved by topics or framing");
    }
    if (dev_secret.size() < kMinSecretLen)
        throw std::invalid_argument("dev_secret shorter than 16 bytes");
    if (edge_salt.size() < kMinSecretLen)
        throw std::invalid_argument("edge_salt shorter than 16 bytes");
}

std::array<uint8_t, 32> hmac_sha256(BytesView key, BytesView data) {
    std::array<uint8_t, 32> out{};
    size_t out_len = 0;
    // EVP_Q_mac tolerates a null data pointer only for zero length; keep a
    // stable dummy so empty inputs are well defined.
    static const uint8_t dummy = 0;
    const void* key_ptr = key.empty() ? &dummy : static_cast<const void*>(key.data());
    const unsigned char* data_ptr = data.empty() ? &dummy : data.data();
    if (!EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA256", nullptr,
                   key_ptr, key.size(), data_ptr, data.size(),
                   out.data(), out.size(), &out_len) ||
        out_len != out.size())
        crypto_failure("HMAC-SHA256");
    return out;
}

Bytes hkdf_sha256(BytesView salt, BytesView ikm, BytesView info, size_t length) {
    if (length == 0 || length > 255 * 32)
        throw std::invalid_argument("hkdf output length out of range");

    // Extract. An absent salt means a string of 32 zero bytes per RFC 5869.
    Bytes zero_salt(32, 0);
    auto prk = hmac_sha256(salt.empty() ? BytesView(zero_salt) : salt, ikm);

    // Expand.
    Bytes out;
    out.reserve(length);
    Bytes block;
    uint8_t counter = 1;
    while (out.size() < length) {
        Bytes input = block;
        append(input, info);
        input.push_back(counter++);
        auto t = hmac_sha256(prk, input);
        block.assign(t.begin(), t.end());
        size_t take = std::min(block.size(), length - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
    }
    return out;
}

Bytes build_ikm(const DeviceIdentity& id, const SessionParams& params) {
    id.validate();
    Bytes ikm = id.dev_secret;
    append(ikm, params.dev_nonce);
    append_be16(ikm, params.sess_ctr);
    append_be32(ikm, params.timestamp_t);
    return ikm;
}

SessionSecret derive_session_secret(const DeviceIdentity& id, const SessionParams& params) {
    Bytes okm = hkdf_sha256(id.edge_salt, build_ikm(id, params), {}, kSecretLen);
    SessionSecret secret;
    std::copy(okm.begin(), okm.end(), secret.bytes.begin());
    return secret;
}

Proof compute_hmac_proof(const SessionSecret& secret, BytesView payload) {
    return hmac_sha256(secret.bytes, payload);
}

AeadEnvelope aead_seal(const AesKey& key, const Iv& iv, BytesView aad, BytesView plaintext) {
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) crypto_failure("ctx alloc");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), iv.data()) != 1)
        crypto_failure("gcm init");

    int len = 0;
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        crypto_failure("gcm aad");

    AeadEnvelope env;
    env.iv = iv;
    env.ciphertext.resize(plaintext.size());
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), env.ciphertext.data(), &len,
                          plaintext.data(), static_cast<int>(plaintext.size())) != 1)
        crypto_failure("gcm encrypt");
    if (EVP_EncryptFinal_ex(ctx.get(), nullptr, &len) != 1)
        crypto_failure("gcm final");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG,
                            static_cast<int>(env.tag.size()), env.tag.data()) != 1)
        crypto_failure("gcm tag");
    return env;
}

std::optional<Bytes> aead_open(const AesKey& key, const AeadEnvelope& env, BytesView aad) {
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) crypto_failure("ctx alloc");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), env.iv.data()) != 1)
        crypto_failure("gcm init");

    int len = 0;
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        crypto_failure("gcm aad");

    Bytes plaintext(env.ciphertext.size());
    if (!env.ciphertext.empty() &&
        EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len,
                          env.ciphertext.data(), static_cast<int>(env.ciphertext.size())) != 1)
        return std::nullopt;

    Tag tag = env.tag;  // the ctrl call wants a mutable buffer
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG,
                            static_cast<int>(tag.size()), tag.data()) != 1)
        crypto_failure("gcm set tag");
    if (EVP_DecryptFinal_ex(ctx.get(), nullptr, &len) != 1)
        return std::nullopt;  // tag mismatch
    return plaintext;
}

Iv make_iv(const std::array<uint8_t, 4>& session_prefix, uint64_t msg_seq) {
    Iv iv{};
    std::copy(session_prefix.begin(), session_prefix.end(), iv.begin());
    for (int i = 0; i < 8; ++i)
        iv[4 + i] = static_cast<uint8_t>(msg_seq >> (56 - 8 * i));
    return iv;
}

Bytes data_aad(const std::string& dev_id, uint16_t sess_ctr, uint64_t msg_seq) {
    Bytes aad = to_bytes(dev_id);
    aad.push_back(0x00);
    append_be16(aad, sess_ctr);
    append_be64(aad, msg_seq);
    return aad;
}

}  // namespace dsekp::crypto
