#include "microcash/crypto.hpp"

#include <sodium.h>

#include <atomic>
#include <stdexcept>

#include "microcash/bytes.hpp"

namespace microcash {

namespace {

std::atomic<std::uint64_t> g_hashes{0};
std::atomic<std::uint64_t> g_signs{0};
std::atomic<std::uint64_t> g_verifies{0};

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("sodium_init failed");
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
    ensure_sodium();
    Digest out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    g_hashes.fetch_add(1, std::memory_order_relaxed);
    return out;
}

Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts) {
    ensure_sodium();
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    for (const auto& part : parts)
        crypto_hash_sha256_update(&st, part.data(), part.size());
    Digest out;
    crypto_hash_sha256_final(&st, out.bytes.data());
    g_hashes.fetch_add(1, std::memory_order_relaxed);
    return out;
}

VdfValue vdf_eval(const Digest& seed, std::uint64_t iterations) {
    if (iterations == 0) throw std::invalid_argument("vdf_eval: iterations must be >= 1");
    Digest cur = seed;
    for (std::uint64_t i = 0; i < iterations; ++i) cur = sha256(cur.span());
    return VdfValue{cur, iterations};
}

KeyPair keypair_gen() {
    ensure_sodium();
    KeyPair kp;
    crypto_sign_keypair(kp.pk.data(), kp.sk.data());
    return kp;
}

KeyPair keypair_from_seed(std::uint64_t seed) {
    ensure_sodium();
    ByteWriter w;
    w.u8(0x4b);  // key-derivation tag, not one of the three protocol roles
    w.u64be(seed);
    Digest d = sha256(w.bytes());
    KeyPair kp;
    crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), d.bytes.data());
    return kp;
}

Signature sign(const SecretKey& sk, std::span<const std::uint8_t> msg) {
    ensure_sodium();
    Signature sig;
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
    g_signs.fetch_add(1, std::memory_order_relaxed);
    return sig;
}

bool verify(const PublicKey& pk, std::span<const std::uint8_t> msg, const Signature& sig) {
    ensure_sodium();
    g_verifies.fetch_add(1, std::memory_order_relaxed);
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

OpCounts op_counts() {
    return OpCounts{g_hashes.load(), g_signs.load(), g_verifies.load()};
}

void reset_op_counts() {
    g_hashes = 0;
    g_signs = 0;
    g_verifies = 0;
}

std::string to_hex(std::span<const std::uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

}  // namespace microcash
