#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace microcash {

//! 32-byte SHA-256 digest. Equality is byte equality.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};
    auto operator<=>(const Digest&) const = default;
    std::span<const std::uint8_t> span() const { return bytes; }
};

//! Output of the iterated-hash delay function together with the iteration
//! count used to produce it.
struct VdfValue {
    Digest value;
    std::uint64_t iterations = 0;
    auto operator<=>(const VdfValue&) const = default;
};

using PublicKey = std::array<std::uint8_t, 32>;
using SecretKey = std::array<std::uint8_t, 64>;
using Signature = std::array<std::uint8_t, 64>;

struct KeyPair {
    PublicKey pk{};
    SecretKey sk{};
};

// Domain-separation tags. One hash function, three roles.
inline constexpr std::uint8_t kTagBlockHash = 0x01;
inline constexpr std::uint8_t kTagLotteryChain = 0x02;
inline constexpr std::uint8_t kTagTicketHash = 0x03;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts);

//! hash applied `iterations` times starting from `seed`. iterations must be >= 1.
VdfValue vdf_eval(const Digest& seed, std::uint64_t iterations);

KeyPair keypair_gen();
//! Deterministic keypair for simulated agents.
KeyPair keypair_from_seed(std::uint64_t seed);

Signature sign(const SecretKey& sk, std::span<const std::uint8_t> msg);
bool verify(const PublicKey& pk, std::span<const std::uint8_t> msg, const Signature& sig);

//! Instrumented operation counters (cumulative, process-wide).
struct OpCounts {
    std::uint64_t hashes = 0;
    std::uint64_t signs = 0;
    std::uint64_t verifies = 0;
};
OpCounts op_counts();
void reset_op_counts();

}  // namespace microcash
