#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "microcash/crypto.hpp"

namespace microcash {

//! Wire layout: index_M(2) || id_esc(32) || seqno(8, big-endian) || sigma_C(64).
inline constexpr std::size_t kTicketWireBytes = 106;
//! The signed message is the ticket minus its own signature.
inline constexpr std::size_t kTicketSignBytes = 42;

struct LotteryTicket {
    std::uint16_t merchant_index = 0;
    Digest escrow_id;
    std::uint64_t seqno = 0;
    Signature customer_sig{};

    auto operator<=>(const LotteryTicket&) const = default;
};

std::array<std::uint8_t, kTicketSignBytes> ticket_sign_bytes(std::uint16_t merchant_index,
                                                             const Digest& escrow_id,
                                                             std::uint64_t seqno);

LotteryTicket make_ticket(const SecretKey& sk, std::uint16_t merchant_index,
                          const Digest& escrow_id, std::uint64_t seqno);

//! Signature check against the escrow owner's key.
bool ticket_sig_valid(const LotteryTicket& tkt, const PublicKey& customer_pk);

std::array<std::uint8_t, kTicketWireBytes> encode_ticket(const LotteryTicket& tkt);
//! Requires exactly 106 bytes; anything else is a decode error.
std::optional<LotteryTicket> decode_ticket(std::span<const std::uint8_t> wire);

//! CheatEvidence serialization: concatenation of the offending encoded tickets.
std::vector<std::uint8_t> encode_evidence(std::span<const LotteryTicket> tickets);
std::optional<std::vector<LotteryTicket>> decode_evidence(std::span<const std::uint8_t> wire);

}  // namespace microcash
