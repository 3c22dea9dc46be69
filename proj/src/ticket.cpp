#include "microcash/ticket.hpp"

#include <algorithm>

#include "microcash/bytes.hpp"

namespace microcash {

std::array<std::uint8_t, kTicketSignBytes> ticket_sign_bytes(std::uint16_t merchant_index,
                                                             const Digest& escrow_id,
                                                             std::uint64_t seqno) {
    std::array<std::uint8_t, kTicketSignBytes> out;
    out[0] = static_cast<std::uint8_t>(merchant_index >> 8);
    out[1] = static_cast<std::uint8_t>(merchant_index);
    std::copy(escrow_id.bytes.begin(), escrow_id.bytes.end(), out.begin() + 2);
    for (int i = 0; i < 8; ++i)
        out[34 + i] = static_cast<std::uint8_t>(seqno >> (56 - 8 * i));
    return out;
}

LotteryTicket make_ticket(const SecretKey& sk, std::uint16_t merchant_index,
                          const Digest& escrow_id, std::uint64_t seqno) {
    LotteryTicket tkt{merchant_index, escrow_id, seqno, {}};
    auto msg = ticket_sign_bytes(merchant_index, escrow_id, seqno);
    tkt.customer_sig = sign(sk, msg);
    return tkt;
}

bool ticket_sig_valid(const LotteryTicket& tkt, const PublicKey& customer_pk) {
    auto msg = ticket_sign_bytes(tkt.merchant_index, tkt.escrow_id, tkt.seqno);
    return verify(customer_pk, msg, tkt.customer_sig);
}

std::array<std::uint8_t, kTicketWireBytes> encode_ticket(const LotteryTicket& tkt) {
    std::array<std::uint8_t, kTicketWireBytes> out;
    auto head = ticket_sign_bytes(tkt.merchant_index, tkt.escrow_id, tkt.seqno);
    std::copy(head.begin(), head.end(), out.begin());
    std::copy(tkt.customer_sig.begin(), tkt.customer_sig.end(), out.begin() + kTicketSignBytes);
    return out;
}

std::optional<LotteryTicket> decode_ticket(std::span<const std::uint8_t> wire) {
    if (wire.size() != kTicketWireBytes) return std::nullopt;
    ByteReader r(wire);
    LotteryTicket tkt;
    tkt.merchant_index = *r.u16be();
    r.raw(tkt.escrow_id.bytes);
    tkt.seqno = *r.u64be();
    r.raw(tkt.customer_sig);
    return tkt;
}

std::vector<std::uint8_t> encode_evidence(std::span<const LotteryTicket> tickets) {
    std::vector<std::uint8_t> out;
    out.reserve(tickets.size() * kTicketWireBytes);
    for (const auto& tkt : tickets) {
        auto wire = encode_ticket(tkt);
        out.insert(out.end(), wire.begin(), wire.end());
    }
    return out;
}

std::optional<std::vector<LotteryTicket>> decode_evidence(std::span<const std::uint8_t> wire) {
    if (wire.size() % kTicketWireBytes != 0) return std::nullopt;
    std::vector<LotteryTicket> out;
    for (std::size_t off = 0; off < wire.size(); off += kTicketWireBytes) {
        auto tkt = decode_ticket(wire.subspan(off, kTicketWireBytes));
        if (!tkt) return std::nullopt;
        out.push_back(*tkt);
    }
    return out;
}

}  // namespace microcash
