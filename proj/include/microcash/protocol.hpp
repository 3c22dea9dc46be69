#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "microcash/escrow.hpp"

namespace microcash {

struct SeqRange {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;  // inclusive
    bool contains(std::uint64_t s) const { return s >= lo && s <= hi; }
    auto operator<=>(const SeqRange&) const = default;
};

//! Per-round seqno range of the issue schedule; none outside the window.
std::optional<SeqRange> seq_range(const EscrowState& escrow, std::uint64_t round);

enum class TicketVerdict { Accept, Reject, CheatEvidence };

enum class RejectReason {
    None,
    EscrowBroken,
    WrongMerchantIndex,
    OutOfSchedule,
    DrawPassed,
    BadSignature,
};

std::string_view to_string(RejectReason r);

struct VerifyOutcome {
    TicketVerdict verdict = TicketVerdict::Reject;
    RejectReason reason = RejectReason::None;
};

//! Merchant-side ticket verification at `current_round`. Tickets from the
//! prior and next issue round are accepted against their own ranges; a ticket
//! whose own round's draw has already passed is rejected. A validly signed
//! out-of-range seqno escalates to CheatEvidence instead of Reject.
//! `expected_index` is the verifying merchant's own index; pass nullopt for
//! the miner-side check that only requires the index to be listed.
VerifyOutcome verify_ticket(const LotteryTicket& tkt, const EscrowState& escrow,
                            std::uint64_t current_round,
                            std::optional<std::uint16_t> expected_index);

//! Honest customer issuance state: strictly ascending seqnos, one range per
//! round, never reused.
class IssueCursor {
public:
    explicit IssueCursor(const EscrowState& escrow) : escrow_(&escrow) {}

    //! Next ticket for `round`, signed for merchant `index`.
    //! Throws std::out_of_range when the round's range is exhausted or the
    //! round is outside the window; std::invalid_argument for an unlisted index.
    LotteryTicket issue(const SecretKey& sk, std::uint16_t index, std::uint64_t round);

    //! Seqnos still unissued for `round` (0 outside the window).
    std::uint64_t remaining(std::uint64_t round) const;

private:
    const EscrowState* escrow_;
    std::uint64_t next_seqno_ = 0;
};

//! Batch signing of one round's tickets, recipients fixed by the caller.
//! The parallel path shards the signing loop; output is identical either way.
std::vector<LotteryTicket> batch_issue(const SecretKey& sk, const Digest& escrow_id,
                                       std::uint64_t seqno_lo,
                                       const std::vector<std::uint16_t>& recipients,
                                       bool parallel = true);

//! Batch signature verification; out[i] == ticket_sig_valid(tickets[i], pk).
std::vector<std::uint8_t> batch_sig_check(const std::vector<LotteryTicket>& tickets,
                                          const PublicKey& customer_pk, bool parallel = true);

}  // namespace microcash
