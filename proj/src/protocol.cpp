#include "microcash/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace microcash {

std::optional<SeqRange> seq_range(const EscrowState& escrow, std::uint64_t round) {
    const auto sched = escrow.schedule();
    if (!sched.in_window(round)) return std::nullopt;
    std::uint64_t k = round - escrow.first_issue_round;
    std::uint64_t lo = k * escrow.params.ticket_rate;
    return SeqRange{lo, lo + escrow.params.ticket_rate - 1};
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::None: return "none";
        case RejectReason::EscrowBroken: return "escrow-broken";
        case RejectReason::WrongMerchantIndex: return "wrong-merchant-index";
        case RejectReason::OutOfSchedule: return "out-of-schedule";
        case RejectReason::DrawPassed: return "draw-passed";
        case RejectReason::BadSignature: return "bad-signature";
    }
    return "unknown";
}

VerifyOutcome verify_ticket(const LotteryTicket& tkt, const EscrowState& escrow,
                            std::uint64_t current_round,
                            std::optional<std::uint16_t> expected_index) {
    if (escrow.status != EscrowStatus::Active)
        return {TicketVerdict::Reject, RejectReason::EscrowBroken};

    if (expected_index) {
        if (tkt.merchant_index != *expected_index)
            return {TicketVerdict::Reject, RejectReason::WrongMerchantIndex};
    }
    if (tkt.merchant_index >= escrow.params.merchants.size())
        return {TicketVerdict::Reject, RejectReason::WrongMerchantIndex};

    if (tkt.seqno >= escrow.seqno_limit()) {
        // Out-of-range seqno: punishable if signed, regardless of timing.
        if (ticket_sig_valid(tkt, escrow.customer))
            return {TicketVerdict::CheatEvidence, RejectReason::None};
        return {TicketVerdict::Reject, RejectReason::BadSignature};
    }

    std::uint64_t own_round = escrow.first_issue_round + tkt.seqno / escrow.params.ticket_rate;
    std::uint64_t diff = own_round > current_round ? own_round - current_round
                                                   : current_round - own_round;
    if (diff > 1) return {TicketVerdict::Reject, RejectReason::OutOfSchedule};

    auto t_draw = draw_round_for(own_round, escrow.schedule());
    if (t_draw && *t_draw < current_round)
        return {TicketVerdict::Reject, RejectReason::DrawPassed};

    if (!ticket_sig_valid(tkt, escrow.customer))
        return {TicketVerdict::Reject, RejectReason::BadSignature};
    return {TicketVerdict::Accept, RejectReason::None};
}

LotteryTicket IssueCursor::issue(const SecretKey& sk, std::uint16_t index, std::uint64_t round) {
    if (index >= escrow_->params.merchants.size())
        throw std::invalid_argument("issue: merchant index not listed in escrow");
    auto range = seq_range(*escrow_, round);
    if (!range) throw std::out_of_range("issue: round outside the issuance window");
    std::uint64_t seqno = std::max(next_seqno_, range->lo);
    if (seqno > range->hi) throw std::out_of_range("issue: round's seqno range exhausted");
    next_seqno_ = seqno + 1;
    return make_ticket(sk, index, escrow_->id, seqno);
}

std::uint64_t IssueCursor::remaining(std::uint64_t round) const {
    auto range = seq_range(*escrow_, round);
    if (!range) return 0;
    std::uint64_t next = std::max(next_seqno_, range->lo);
    return next > range->hi ? 0 : range->hi - next + 1;
}

std::vector<LotteryTicket> batch_issue(const SecretKey& sk, const Digest& escrow_id,
                                       std::uint64_t seqno_lo,
                                       const std::vector<std::uint16_t>& recipients,
                                       bool parallel) {
    std::vector<LotteryTicket> out(recipients.size());
    const std::int64_t n = static_cast<std::int64_t>(recipients.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < n; ++i)
        out[i] = make_ticket(sk, recipients[i], escrow_id, seqno_lo + static_cast<std::uint64_t>(i));
    return out;
}

std::vector<std::uint8_t> batch_sig_check(const std::vector<LotteryTicket>& tickets,
                                          const PublicKey& customer_pk, bool parallel) {
    std::vector<std::uint8_t> out(tickets.size());
    const std::int64_t n = static_cast<std::int64_t>(tickets.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < n; ++i)
        out[i] = ticket_sig_valid(tickets[i], customer_pk) ? 1 : 0;
    return out;
}

}  // namespace microcash
