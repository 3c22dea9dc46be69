#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "microcash/crypto.hpp"
#include "microcash/lottery.hpp"
#include "microcash/ticket.hpp"

namespace microcash {

//! Currency in integer micro-coins. Balances are exact; analytic bounds use
//! doubles and are converted at the edges.
using Amount = std::int64_t;
inline constexpr Amount kCoin = 1'000'000;

inline Amount coins(double c) { return static_cast<Amount>(std::llround(c * kCoin)); }
inline double to_coins(Amount a) { return static_cast<double>(a) / kCoin; }

//! Customer-chosen escrow setup, as carried by the creation transaction.
struct EscrowParams {
    Amount escrow_balance = 0;   // B_escrow
    Amount penalty_balance = 0;  // B_penalty
    double win_probability = 0;  // p
    Amount winning_value = 0;    // beta
    std::uint64_t ticket_rate = 0;
    std::uint64_t draw_len = 1;
    std::uint64_t d_draw = 1;
    std::uint64_t d_redeem = 1;
    std::vector<PublicKey> merchants;  // index == position
};

enum class EscrowStatus {
    Active,
    Breaking,  // proof-of-cheating seen in the block being mined; settles at seal
    Broken,
    Closed,
};

//! Miner-side state of one payment+penalty escrow pair.
struct EscrowState {
    Digest id;
    EscrowParams params;
    PublicKey customer{};
    Amount escrow_left = 0;
    Amount penalty_left = 0;
    std::uint64_t lifetime_rounds = 0;  // l_esc
    std::uint64_t first_issue_round = 0;
    std::uint64_t refund_round = 0;  // t_refund
    EscrowStatus status = EscrowStatus::Active;
    //! seqno -> first redeemed ticket (kept as duplicate-issuance evidence).
    std::map<std::uint64_t, LotteryTicket> redeemed;
    //! (seqno, merchant index) pairs already paid, incl. duplicate payouts.
    std::map<std::uint64_t, std::vector<std::uint16_t>> paid;

    DrawSchedule schedule() const {
        return DrawSchedule{first_issue_round, lifetime_rounds, params.draw_len, params.d_draw,
                            params.d_redeem};
    }

    //! One past the largest valid seqno.
    std::uint64_t seqno_limit() const { return lifetime_rounds * params.ticket_rate; }

    std::uint64_t winners_per_draw() const {
        return static_cast<std::uint64_t>(std::llround(
            params.win_probability * static_cast<double>(params.ticket_rate * params.draw_len)));
    }

    bool paid_to(std::uint64_t seqno, std::uint16_t index) const {
        auto it = paid.find(seqno);
        if (it == paid.end()) return false;
        for (auto i : it->second)
            if (i == index) return true;
        return false;
    }
};

}  // namespace microcash
