#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "microcash/crypto.hpp"

namespace microcash {

//! Timing parameters of the draw. Rounds are block heights.
struct DrawSchedule {
    std::uint64_t first_issue_round = 0;
    std::uint64_t lifetime_rounds = 0;  // l_esc
    std::uint64_t draw_len = 1;
    std::uint64_t d_draw = 1;
    std::uint64_t d_redeem = 1;

    bool in_window(std::uint64_t round) const {
        return round >= first_issue_round && round < first_issue_round + lifetime_rounds;
    }
};

//! Draw time of the group containing `issue_round`: the t_draw of the last
//! issuing round in that group. None outside the issuance window.
std::optional<std::uint64_t> draw_round_for(std::uint64_t issue_round, const DrawSchedule& sched);

std::uint64_t expire_round(std::uint64_t t_draw, const DrawSchedule& sched);

//! Reduce a 256-bit digest (big-endian) into [lo, hi].
std::uint64_t digest_mod_range(const Digest& d, std::uint64_t lo, std::uint64_t hi);

//! Exact-win lottery: iterated hash chain seeded from (vdf, escrow id),
//! collision-skipping, stops at n_winners distinct seqnos in [lo, hi].
//! Returned sorted ascending.
std::vector<std::uint64_t> winning_set(const VdfValue& vdf, const Digest& escrow_id,
                                       std::uint64_t lo, std::uint64_t hi,
                                       std::uint64_t n_winners);

//! Independent-win lottery: the low 32-bit word of the ticket hash against
//! a floor(2^32 * p) threshold.
bool is_winner_independent(const Digest& escrow_id, std::uint64_t seqno, const VdfValue& vdf,
                           double p);

//! Count winners over a contiguous seqno range, optionally in parallel.
//! The serial path is the reference; the parallel path must agree exactly.
std::uint64_t count_winners_independent(const Digest& escrow_id, std::uint64_t seqno_begin,
                                        std::uint64_t seqno_end, const VdfValue& vdf, double p,
                                        bool parallel = true);

}  // namespace microcash
