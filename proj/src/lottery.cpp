#include "microcash/lottery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "microcash/bytes.hpp"

namespace microcash {

std::optional<std::uint64_t> draw_round_for(std::uint64_t issue_round, const DrawSchedule& sched) {
    if (!sched.in_window(issue_round)) return std::nullopt;
    std::uint64_t group = (issue_round - sched.first_issue_round) / sched.draw_len;
    return sched.first_issue_round + (group + 1) * sched.draw_len - 1 + sched.d_draw;
}

std::uint64_t expire_round(std::uint64_t t_draw, const DrawSchedule& sched) {
    return t_draw + sched.d_redeem;
}

std::uint64_t digest_mod_range(const Digest& d, std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw std::invalid_argument("digest_mod_range: empty range");
    // size <= 2^64, so it may be hi-lo+1 == 0 only on the full 64-bit range,
    // which no escrow can reach (seqnos are bounded by lifetime * rate).
    std::uint64_t size = hi - lo + 1;
    if (size == 0) throw std::invalid_argument("digest_mod_range: range too large");
    unsigned __int128 rem = 0;
    for (std::uint8_t b : d.bytes) rem = (rem << 8 | b) % size;
    return lo + static_cast<std::uint64_t>(rem);
}

std::vector<std::uint64_t> winning_set(const VdfValue& vdf, const Digest& escrow_id,
                                       std::uint64_t lo, std::uint64_t hi,
                                       std::uint64_t n_winners) {
    if (hi < lo) throw std::invalid_argument("winning_set: empty range");
    std::uint64_t size = hi - lo + 1;
    if (n_winners == 0 || n_winners > size)
        throw std::invalid_argument("winning_set: n_winners out of range");

    std::array<std::uint8_t, 1> tag{kTagLotteryChain};
    Digest h = sha256({tag, vdf.value.span(), escrow_id.span()});
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(n_winners * 2);
    while (true) {
        seen.insert(digest_mod_range(h, lo, hi));  // collisions are simply skipped
        if (seen.size() == n_winners) break;
        h = sha256(h.span());
    }
    std::vector<std::uint64_t> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool is_winner_independent(const Digest& escrow_id, std::uint64_t seqno, const VdfValue& vdf,
                           double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("is_winner_independent: bad p");
    std::array<std::uint8_t, 1> tag{kTagTicketHash};
    ByteWriter w;
    w.u64be(seqno);
    Digest h = sha256({tag, escrow_id.span(), w.bytes(), vdf.value.span()});
    std::uint64_t word = 0;
    for (int i = 28; i < 32; ++i) word = word << 8 | h.bytes[i];
    std::uint64_t threshold =
        static_cast<std::uint64_t>(std::floor(std::ldexp(p, 32)));
    return word < threshold;
}

std::uint64_t count_winners_independent(const Digest& escrow_id, std::uint64_t seqno_begin,
                                        std::uint64_t seqno_end, const VdfValue& vdf, double p,
                                        bool parallel) {
    std::uint64_t wins = 0;
    if (parallel) {
#pragma omp parallel for reduction(+ : wins) schedule(static)
        for (std::int64_t s = static_cast<std::int64_t>(seqno_begin);
             s < static_cast<std::int64_t>(seqno_end); ++s)
            wins += is_winner_independent(escrow_id, static_cast<std::uint64_t>(s), vdf, p) ? 1 : 0;
    } else {
        for (std::uint64_t s = seqno_begin; s < seqno_end; ++s)
            wins += is_winner_independent(escrow_id, s, vdf, p) ? 1 : 0;
    }
    return wins;
}

}  // namespace microcash
