#include "microcash/chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "microcash/bytes.hpp"

namespace microcash {

namespace {

constexpr std::uint8_t kTxCreate = 1;
constexpr std::uint8_t kTxRedeem = 2;
constexpr std::uint8_t kTxProof = 3;
constexpr std::uint8_t kTxRefund = 4;

void write_params(ByteWriter& w, const EscrowParams& p) {
    w.i64be(p.escrow_balance);
    w.i64be(p.penalty_balance);
    w.f64bits(p.win_probability);
    w.i64be(p.winning_value);
    w.u64be(p.ticket_rate);
    w.u64be(p.draw_len);
    w.u64be(p.d_draw);
    w.u64be(p.d_redeem);
    w.u16be(static_cast<std::uint16_t>(p.merchants.size()));
    for (const auto& m : p.merchants) w.raw(m);
}

std::optional<EscrowParams> read_params(ByteReader& r) {
    EscrowParams p;
    auto eb = r.i64be();
    auto pb = r.i64be();
    auto wp = r.f64bits();
    auto wv = r.i64be();
    auto rate = r.u64be();
    auto dl = r.u64be();
    auto dd = r.u64be();
    auto dr = r.u64be();
    auto nm = r.u16be();
    if (!eb || !pb || !wp || !wv || !rate || !dl || !dd || !dr || !nm) return std::nullopt;
    p.escrow_balance = *eb;
    p.penalty_balance = *pb;
    p.win_probability = *wp;
    p.winning_value = *wv;
    p.ticket_rate = *rate;
    p.draw_len = *dl;
    p.d_draw = *dd;
    p.d_redeem = *dr;
    p.merchants.resize(*nm);
    for (auto& m : p.merchants)
        if (!r.raw(m)) return std::nullopt;
    return p;
}

}  // namespace

std::vector<std::uint8_t> escrow_create_sign_bytes(const EscrowParams& params,
                                                   const PublicKey& customer) {
    ByteWriter w;
    w.u8('E');
    write_params(w, params);
    w.raw(customer);
    return w.take();
}

std::vector<std::uint8_t> redeem_sign_bytes(const LotteryTicket& ticket) {
    ByteWriter w;
    w.u8('R');
    w.raw(encode_ticket(ticket));
    return w.take();
}

std::vector<std::uint8_t> refund_sign_bytes(const Digest& escrow_id, const PublicKey& customer) {
    ByteWriter w;
    w.u8('F');
    w.raw(escrow_id.span());
    w.raw(customer);
    return w.take();
}

std::vector<std::uint8_t> encode_tx(const Transaction& tx) {
    ByteWriter w;
    if (const auto* c = std::get_if<EscrowCreateTx>(&tx)) {
        w.u8(kTxCreate);
        write_params(w, c->params);
        w.raw(c->customer);
        w.raw(c->customer_sig);
    } else if (const auto* rd = std::get_if<RedeemTx>(&tx)) {
        w.u8(kTxRedeem);
        w.raw(encode_ticket(rd->ticket));
        w.raw(rd->merchant_sig);
    } else if (const auto* pr = std::get_if<ProofOfCheatingTx>(&tx)) {
        w.u8(kTxProof);
        w.u16be(static_cast<std::uint16_t>(pr->evidence.size()));
        for (const auto& t : pr->evidence) w.raw(encode_ticket(t));
    } else {
        const auto& rf = std::get<RefundTx>(tx);
        w.u8(kTxRefund);
        w.raw(rf.escrow_id.span());
        w.raw(rf.customer);
        w.raw(rf.customer_sig);
    }
    return w.take();
}

std::optional<Transaction> decode_tx(std::span<const std::uint8_t> wire) {
    ByteReader r(wire);
    auto kind = r.u8();
    if (!kind) return std::nullopt;
    switch (*kind) {
        case kTxCreate: {
            EscrowCreateTx c;
            auto p = read_params(r);
            if (!p || !r.raw(c.customer) || !r.raw(c.customer_sig) || !r.done())
                return std::nullopt;
            c.params = std::move(*p);
            return Transaction{std::move(c)};
        }
        case kTxRedeem: {
            std::array<std::uint8_t, kTicketWireBytes> tb;
            RedeemTx rd;
            if (!r.raw(tb) || !r.raw(rd.merchant_sig) || !r.done()) return std::nullopt;
            auto t = decode_ticket(tb);
            if (!t) return std::nullopt;
            rd.ticket = *t;
            return Transaction{std::move(rd)};
        }
        case kTxProof: {
            auto n = r.u16be();
            if (!n) return std::nullopt;
            ProofOfCheatingTx pr;
            pr.evidence.reserve(*n);
            for (std::uint16_t i = 0; i < *n; ++i) {
                std::array<std::uint8_t, kTicketWireBytes> tb;
                if (!r.raw(tb)) return std::nullopt;
                auto t = decode_ticket(tb);
                if (!t) return std::nullopt;
                pr.evidence.push_back(*t);
            }
            if (!r.done()) return std::nullopt;
            return Transaction{std::move(pr)};
        }
        case kTxRefund: {
            RefundTx rf;
            if (!r.raw(rf.escrow_id.bytes) || !r.raw(rf.customer) || !r.raw(rf.customer_sig) ||
                !r.done())
                return std::nullopt;
            return Transaction{std::move(rf)};
        }
        default: return std::nullopt;
    }
}

std::string_view tx_kind(const Transaction& tx) {
    switch (tx.index()) {
        case 0: return "escrow-create";
        case 1: return "redeem";
        case 2: return "proof-of-cheating";
        case 3: return "refund";
    }
    return "unknown";
}

std::string_view to_string(TxResult r) {
    switch (r) {
        case TxResult::Accepted: return "accepted";
        case TxResult::CheatDetected: return "cheat-detected";
        case TxResult::UnknownEscrow: return "unknown-escrow";
        case TxResult::BadSignature: return "bad-signature";
        case TxResult::InsufficientFunds: return "insufficient-funds";
        case TxResult::BadParams: return "bad-params";
        case TxResult::NonIntegerLifetime: return "non-integer-lifetime";
        case TxResult::NonIntegerWinnerCount: return "non-integer-winner-count";
        case TxResult::DrawLenOutOfRange: return "draw-len-out-of-range";
        case TxResult::LifetimeNotMultiple: return "lifetime-not-multiple-of-draw-len";
        case TxResult::InsufficientPenalty: return "insufficient-penalty";
        case TxResult::EscrowNotActive: return "escrow-not-active";
        case TxResult::UnknownMerchantIndex: return "unknown-merchant-index";
        case TxResult::LotteryNotDrawn: return "lottery-not-drawn";
        case TxResult::NotWinner: return "not-winner";
        case TxResult::Expired: return "expired";
        case TxResult::AlreadyRedeemed: return "already-redeemed";
        case TxResult::TooEarly: return "too-early";
        case TxResult::NotOwner: return "not-owner";
        case TxResult::InvalidEvidence: return "invalid-evidence";
        case TxResult::InsufficientEscrow: return "insufficient-escrow";
    }
    return "unknown";
}

ChainSim::ChainSim(ChainConfig config) : config_(config), rng_(config.seed) {
    Block genesis;
    genesis.height = 0;
    ByteWriter w;
    w.u8(kTagBlockHash);
    w.u64be(0);
    w.raw(genesis.parent_hash.span());
    w.u64be(rng_());
    genesis.block_hash = sha256(w.bytes());
    blocks_.push_back(std::move(genesis));
    stats_.push_back(BlockStats{0, 0, 0, 0});
}

void ChainSim::fund(const PublicKey& account, Amount amount) {
    if (amount < 0) throw std::invalid_argument("fund: negative amount");
    balances_[account] += amount;
    funded_ += amount;
}

const EscrowState* ChainSim::escrow(const Digest& id) const {
    auto it = escrows_.find(id);
    return it == escrows_.end() ? nullptr : &it->second;
}

std::vector<const EscrowState*> ChainSim::escrows() const {
    std::vector<const EscrowState*> out;
    out.reserve(escrow_order_.size());
    for (const auto& id : escrow_order_) out.push_back(&escrows_.at(id));
    return out;
}

Amount ChainSim::balance(const PublicKey& account) const {
    auto it = balances_.find(account);
    return it == balances_.end() ? 0 : it->second;
}

bool ChainSim::conservation_holds() const {
    Amount total = burned_;
    for (const auto& [pk, amt] : balances_) total += amt;
    for (const auto& [id, esc] : escrows_)
        if (esc.status == EscrowStatus::Active || esc.status == EscrowStatus::Breaking)
            total += esc.escrow_left + esc.penalty_left;
    return total == funded_;
}

std::optional<VdfValue> ChainSim::vdf_for_round(std::uint64_t round) const {
    std::uint64_t tip = blocks_.back().height;
    if (round + 1 <= tip) return blocks_[round + 1].parent_vdf;
    if (round > tip) return std::nullopt;
    auto it = vdf_cache_.find(round);
    if (it != vdf_cache_.end()) return it->second;
    VdfValue v = vdf_eval(blocks_[round].block_hash, config_.vdf_iterations);
    vdf_cache_.emplace(round, v);
    return v;
}

const Block& ChainSim::mine_block() {
    std::uint64_t h = blocks_.back().height + 1;
    std::vector<Transaction> pending = std::move(mempool_);
    mempool_.clear();

    Block blk;
    blk.height = h;
    blk.parent_hash = blocks_.back().block_hash;
    BlockStats st{h, 0, 0, 0};

    ByteWriter hasher;
    hasher.u8(kTagBlockHash);
    hasher.u64be(h);
    hasher.raw(blk.parent_hash.span());

    for (auto& tx : pending) {
        auto wire = encode_tx(tx);
        TxResult res = apply(tx, h);
        outcomes_.push_back(TxOutcome{tx, res, h, wire.size()});
        if (tx_applied(res)) {
            hasher.raw(wire);
            st.tx_count += 1;
            st.bytes += wire.size();
            st.fees += config_.claim_fee;
            fees_ += config_.claim_fee;
            blk.transactions.push_back(std::move(tx));
        }
    }
    settle_breaking();

    hasher.u64be(rng_());
    blk.block_hash = sha256(hasher.bytes());
    blk.parent_vdf = vdf_eval(blk.parent_hash, config_.vdf_iterations);
    vdf_cache_.erase(h - 1);
    blocks_.push_back(std::move(blk));
    stats_.push_back(st);
    return blocks_.back();
}

TxResult ChainSim::apply(const Transaction& tx, std::uint64_t height) {
    if (const auto* c = std::get_if<EscrowCreateTx>(&tx)) return apply_create(*c, height);
    if (const auto* rd = std::get_if<RedeemTx>(&tx)) return apply_redeem(*rd, height);
    if (const auto* pr = std::get_if<ProofOfCheatingTx>(&tx)) return apply_proof(*pr, height);
    return apply_refund(std::get<RefundTx>(tx), height);
}

TxResult ChainSim::apply_create(const EscrowCreateTx& tx, std::uint64_t height) {
    const EscrowParams& p = tx.params;
    if (!verify(tx.customer, escrow_create_sign_bytes(p, tx.customer), tx.customer_sig))
        return TxResult::BadSignature;
    if (p.escrow_balance <= 0 || p.penalty_balance < 0 || p.winning_value <= 0 ||
        p.ticket_rate == 0 || p.win_probability <= 0 || p.win_probability >= 1 ||
        p.d_draw == 0 || p.d_redeem == 0 || p.merchants.empty() ||
        p.merchants.size() > 0xffff)
        return TxResult::BadParams;
    if (p.draw_len == 0 || p.draw_len > config_.max_draw_len)
        return TxResult::DrawLenOutOfRange;

    // l_esc = B_escrow / (beta * p * tkt_rate), integer by construction.
    double per_round_d =
        to_coins(p.winning_value) * p.win_probability * static_cast<double>(p.ticket_rate);
    Amount per_round = static_cast<Amount>(std::llround(per_round_d * kCoin));
    if (per_round <= 0) return TxResult::BadParams;
    if (std::fabs(per_round_d * kCoin - static_cast<double>(per_round)) > 1e-3)
        return TxResult::NonIntegerLifetime;
    if (p.escrow_balance % per_round != 0) return TxResult::NonIntegerLifetime;
    std::uint64_t lifetime = static_cast<std::uint64_t>(p.escrow_balance / per_round);
    if (lifetime == 0) return TxResult::NonIntegerLifetime;

    // p * tkt_rate * draw_len winners per draw must be a whole number.
    double winners_d =
        p.win_probability * static_cast<double>(p.ticket_rate * p.draw_len);
    if (std::fabs(winners_d - std::round(winners_d)) > 1e-9 || std::round(winners_d) < 1)
        return TxResult::NonIntegerWinnerCount;

    if (lifetime % p.draw_len != 0) return TxResult::LifetimeNotMultiple;

    double bound = penalty_lower_bound_exact(game_params_for(p, lifetime));
    if (!(to_coins(p.penalty_balance) > bound)) return TxResult::InsufficientPenalty;

    Amount needed = p.escrow_balance + p.penalty_balance;
    auto bal = balances_.find(tx.customer);
    if (bal == balances_.end() || bal->second < needed) return TxResult::InsufficientFunds;
    bal->second -= needed;

    ByteWriter idw;
    idw.raw(encode_tx(Transaction{tx}));
    idw.u64be(rng_());
    Digest id = sha256(idw.bytes());

    EscrowState esc;
    esc.id = id;
    esc.params = p;
    esc.customer = tx.customer;
    esc.escrow_left = p.escrow_balance;
    esc.penalty_left = p.penalty_balance;
    esc.lifetime_rounds = lifetime;
    esc.first_issue_round = height + config_.confirmation_depth + 1;
    esc.refund_round =
        esc.first_issue_round + lifetime - 1 + p.d_draw + p.d_redeem;
    escrows_.emplace(id, std::move(esc));
    escrow_order_.push_back(id);
    return TxResult::Accepted;
}

bool ChainSim::winning(const EscrowState& esc, std::uint64_t seqno, std::uint64_t height,
                       std::uint64_t* t_draw_out) const {
    std::uint64_t own_round = esc.first_issue_round + seqno / esc.params.ticket_rate;
    auto t_draw = draw_round_for(own_round, esc.schedule());
    if (!t_draw) return false;
    if (t_draw_out) *t_draw_out = *t_draw;
    // The VDF must come from an already-sealed block; during mining of
    // `height` the tip is height-1.
    if (*t_draw >= height) return false;
    auto vdf = vdf_for_round(*t_draw);
    if (!vdf) return false;
    std::uint64_t group = (own_round - esc.first_issue_round) / esc.params.draw_len;
    std::uint64_t per_group = esc.params.draw_len * esc.params.ticket_rate;
    std::uint64_t lo = group * per_group;
    auto winners = winning_set(*vdf, esc.id, lo, lo + per_group - 1, esc.winners_per_draw());
    return std::binary_search(winners.begin(), winners.end(), seqno);
}

std::optional<std::vector<std::uint64_t>> ChainSim::draw_result(const Digest& escrow_id,
                                                                std::uint64_t issue_round) const {
    const EscrowState* esc = escrow(escrow_id);
    if (!esc) return std::nullopt;
    auto t_draw = draw_round_for(issue_round, esc->schedule());
    if (!t_draw) return std::nullopt;
    auto vdf = vdf_for_round(*t_draw);
    if (!vdf) return std::nullopt;
    std::uint64_t group = (issue_round - esc->first_issue_round) / esc->params.draw_len;
    std::uint64_t per_group = esc->params.draw_len * esc->params.ticket_rate;
    std::uint64_t lo = group * per_group;
    return winning_set(*vdf, esc->id, lo, lo + per_group - 1, esc->winners_per_draw());
}

void ChainSim::pay_duplicate(EscrowState& esc, std::uint64_t seqno, std::uint16_t index) {
    Amount owed = esc.params.winning_value;
    Amount from_escrow = std::min(owed, esc.escrow_left);
    esc.escrow_left -= from_escrow;
    Amount from_penalty = std::min(owed - from_escrow, esc.penalty_left);
    esc.penalty_left -= from_penalty;
    balances_[esc.params.merchants[index]] += from_escrow + from_penalty;
    esc.paid[seqno].push_back(index);
}

TxResult ChainSim::apply_redeem(const RedeemTx& tx, std::uint64_t height) {
    const LotteryTicket& tkt = tx.ticket;
    auto it = escrows_.find(tkt.escrow_id);
    if (it == escrows_.end()) return TxResult::UnknownEscrow;
    EscrowState& esc = it->second;
    if (esc.status == EscrowStatus::Broken || esc.status == EscrowStatus::Closed)
        return TxResult::EscrowNotActive;
    if (tkt.merchant_index >= esc.params.merchants.size())
        return TxResult::UnknownMerchantIndex;

    if (tkt.seqno >= esc.seqno_limit()) {
        // A signed over-limit ticket is itself proof of cheating.
        if (!ticket_sig_valid(tkt, esc.customer)) return TxResult::BadSignature;
        if (esc.status == EscrowStatus::Active) esc.status = EscrowStatus::Breaking;
        return TxResult::CheatDetected;
    }
    if (!ticket_sig_valid(tkt, esc.customer)) return TxResult::BadSignature;

    std::uint64_t t_draw = 0;
    if (!winning(esc, tkt.seqno, height, &t_draw)) {
        if (t_draw >= height) return TxResult::LotteryNotDrawn;
        return TxResult::NotWinner;
    }
    if (height > expire_round(t_draw, esc.schedule())) return TxResult::Expired;

    const PublicKey& merchant_pk = esc.params.merchants[tkt.merchant_index];
    if (!verify(merchant_pk, redeem_sign_bytes(tkt), tx.merchant_sig))
        return TxResult::BadSignature;

    auto first = esc.redeemed.find(tkt.seqno);
    if (first != esc.redeemed.end()) {
        if (first->second.merchant_index == tkt.merchant_index ||
            esc.paid_to(tkt.seqno, tkt.merchant_index))
            return TxResult::AlreadyRedeemed;
        // Duplicate issuance caught in-band: break the escrow and pay this
        // winner too, so every holder of a duplicated winning seqno collects.
        esc.status = EscrowStatus::Breaking;
        pay_duplicate(esc, tkt.seqno, tkt.merchant_index);
        return TxResult::CheatDetected;
    }

    // Breaking settles at block seal; claims already in flight this block
    // still redeem normally against the remaining payment escrow.
    if (esc.escrow_left < esc.params.winning_value) return TxResult::InsufficientEscrow;
    esc.escrow_left -= esc.params.winning_value;
    balances_[merchant_pk] += esc.params.winning_value;
    esc.redeemed.emplace(tkt.seqno, tkt);
    esc.paid[tkt.seqno].push_back(tkt.merchant_index);
    return TxResult::Accepted;
}

TxResult ChainSim::apply_proof(const ProofOfCheatingTx& tx, std::uint64_t height) {
    if (tx.evidence.empty()) return TxResult::InvalidEvidence;
    auto it = escrows_.find(tx.evidence[0].escrow_id);
    if (it == escrows_.end()) return TxResult::UnknownEscrow;
    EscrowState& esc = it->second;
    for (const auto& t : tx.evidence)
        if (t.escrow_id != esc.id) return TxResult::InvalidEvidence;
    if (esc.status != EscrowStatus::Active) return TxResult::EscrowNotActive;

    // Case one: a signed ticket whose seqno can never be issued honestly.
    for (const auto& t : tx.evidence) {
        if (t.seqno >= esc.seqno_limit() && ticket_sig_valid(t, esc.customer)) {
            esc.status = EscrowStatus::Breaking;
            return TxResult::CheatDetected;
        }
    }

    // Case two: two validly signed tickets sharing a seqno but naming
    // different merchants.
    for (std::size_t i = 0; i < tx.evidence.size(); ++i) {
        for (std::size_t j = i + 1; j < tx.evidence.size(); ++j) {
            const auto& a = tx.evidence[i];
            const auto& b = tx.evidence[j];
            if (a.seqno != b.seqno || a.merchant_index == b.merchant_index) continue;
            if (a.merchant_index >= esc.params.merchants.size() ||
                b.merchant_index >= esc.params.merchants.size())
                continue;
            if (!ticket_sig_valid(a, esc.customer) || !ticket_sig_valid(b, esc.customer))
                continue;
            esc.status = EscrowStatus::Breaking;
            // Pay every distinct winner of a duplicated seqno in the evidence.
            for (const auto& t : tx.evidence) {
                if (t.merchant_index >= esc.params.merchants.size()) continue;
                if (!ticket_sig_valid(t, esc.customer)) continue;
                bool duplicated = false;
                for (const auto& u : tx.evidence) {
                    if (u.seqno == t.seqno && u.merchant_index != t.merchant_index &&
                        u.merchant_index < esc.params.merchants.size() &&
                        ticket_sig_valid(u, esc.customer)) {
                        duplicated = true;
                        break;
                    }
                }
                if (!duplicated) continue;
                if (esc.paid_to(t.seqno, t.merchant_index)) continue;
                if (!winning(esc, t.seqno, height, nullptr)) continue;
                pay_duplicate(esc, t.seqno, t.merchant_index);
            }
            return TxResult::CheatDetected;
        }
    }
    return TxResult::InvalidEvidence;
}

TxResult ChainSim::apply_refund(const RefundTx& tx, std::uint64_t height) {
    auto it = escrows_.find(tx.escrow_id);
    if (it == escrows_.end()) return TxResult::UnknownEscrow;
    EscrowState& esc = it->second;
    if (esc.status != EscrowStatus::Active) return TxResult::EscrowNotActive;
    if (tx.customer != esc.customer) return TxResult::NotOwner;
    if (!verify(tx.customer, refund_sign_bytes(tx.escrow_id, tx.customer), tx.customer_sig))
        return TxResult::BadSignature;
    if (height < esc.refund_round) return TxResult::TooEarly;
    balances_[esc.customer] += esc.escrow_left + esc.penalty_left;
    esc.escrow_left = 0;
    esc.penalty_left = 0;
    esc.status = EscrowStatus::Closed;
    return TxResult::Accepted;
}

void ChainSim::settle_breaking() {
    for (auto& [id, esc] : escrows_) {
        if (esc.status != EscrowStatus::Breaking) continue;
        // Remaining penalty is destroyed; the untouched part of the payment
        // escrow goes back to the customer.
        burned_ += esc.penalty_left;
        esc.penalty_left = 0;
        balances_[esc.customer] += esc.escrow_left;
        esc.escrow_left = 0;
        esc.status = EscrowStatus::Broken;
    }
}

namespace {

nlohmann::ordered_json json_vdf(const VdfValue& v) {
    return {{"value", to_hex(v.value.span())}, {"iterations", v.iterations}};
}

std::string_view status_name(EscrowStatus s) {
    switch (s) {
        case EscrowStatus::Active: return "active";
        case EscrowStatus::Breaking: return "breaking";
        case EscrowStatus::Broken: return "broken";
        case EscrowStatus::Closed: return "closed";
    }
    return "unknown";
}

}  // namespace

std::string ChainSim::export_snapshot() const {
    nlohmann::ordered_json doc;
    doc["config"] = {{"vdf_iterations", config_.vdf_iterations},
                     {"max_draw_len", config_.max_draw_len},
                     {"confirmation_depth", config_.confirmation_depth},
                     {"claim_fee_micro", config_.claim_fee},
                     {"seed", config_.seed}};
    doc["funded_micro"] = funded_;
    doc["burned_micro"] = burned_;
    doc["fees_micro"] = fees_;

    auto& jblocks = doc["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : blocks_) {
        nlohmann::ordered_json jb;
        jb["height"] = b.height;
        jb["parent_hash"] = to_hex(b.parent_hash.span());
        jb["block_hash"] = to_hex(b.block_hash.span());
        jb["parent_vdf"] = json_vdf(b.parent_vdf);
        auto& jtx = jb["transactions"] = nlohmann::ordered_json::array();
        for (const auto& tx : b.transactions) jtx.push_back(to_hex(encode_tx(tx)));
        jblocks.push_back(std::move(jb));
    }

    auto& jesc = doc["escrows"] = nlohmann::ordered_json::array();
    for (const auto& id : escrow_order_) {
        const EscrowState& e = escrows_.at(id);
        nlohmann::ordered_json je;
        je["id"] = to_hex(e.id.span());
        je["customer"] = to_hex(e.customer);
        je["status"] = status_name(e.status);
        je["escrow_left_micro"] = e.escrow_left;
        je["penalty_left_micro"] = e.penalty_left;
        je["win_probability"] = e.params.win_probability;
        je["winning_value_micro"] = e.params.winning_value;
        je["ticket_rate"] = e.params.ticket_rate;
        je["draw_len"] = e.params.draw_len;
        je["d_draw"] = e.params.d_draw;
        je["d_redeem"] = e.params.d_redeem;
        je["first_issue_round"] = e.first_issue_round;
        je["lifetime_rounds"] = e.lifetime_rounds;
        je["refund_round"] = e.refund_round;
        auto& jm = je["merchants"] = nlohmann::ordered_json::array();
        for (const auto& m : e.params.merchants) jm.push_back(to_hex(m));
        auto& jr = je["redeemed_seqnos"] = nlohmann::ordered_json::array();
        for (const auto& [s, t] : e.redeemed) jr.push_back(s);
        auto& jp = je["paid"] = nlohmann::ordered_json::array();
        for (const auto& [s, idxs] : e.paid) {
            nlohmann::ordered_json row;
            row["seqno"] = s;
            row["merchants"] = idxs;
            jp.push_back(std::move(row));
        }
        jesc.push_back(std::move(je));
    }

    auto& jbal = doc["balances_micro"] = nlohmann::ordered_json::array();
    for (const auto& [pk, amt] : balances_) {
        nlohmann::ordered_json row;
        row["account"] = to_hex(pk);
        row["amount"] = amt;
        jbal.push_back(std::move(row));
    }
    return doc.dump(2);
}

namespace {

Digest digest_from_hex(const std::string& hex) {
    auto raw = from_hex(hex);
    if (!raw || raw->size() != 32) throw std::runtime_error("snapshot: bad digest field");
    Digest d;
    std::copy(raw->begin(), raw->end(), d.bytes.begin());
    return d;
}

}  // namespace

ChainSnapshot import_snapshot(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("snapshot: ") + e.what());
    }
    ChainSnapshot snap;
    try {
        snap.vdf_iterations = doc.at("config").at("vdf_iterations").get<std::uint64_t>();
        for (const auto& jb : doc.at("blocks")) {
            SnapshotBlock b;
            b.height = jb.at("height").get<std::uint64_t>();
            b.block_hash = digest_from_hex(jb.at("block_hash").get<std::string>());
            const auto& jv = jb.at("parent_vdf");
            b.parent_vdf.value = digest_from_hex(jv.at("value").get<std::string>());
            b.parent_vdf.iterations = jv.at("iterations").get<std::uint64_t>();
            snap.blocks.push_back(b);
        }
        for (const auto& je : doc.at("escrows")) {
            SnapshotEscrow e;
            e.id = digest_from_hex(je.at("id").get<std::string>());
            e.win_probability = je.at("win_probability").get<double>();
            e.ticket_rate = je.at("ticket_rate").get<std::uint64_t>();
            e.draw_len = je.at("draw_len").get<std::uint64_t>();
            e.d_draw = je.at("d_draw").get<std::uint64_t>();
            e.d_redeem = je.at("d_redeem").get<std::uint64_t>();
            e.first_issue_round = je.at("first_issue_round").get<std::uint64_t>();
            e.lifetime_rounds = je.at("lifetime_rounds").get<std::uint64_t>();
            snap.escrows.push_back(e);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("snapshot: ") + e.what());
    }
    return snap;
}

}  // namespace microcash
