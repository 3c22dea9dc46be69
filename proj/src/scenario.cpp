#include "microcash/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "microcash/bytes.hpp"
#include "microcash/economics.hpp"
#include "microcash/protocol.hpp"

namespace microcash {

std::string_view to_string(AdversaryKind k) {
    switch (k) {
        case AdversaryKind::None: return "none";
        case AdversaryKind::DuplicateTickets: return "duplicate-tickets";
        case AdversaryKind::OutOfRangeSeqno: return "out-of-range-seqno";
        case AdversaryKind::EarlyRefundAttempt: return "early-refund-attempt";
        case AdversaryKind::WithholdClaims: return "withhold-claims";
    }
    return "unknown";
}

void validate_config(const ScenarioConfig& cfg) {
    if (!(cfg.p > 0.0) || !(cfg.p < 1.0))
        throw std::invalid_argument("scenario: p must be in (0, 1)");
    if (cfg.beta <= 0) throw std::invalid_argument("scenario: beta must be positive");
    if (cfg.ticket_rate == 0) throw std::invalid_argument("scenario: ticket_rate must be positive");
    if (cfg.draw_len == 0) throw std::invalid_argument("scenario: draw_len must be positive");
    if (cfg.d_draw == 0 || cfg.d_redeem == 0)
        throw std::invalid_argument("scenario: delays must be positive");
    if (cfg.lifetime_rounds == 0 || cfg.lifetime_rounds % cfg.draw_len != 0)
        throw std::invalid_argument("scenario: lifetime must be a positive multiple of draw_len");
    double winners = cfg.p * static_cast<double>(cfg.ticket_rate * cfg.draw_len);
    if (std::fabs(winners - std::round(winners)) > 1e-9 || std::round(winners) < 1.0)
        throw std::invalid_argument("scenario: p * ticket_rate * draw_len must be a whole number >= 1");
    if (cfg.merchants == 0) throw std::invalid_argument("scenario: need at least one merchant");
    if (cfg.issued_per_round > cfg.ticket_rate)
        throw std::invalid_argument("scenario: issued_per_round exceeds ticket_rate");
    if (cfg.view_lag > 1) throw std::invalid_argument("scenario: view lag must be 0 or 1");
    if (cfg.adversary == AdversaryKind::DuplicateTickets) {
        if (cfg.duplicate_fanout < 2 || cfg.duplicate_fanout > cfg.merchants)
            throw std::invalid_argument("scenario: duplicate fan-out must be in [2, merchants]");
        if (cfg.duplicate_per_round == 0)
            throw std::invalid_argument("scenario: duplicate_per_round must be positive");
    }
    if (cfg.adversary == AdversaryKind::WithholdClaims && cfg.withhold_delay == 0)
        throw std::invalid_argument("scenario: withhold_delay must be positive");
}

namespace {

EscrowParams scenario_escrow(const ScenarioConfig& cfg, const std::vector<KeyPair>& merch) {
    EscrowParams ep;
    ep.win_probability = cfg.p;
    ep.winning_value = cfg.beta;
    ep.ticket_rate = cfg.ticket_rate;
    ep.draw_len = cfg.draw_len;
    ep.d_draw = cfg.d_draw;
    ep.d_redeem = cfg.d_redeem;
    for (const auto& m : merch) ep.merchants.push_back(m.pk);
    ep.escrow_balance =
        payment_balance(cfg.beta, cfg.p, cfg.ticket_rate, cfg.lifetime_rounds);
    double bound = penalty_lower_bound_exact(game_params_for(ep, cfg.lifetime_rounds));
    ep.penalty_balance = coins(bound) + kCoin;
    return ep;
}

Transaction make_create(const EscrowParams& ep, const KeyPair& customer) {
    EscrowCreateTx ct;
    ct.params = ep;
    ct.customer = customer.pk;
    ct.customer_sig = sign(customer.sk, escrow_create_sign_bytes(ep, customer.pk));
    return Transaction{std::move(ct)};
}

Transaction make_refund(const Digest& id, const KeyPair& customer) {
    RefundTx rf;
    rf.escrow_id = id;
    rf.customer = customer.pk;
    rf.customer_sig = sign(customer.sk, refund_sign_bytes(id, customer.pk));
    return Transaction{std::move(rf)};
}

Transaction make_claim(const LotteryTicket& tkt, const KeyPair& merchant) {
    RedeemTx rd;
    rd.ticket = tkt;
    rd.merchant_sig = sign(merchant.sk, redeem_sign_bytes(tkt));
    return Transaction{std::move(rd)};
}

}  // namespace

Metrics run_scenario(const ScenarioConfig& cfg, ScenarioArtifacts* artifacts) {
    validate_config(cfg);

    ChainConfig cc;
    cc.seed = cfg.seed;
    cc.vdf_iterations = 64;  // scenarios exercise timing, not delay hardness
    cc.max_draw_len = std::max<std::uint64_t>(cc.max_draw_len, cfg.draw_len);
    ChainSim sim(cc);

    KeyPair customer = keypair_from_seed(cfg.seed * 7919 + 1);
    std::vector<KeyPair> merch;
    for (std::uint32_t i = 0; i < cfg.merchants; ++i)
        merch.push_back(keypair_from_seed(cfg.seed * 7919 + 2 + i));

    EscrowParams ep = scenario_escrow(cfg, merch);
    sim.fund(customer.pk, ep.escrow_balance + ep.penalty_balance);
    sim.submit(make_create(ep, customer));

    Metrics mx;
    mx.seed = cfg.seed;
    mx.conservation_ok = true;

    auto mine = [&]() {
        sim.mine_block();
        mx.conservation_ok = mx.conservation_ok && sim.conservation_holds();
    };

    mine();  // block 1 includes the creation
    const Digest id = sim.escrows().front()->id;
    const EscrowState* esc = sim.escrow(id);
    const std::uint64_t first = esc->first_issue_round;
    const std::uint64_t refund_round = esc->refund_round;
    const std::uint64_t per_round =
        cfg.issued_per_round == 0 ? cfg.ticket_rate : cfg.issued_per_round;
    const std::uint64_t end_height = refund_round + 2;

    // seqno -> accepted holders, as (merchant index, ticket)
    std::map<std::uint64_t, std::vector<std::pair<std::uint16_t, LotteryTicket>>> holdings;
    std::multimap<std::uint64_t, Transaction> claim_queue;  // inclusion height -> tx
    std::vector<std::pair<std::uint64_t, Transaction>> refund_queue;
    refund_queue.emplace_back(refund_round, make_refund(id, customer));
    if (cfg.adversary == AdversaryKind::EarlyRefundAttempt)
        refund_queue.emplace_back(2, make_refund(id, customer));
    bool out_of_range_sent = false;

    auto merchant_take = [&](const LotteryTicket& tkt, std::uint64_t round) {
        mx.tickets_issued += 1;
        auto res = verify_ticket(tkt, *esc, round - cfg.view_lag, tkt.merchant_index);
        switch (res.verdict) {
            case TicketVerdict::Accept:
                mx.tickets_accepted += 1;
                holdings[tkt.seqno].emplace_back(tkt.merchant_index, tkt);
                break;
            case TicketVerdict::Reject:
                mx.tickets_rejected += 1;
                mx.reject_reasons[std::string(to_string(res.reason))] += 1;
                break;
            case TicketVerdict::CheatEvidence:
                mx.tickets_rejected += 1;
                mx.reject_reasons["cheat-evidence"] += 1;
                sim.submit(Transaction{ProofOfCheatingTx{{tkt}}});
                mx.proofs_published += 1;
                break;
        }
    };

    for (std::uint64_t h = 2; h <= end_height; ++h) {
        auto [lo_it, hi_it] = claim_queue.equal_range(h);
        for (auto it = lo_it; it != hi_it; ++it) sim.submit(it->second);
        claim_queue.erase(lo_it, hi_it);
        for (auto& [target, tx] : refund_queue)
            if (target == h) sim.submit(tx);
        mine();
        esc = sim.escrow(id);

        if (h >= first && h < first + cfg.lifetime_rounds) {
            std::uint64_t lo = (h - first) * cfg.ticket_rate;
            for (std::uint64_t j = 0; j < per_round; ++j) {
                std::uint64_t seqno = lo + j;
                auto idx = static_cast<std::uint16_t>(seqno % cfg.merchants);
                merchant_take(make_ticket(customer.sk, idx, id, seqno), h);
                if (cfg.adversary == AdversaryKind::DuplicateTickets &&
                    j < cfg.duplicate_per_round) {
                    for (std::uint32_t f = 1; f < cfg.duplicate_fanout; ++f) {
                        auto didx = static_cast<std::uint16_t>((idx + f) % cfg.merchants);
                        merchant_take(make_ticket(customer.sk, didx, id, seqno), h);
                    }
                }
            }
            if (cfg.adversary == AdversaryKind::OutOfRangeSeqno && !out_of_range_sent) {
                out_of_range_sent = true;
                merchant_take(make_ticket(customer.sk, 0, id, esc->seqno_limit() + 3), h);
            }
        }

        // draws whose VDF input block was just sealed
        std::uint64_t n_groups = cfg.lifetime_rounds / cfg.draw_len;
        for (std::uint64_t g = 0; g < n_groups; ++g) {
            std::uint64_t group_last = first + (g + 1) * cfg.draw_len - 1;
            std::uint64_t t_draw = group_last + cfg.d_draw;
            if (t_draw != h) continue;
            auto winners = sim.draw_result(id, group_last);
            if (!winners) continue;
            mx.draws_completed += 1;
            mx.winners_expected += esc->winners_per_draw();
            mx.winners_observed += winners->size();
            std::uint64_t t_expire = t_draw + cfg.d_redeem;
            for (std::uint64_t s : *winners) {
                auto hit = holdings.find(s);
                if (hit == holdings.end()) continue;
                bool duplicated = hit->second.size() > 1;
                std::uint64_t target = t_draw + 1;
                if (cfg.adversary == AdversaryKind::WithholdClaims)
                    target = t_draw + cfg.withhold_delay;
                else if (duplicated)
                    target = t_expire;  // worst-case detection delay
                for (const auto& [midx, tkt] : hit->second)
                    claim_queue.emplace(target, make_claim(tkt, merch[midx]));
            }
        }
    }

    for (const auto& oc : sim.outcomes()) {
        if (tx_applied(oc.result))
            mx.chain_bytes_by_kind[std::string(tx_kind(oc.tx))] += oc.wire_bytes;
        if (std::holds_alternative<RedeemTx>(oc.tx)) {
            if (oc.result == TxResult::Accepted) mx.redeemed += 1;
            if (oc.result == TxResult::CheatDetected) mx.duplicate_payouts += 1;
        } else if (std::holds_alternative<RefundTx>(oc.tx)) {
            if (oc.result == TxResult::Accepted)
                mx.refund_accepted = true;
            else
                mx.refund_rejections += 1;
        }
    }
    mx.coins_paid = static_cast<Amount>(mx.redeemed) * cfg.beta;
    mx.coins_paid_duplicates = static_cast<Amount>(mx.duplicate_payouts) * cfg.beta;
    mx.fees_total = sim.fees_recorded();
    mx.penalties_burned = sim.burned();
    mx.refund_amount = sim.balance(customer.pk);
    esc = sim.escrow(id);
    mx.escrow_broken = esc->status == EscrowStatus::Broken;
    switch (esc->status) {
        case EscrowStatus::Active: mx.final_status = "active"; break;
        case EscrowStatus::Breaking: mx.final_status = "breaking"; break;
        case EscrowStatus::Broken: mx.final_status = "broken"; break;
        case EscrowStatus::Closed: mx.final_status = "closed"; break;
    }
    if (artifacts) {
        artifacts->chain_snapshot = sim.export_snapshot();
        std::ostringstream csv;
        csv << "height,tx_count,bytes,fees_coins\n";
        for (const auto& bs : sim.block_stats())
            csv << bs.height << ',' << bs.tx_count << ',' << bs.bytes << ','
                << to_coins(bs.fees) << '\n';
        artifacts->blocks_csv = csv.str();
    }
    return mx;
}

AssertionReport front_running_check(const ScenarioConfig& cfg) {
    validate_config(cfg);
    AssertionReport rep;

    ChainConfig cc;
    cc.seed = cfg.seed;
    cc.vdf_iterations = 64;
    cc.max_draw_len = std::max<std::uint64_t>(cc.max_draw_len, cfg.draw_len);
    ChainSim sim(cc);

    KeyPair customer = keypair_from_seed(cfg.seed * 104729 + 1);
    std::vector<KeyPair> merch;
    for (std::uint32_t i = 0; i < cfg.merchants; ++i)
        merch.push_back(keypair_from_seed(cfg.seed * 104729 + 2 + i));
    EscrowParams ep = scenario_escrow(cfg, merch);
    sim.fund(customer.pk, 2 * (ep.escrow_balance + ep.penalty_balance));

    sim.submit(make_create(ep, customer));
    sim.submit(make_create(ep, customer));
    sim.mine_block();
    auto escs = sim.escrows();
    const Digest id_a = escs[0]->id;
    const Digest id_b = escs[1]->id;

    auto record = [&](std::string vector, const Transaction& tx) {
        sim.submit(tx);
        sim.mine_block();
        const auto& oc = sim.outcomes().back();
        rep.attempts.push_back(
            AttackAttempt{std::move(vector), std::string(to_string(oc.result)),
                          !tx_applied(oc.result)});
    };

    // 1. refund long before t_refund
    record("refund-before-t-refund", make_refund(id_a, customer));

    // 2. break escrow B with a duplicate-issuance proof, then try to refund it
    {
        LotteryTicket a = make_ticket(customer.sk, 0, id_b, 0);
        LotteryTicket b = make_ticket(customer.sk, 1 % cfg.merchants, id_b, 0);
        sim.submit(Transaction{ProofOfCheatingTx{{a, b}}});
        sim.mine_block();
    }
    record("refund-of-broken-escrow", make_refund(id_b, customer));

    // 3. redeem naming an index outside the merchant list
    {
        LotteryTicket t = make_ticket(customer.sk, static_cast<std::uint16_t>(cfg.merchants),
                                      id_a, 0);
        RedeemTx rd{t, sign(customer.sk, redeem_sign_bytes(t))};
        record("redeem-with-unlisted-merchant-index", Transaction{rd});
    }

    // 4. customer-signed claim of a genuine winning ticket
    const EscrowState* esc_a = sim.escrow(id_a);
    std::uint64_t t_draw = esc_a->first_issue_round + cfg.draw_len - 1 + cfg.d_draw;
    while (sim.height() < t_draw) sim.mine_block();
    auto winners = sim.draw_result(id_a, esc_a->first_issue_round);
    if (winners && !winners->empty()) {
        LotteryTicket t = make_ticket(customer.sk, 0, id_a, winners->front());
        RedeemTx rd{t, sign(customer.sk, redeem_sign_bytes(t))};
        record("redeem-with-customer-forged-merchant-signature", Transaction{rd});
    }

    rep.all_rejected = !rep.attempts.empty();
    for (const auto& a : rep.attempts) rep.all_rejected = rep.all_rejected && a.rejected;
    return rep;
}

Metrics withholding_check(ScenarioConfig cfg, std::uint64_t delay) {
    cfg.adversary = AdversaryKind::WithholdClaims;
    cfg.withhold_delay = delay;
    return run_scenario(cfg);
}

namespace {

std::string cpu_model() {
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find("model name");
        if (pos == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) break;
        auto start = line.find_first_not_of(' ', colon + 1);
        return start == std::string::npos ? "" : line.substr(start);
    }
    return "unknown cpu";
}

double secs_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BenchReport bench_rates(std::uint64_t iterations) {
    if (iterations < 10'000)
        throw std::invalid_argument("bench: iterations must be >= 10000");
    BenchReport rep;
    rep.iterations = iterations;
    rep.machine = cpu_model();
    rep.threads = std::max(1u, std::thread::hardware_concurrency());

    KeyPair customer = keypair_from_seed(42);
    std::vector<KeyPair> merch{keypair_from_seed(43), keypair_from_seed(44)};
    Digest id = sha256({});
    const std::uint64_t tau = 1000;  // tickets per draw group
    const std::uint64_t winners_per_group = 10;
    VdfValue vdf = vdf_eval(id, 8);

    // customer: one signature per ticket
    std::vector<LotteryTicket> tickets;
    tickets.reserve(iterations);
    reset_op_counts();
    auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t i = 0; i < iterations; ++i)
        tickets.push_back(make_ticket(customer.sk, static_cast<std::uint16_t>(i % 2), id, i));
    double dt = secs_since(t0);
    auto ops = op_counts();
    rep.customer_tickets_per_sec = static_cast<double>(iterations) / dt;
    rep.customer_signs_per_ticket =
        static_cast<double>(ops.signs) / static_cast<double>(iterations);

    // merchant: verify + amortized winning-set membership per draw group
    reset_op_counts();
    t0 = std::chrono::steady_clock::now();
    std::uint64_t accepted = 0;
    for (std::uint64_t lo = 0; lo < iterations; lo += tau) {
        std::uint64_t hi = std::min(lo + tau, iterations) - 1;
        auto win = winning_set(vdf, id, lo, lo + tau - 1, winners_per_group);
        for (std::uint64_t i = lo; i <= hi; ++i) {
            if (!ticket_sig_valid(tickets[i], customer.pk)) continue;
            accepted += std::binary_search(win.begin(), win.end(), tickets[i].seqno) ? 1 : 0;
        }
    }
    dt = secs_since(t0);
    ops = op_counts();
    rep.merchant_tickets_per_sec = static_cast<double>(iterations) / dt;
    rep.merchant_verifies_per_ticket =
        static_cast<double>(ops.verifies) / static_cast<double>(iterations);
    rep.merchant_hashes_per_ticket =
        static_cast<double>(ops.hashes) / static_cast<double>(iterations);

    // miner: ticket signature + claim signature per redeem
    std::vector<Signature> msigs;
    msigs.reserve(iterations);
    for (std::uint64_t i = 0; i < iterations; ++i)
        msigs.push_back(sign(merch[i % 2].sk, redeem_sign_bytes(tickets[i])));
    reset_op_counts();
    t0 = std::chrono::steady_clock::now();
    std::uint64_t valid = 0;
    for (std::uint64_t i = 0; i < iterations; ++i) {
        bool ok = ticket_sig_valid(tickets[i], customer.pk) &&
                  verify(merch[i % 2].pk, redeem_sign_bytes(tickets[i]), msigs[i]);
        valid += ok ? 1 : 0;
    }
    dt = secs_since(t0);
    ops = op_counts();
    rep.miner_claims_per_sec = static_cast<double>(iterations) / dt;
    rep.miner_verifies_per_claim =
        static_cast<double>(ops.verifies) / static_cast<double>(iterations);
    if (valid != iterations || accepted > iterations)
        throw std::logic_error("bench: self-check failed");
    return rep;
}

std::string metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["seed"] = m.seed;
    j["tickets_issued"] = m.tickets_issued;
    j["tickets_accepted"] = m.tickets_accepted;
    j["tickets_rejected"] = m.tickets_rejected;
    j["reject_reasons"] = m.reject_reasons;
    j["draws_completed"] = m.draws_completed;
    j["winners_expected"] = m.winners_expected;
    j["winners_observed"] = m.winners_observed;
    j["redeemed"] = m.redeemed;
    j["duplicate_payouts"] = m.duplicate_payouts;
    j["coins_paid_micro"] = m.coins_paid;
    j["coins_paid_duplicates_micro"] = m.coins_paid_duplicates;
    j["proofs_published"] = m.proofs_published;
    j["fees_micro"] = m.fees_total;
    j["penalties_burned_micro"] = m.penalties_burned;
    j["refund_amount_micro"] = m.refund_amount;
    j["refund_rejections"] = m.refund_rejections;
    j["refund_accepted"] = m.refund_accepted;
    j["chain_bytes_by_kind"] = m.chain_bytes_by_kind;
    j["conservation_ok"] = m.conservation_ok;
    j["escrow_broken"] = m.escrow_broken;
    j["final_status"] = m.final_status;
    return j.dump(2);
}

std::string metrics_csv(const Metrics& m) {
    std::ostringstream out;
    out << "seed,tickets_issued,tickets_accepted,tickets_rejected,draws_completed,"
           "winners_expected,winners_observed,redeemed,duplicate_payouts,"
           "coins_paid_micro,coins_paid_duplicates_micro,proofs_published,fees_micro,"
           "penalties_burned_micro,refund_amount_micro,refund_rejections,refund_accepted,"
           "conservation_ok,escrow_broken,final_status\n";
    out << m.seed << ',' << m.tickets_issued << ',' << m.tickets_accepted << ','
        << m.tickets_rejected << ',' << m.draws_completed << ',' << m.winners_expected << ','
        << m.winners_observed << ',' << m.redeemed << ',' << m.duplicate_payouts << ','
        << m.coins_paid << ',' << m.coins_paid_duplicates << ',' << m.proofs_published << ','
        << m.fees_total << ',' << m.penalties_burned << ',' << m.refund_amount << ','
        << m.refund_rejections << ',' << (m.refund_accepted ? 1 : 0) << ','
        << (m.conservation_ok ? 1 : 0) << ',' << (m.escrow_broken ? 1 : 0) << ','
        << m.final_status << '\n';
    return out.str();
}

std::string bench_json(const BenchReport& r) {
    nlohmann::ordered_json j;
    j["iterations"] = r.iterations;
    j["customer_tickets_per_sec"] = r.customer_tickets_per_sec;
    j["merchant_tickets_per_sec"] = r.merchant_tickets_per_sec;
    j["miner_claims_per_sec"] = r.miner_claims_per_sec;
    j["customer_signs_per_ticket"] = r.customer_signs_per_ticket;
    j["merchant_verifies_per_ticket"] = r.merchant_verifies_per_ticket;
    j["merchant_hashes_per_ticket"] = r.merchant_hashes_per_ticket;
    j["miner_verifies_per_claim"] = r.miner_verifies_per_claim;
    j["machine"] = r.machine;
    j["threads"] = r.threads;
    return j.dump(2);
}

ScenarioConfig load_scenario(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("scenario config: ") + e.what());
    }
    ScenarioConfig cfg;
    try {
        cfg.p = doc.value("p", cfg.p);
        cfg.beta = coins(doc.value("beta_coins", to_coins(cfg.beta)));
        cfg.ticket_rate = doc.value("ticket_rate", cfg.ticket_rate);
        cfg.draw_len = doc.value("draw_len", cfg.draw_len);
        cfg.d_draw = doc.value("d_draw", cfg.d_draw);
        cfg.d_redeem = doc.value("d_redeem", cfg.d_redeem);
        cfg.lifetime_rounds = doc.value("lifetime_rounds", cfg.lifetime_rounds);
        cfg.merchants = doc.value("merchants", cfg.merchants);
        cfg.issued_per_round = doc.value("issued_per_round", cfg.issued_per_round);
        cfg.view_lag = doc.value("view_lag", cfg.view_lag);
        cfg.duplicate_per_round = doc.value("duplicate_per_round", cfg.duplicate_per_round);
        cfg.duplicate_fanout = doc.value("duplicate_fanout", cfg.duplicate_fanout);
        cfg.withhold_delay = doc.value("withhold_delay", cfg.withhold_delay);
        cfg.seed = doc.value("seed", cfg.seed);
        std::string adv = doc.value("adversary", std::string("none"));
        if (adv == "none") cfg.adversary = AdversaryKind::None;
        else if (adv == "duplicate-tickets") cfg.adversary = AdversaryKind::DuplicateTickets;
        else if (adv == "out-of-range-seqno") cfg.adversary = AdversaryKind::OutOfRangeSeqno;
        else if (adv == "early-refund-attempt") cfg.adversary = AdversaryKind::EarlyRefundAttempt;
        else if (adv == "withhold-claims") cfg.adversary = AdversaryKind::WithholdClaims;
        else throw std::runtime_error("scenario config: unknown adversary \"" + adv + "\"");
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("scenario config: ") + e.what());
    }
    return cfg;
}

}  // namespace microcash
