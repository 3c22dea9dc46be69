#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "microcash/chain.hpp"
#include "microcash/economics.hpp"

using namespace microcash;

namespace {

ChainConfig test_config(std::uint64_t seed = 1) {
    ChainConfig cc;
    cc.vdf_iterations = 16;
    cc.seed = seed;
    return cc;
}

struct Fixture {
    ChainSim sim;
    KeyPair customer;
    std::vector<KeyPair> merch;
    Digest id;

    explicit Fixture(EscrowParams ep, std::uint64_t lifetime, std::uint64_t seed = 1)
        : sim(test_config(seed)), customer(keypair_from_seed(100)) {
        for (std::uint32_t i = 0; i < 4; ++i) merch.push_back(keypair_from_seed(200 + i));
        for (std::uint32_t i = 0; i < 2; ++i) ep.merchants.push_back(merch[i].pk);
        ep.escrow_balance = payment_balance(ep.winning_value, ep.win_probability,
                                            ep.ticket_rate, lifetime);
        sim.fund(customer.pk, ep.escrow_balance + ep.penalty_balance);
        EscrowCreateTx ct{ep, customer.pk,
                          sign(customer.sk, escrow_create_sign_bytes(ep, customer.pk))};
        sim.submit(Transaction{ct});
        sim.mine_block();
        REQUIRE(sim.outcomes().back().result == TxResult::Accepted);
        id = sim.escrows().front()->id;
    }

    const EscrowState* esc() const { return sim.escrow(id); }

    TxResult submit_and_mine(Transaction tx) {
        sim.submit(std::move(tx));
        sim.mine_block();
        return sim.outcomes().back().result;
    }

    Transaction claim(std::uint16_t index, std::uint64_t seqno) {
        LotteryTicket t = make_ticket(customer.sk, index, id, seqno);
        return Transaction{RedeemTx{t, sign(merch[index].sk, redeem_sign_bytes(t))}};
    }

    Transaction refund() {
        return Transaction{RefundTx{
            id, customer.pk, sign(customer.sk, refund_sign_bytes(id, customer.pk))}};
    }

    void mine_until(std::uint64_t height) {
        while (sim.height() < height) sim.mine_block();
    }
};

EscrowParams small_params() {
    // 1 winner per draw, short delays: bound = 1*0.1*1*10*(0.9/0.9 + 0.9 + 2) = 3.9
    EscrowParams ep;
    ep.win_probability = 0.1;
    ep.winning_value = kCoin;
    ep.ticket_rate = 10;
    ep.draw_len = 1;
    ep.d_draw = 2;
    ep.d_redeem = 2;
    ep.penalty_balance = 4 * kCoin;
    return ep;
}

}  // namespace

TEST_CASE("escrow creation schedules issuance after six confirmations") {
    Fixture fx(small_params(), 4);
    const EscrowState* esc = fx.esc();
    CHECK(esc->first_issue_round == 8);  // included at 1, confirmed through 7
    CHECK(esc->lifetime_rounds == 4);
    CHECK(esc->refund_round == 8 + 4 - 1 + 2 + 2);
    CHECK(esc->escrow_left == 4 * kCoin);
    CHECK(esc->penalty_left == 4 * kCoin);
    CHECK(esc->winners_per_draw() == 1);
    CHECK(fx.sim.balance(fx.customer.pk) == 0);
    CHECK(fx.sim.conservation_holds());
}

TEST_CASE("penalty deposits at or below the bound are rejected") {
    // the worked setup whose bound is 477.6 coins
    EscrowParams ep;
    ep.win_probability = 0.01;
    ep.winning_value = kCoin;
    ep.ticket_rate = 1000;
    ep.draw_len = 1;
    ep.d_draw = 6;
    ep.d_redeem = 6;
    KeyPair customer = keypair_from_seed(100);
    std::vector<PublicKey> merchants;
    for (std::uint32_t i = 0; i < 5; ++i) merchants.push_back(keypair_from_seed(300 + i).pk);
    ep.merchants = merchants;
    ep.escrow_balance = payment_balance(kCoin, 0.01, 1000, 200);

    ChainSim sim(test_config());
    sim.fund(customer.pk, 5000 * kCoin);
    auto create_with = [&](Amount penalty) {
        EscrowParams p = ep;
        p.penalty_balance = penalty;
        EscrowCreateTx ct{p, customer.pk,
                          sign(customer.sk, escrow_create_sign_bytes(p, customer.pk))};
        sim.submit(Transaction{ct});
        sim.mine_block();
        return sim.outcomes().back().result;
    };
    CHECK(create_with(477 * kCoin) == TxResult::InsufficientPenalty);
    CHECK(create_with(coins(477.6)) == TxResult::InsufficientPenalty);  // strict bound
    CHECK(create_with(478 * kCoin) == TxResult::Accepted);
    CHECK(sim.conservation_holds());
}

TEST_CASE("creation parameter validation") {
    KeyPair customer = keypair_from_seed(100);
    ChainSim sim(test_config());
    sim.fund(customer.pk, 1000 * kCoin);
    EscrowParams base = small_params();
    base.merchants = {keypair_from_seed(200).pk, keypair_from_seed(201).pk};
    base.escrow_balance = payment_balance(kCoin, 0.1, 10, 4);

    auto result_of = [&](EscrowParams p, bool wreck_sig = false) {
        EscrowCreateTx ct{p, customer.pk,
                          sign(customer.sk, escrow_create_sign_bytes(p, customer.pk))};
        if (wreck_sig) ct.customer_sig[0] ^= 1;
        sim.submit(Transaction{ct});
        sim.mine_block();
        return sim.outcomes().back().result;
    };

    CHECK(result_of(base, true) == TxResult::BadSignature);
    {
        EscrowParams p = base;
        p.escrow_balance += 1;  // not a multiple of beta*p*rate
        CHECK(result_of(p) == TxResult::NonIntegerLifetime);
    }
    {
        EscrowParams p = base;
        p.win_probability = 0.03;  // 0.3 winners per draw
        p.escrow_balance = coins(0.03 * 10 * 10);
        CHECK(result_of(p) == TxResult::NonIntegerWinnerCount);
    }
    {
        EscrowParams p = base;
        p.draw_len = 99;
        CHECK(result_of(p) == TxResult::DrawLenOutOfRange);
    }
    {
        EscrowParams p = base;
        p.draw_len = 3;  // lifetime 4 not a multiple
        CHECK(result_of(p) == TxResult::LifetimeNotMultiple);
    }
    {
        EscrowParams p = base;
        p.merchants.clear();
        CHECK(result_of(p) == TxResult::BadParams);
    }
    {
        KeyPair poor = keypair_from_seed(999);
        EscrowCreateTx ct{base, poor.pk,
                          sign(poor.sk, escrow_create_sign_bytes(base, poor.pk))};
        sim.submit(Transaction{ct});
        sim.mine_block();
        CHECK(sim.outcomes().back().result == TxResult::InsufficientFunds);
    }
}

TEST_CASE("honest flow: draws, claims, and refund conserve funds") {
    Fixture fx(small_params(), 4);
    std::uint64_t first = fx.esc()->first_issue_round;

    std::uint64_t last_winner = 0;
    for (std::uint64_t round = first; round < first + 4; ++round) {
        std::uint64_t t_draw = round + 2;
        fx.mine_until(t_draw);
        auto winners = fx.sim.draw_result(fx.id, round);
        REQUIRE(winners.has_value());
        REQUIRE(winners->size() == 1);
        std::uint64_t s = winners->front();
        CHECK(s >= (round - first) * 10);
        CHECK(s < (round - first + 1) * 10);
        last_winner = s;
        fx.sim.submit(fx.claim(static_cast<std::uint16_t>(s % 2), s));
        if (round == first) {
            std::uint64_t loser = s == 0 ? 1 : 0;
            fx.sim.submit(fx.claim(0, loser));
        }
        fx.sim.mine_block();  // claims land one block after the draw
        auto outcomes = fx.sim.outcomes();
        if (round == first) {
            CHECK(outcomes[outcomes.size() - 1].result == TxResult::NotWinner);
            CHECK(outcomes[outcomes.size() - 2].result == TxResult::Accepted);
        } else {
            CHECK(outcomes.back().result == TxResult::Accepted);
        }
        CHECK(fx.sim.conservation_holds());
    }
    CHECK(fx.esc()->escrow_left == 0);

    // double-claim of the last winner, still inside its redeem window
    CHECK(fx.submit_and_mine(fx.claim(static_cast<std::uint16_t>(last_winner % 2),
                                      last_winner)) == TxResult::AlreadyRedeemed);

    CHECK(fx.submit_and_mine(fx.refund()) == TxResult::Accepted);
    CHECK(fx.esc()->status == EscrowStatus::Closed);
    // all four winners paid the whole payment escrow; penalty returned intact
    CHECK(fx.sim.balance(fx.customer.pk) == 4 * kCoin);
    CHECK(fx.sim.balance(fx.merch[0].pk) + fx.sim.balance(fx.merch[1].pk) == 4 * kCoin);
    CHECK(fx.sim.burned() == 0);
    CHECK(fx.sim.conservation_holds());
}

TEST_CASE("claims before the draw or after expiry bounce") {
    Fixture fx(small_params(), 4);
    std::uint64_t first = fx.esc()->first_issue_round;
    fx.mine_until(first);
    CHECK(fx.submit_and_mine(fx.claim(0, 0)) == TxResult::LotteryNotDrawn);

    std::uint64_t t_draw = first + 2;
    fx.mine_until(t_draw);
    std::uint64_t s = fx.sim.draw_result(fx.id, first)->front();

    SUBCASE("inclusive end of the redeem window") {
        fx.mine_until(t_draw + 1);  // claim lands at t_expire = t_draw + 2
        CHECK(fx.submit_and_mine(fx.claim(static_cast<std::uint16_t>(s % 2), s)) ==
              TxResult::Accepted);
    }
    SUBCASE("one block past expiry") {
        fx.mine_until(t_draw + 2);
        CHECK(fx.submit_and_mine(fx.claim(static_cast<std::uint16_t>(s % 2), s)) ==
              TxResult::Expired);
        // the unclaimed winning value comes back with the refund
        fx.mine_until(fx.esc()->refund_round - 1);
        CHECK(fx.submit_and_mine(fx.refund()) == TxResult::Accepted);
        CHECK(fx.sim.balance(fx.customer.pk) >= 4 * kCoin + kCoin);
        CHECK(fx.sim.conservation_holds());
    }
}

TEST_CASE("duplicate winning claims break the escrow and burn the penalty") {
    Fixture fx(small_params(), 4);
    std::uint64_t first = fx.esc()->first_issue_round;
    std::uint64_t t_draw = first + 2;
    fx.mine_until(t_draw);
    std::uint64_t s = fx.sim.draw_result(fx.id, first)->front();

    CHECK(fx.submit_and_mine(fx.claim(0, s)) == TxResult::Accepted);
    Amount penalty_before = fx.esc()->penalty_left;
    Amount escrow_before = fx.esc()->escrow_left;
    CHECK(fx.submit_and_mine(fx.claim(1, s)) == TxResult::CheatDetected);

    const EscrowState* esc = fx.esc();
    CHECK(esc->status == EscrowStatus::Broken);
    CHECK(fx.sim.balance(fx.merch[0].pk) == kCoin);
    CHECK(fx.sim.balance(fx.merch[1].pk) == kCoin);  // duplicated winner paid too
    CHECK(fx.sim.burned() == penalty_before);
    // untouched payment escrow returns to the customer at settlement
    CHECK(fx.sim.balance(fx.customer.pk) == escrow_before - kCoin);
    CHECK(esc->escrow_left == 0);
    CHECK(esc->penalty_left == 0);
    CHECK(fx.sim.conservation_holds());

    CHECK(fx.submit_and_mine(fx.refund()) == TxResult::EscrowNotActive);
    CHECK(fx.submit_and_mine(fx.claim(0, s + 1)) == TxResult::EscrowNotActive);
}

TEST_CASE("a signed out-of-range seqno claim is itself proof of cheating") {
    Fixture fx(small_params(), 4);
    fx.mine_until(fx.esc()->first_issue_round);
    std::uint64_t rogue = fx.esc()->seqno_limit() + 1;
    CHECK(fx.submit_and_mine(fx.claim(0, rogue)) == TxResult::CheatDetected);
    CHECK(fx.esc()->status == EscrowStatus::Broken);
    CHECK(fx.sim.burned() == 4 * kCoin);
    CHECK(fx.sim.balance(fx.customer.pk) == 4 * kCoin);  // escrow returned, penalty gone
    CHECK(fx.sim.conservation_holds());
}

TEST_CASE("proof-of-cheating transactions") {
    Fixture fx(small_params(), 4);
    auto dup_a = make_ticket(fx.customer.sk, 0, fx.id, 5);
    auto dup_b = make_ticket(fx.customer.sk, 1, fx.id, 5);

    SUBCASE("duplicate pair breaks the escrow") {
        CHECK(fx.submit_and_mine(Transaction{ProofOfCheatingTx{{dup_a, dup_b}}}) ==
              TxResult::CheatDetected);
        CHECK(fx.esc()->status == EscrowStatus::Broken);
        CHECK(fx.sim.burned() == 4 * kCoin);
        // replay of the same evidence is moot
        CHECK(fx.submit_and_mine(Transaction{ProofOfCheatingTx{{dup_a, dup_b}}}) ==
              TxResult::EscrowNotActive);
    }
    SUBCASE("out-of-range evidence breaks the escrow") {
        auto rogue = make_ticket(fx.customer.sk, 0, fx.id, fx.esc()->seqno_limit() + 7);
        CHECK(fx.submit_and_mine(Transaction{ProofOfCheatingTx{{rogue}}}) ==
              TxResult::CheatDetected);
        CHECK(fx.esc()->status == EscrowStatus::Broken);
    }
    SUBCASE("non-proofs are rejected") {
        CHECK(fx.submit_and_mine(Transaction{ProofOfCheatingTx{}}) ==
              TxResult::InvalidEvidence);
        // same merchant twice is not duplication
        CHECK(fx.submit_and_mine(Transaction{ProofOfCheatingTx{{dup_a, dup_a}}}) ==
              TxResult::InvalidEvidence);
        // forged signatures prove nothing
        auto forged = dup_b;
        forged.customer_sig[0] ^= 1;
        CHECK(fx.submit_and_mine(Transaction{ProofOfCheatingTx{{dup_a, forged}}}) ==
              TxResult::InvalidEvidence);
        CHECK(fx.esc()->status == EscrowStatus::Active);
        CHECK(fx.sim.burned() == 0);
    }
}

TEST_CASE("refund gates: timing, ownership, signature") {
    Fixture fx(small_params(), 4);
    CHECK(fx.submit_and_mine(fx.refund()) == TxResult::TooEarly);

    KeyPair outsider = keypair_from_seed(700);
    RefundTx foreign{fx.id, outsider.pk,
                     sign(outsider.sk, refund_sign_bytes(fx.id, outsider.pk))};
    CHECK(fx.submit_and_mine(Transaction{foreign}) == TxResult::NotOwner);

    RefundTx forged{fx.id, fx.customer.pk,
                    sign(outsider.sk, refund_sign_bytes(fx.id, fx.customer.pk))};
    CHECK(fx.submit_and_mine(Transaction{forged}) == TxResult::BadSignature);

    fx.mine_until(fx.esc()->refund_round - 2);
    CHECK(fx.submit_and_mine(fx.refund()) == TxResult::TooEarly);  // refund_round - 1
    CHECK(fx.submit_and_mine(fx.refund()) == TxResult::Accepted);  // exactly refund_round
    CHECK(fx.submit_and_mine(fx.refund()) == TxResult::EscrowNotActive);
}

TEST_CASE("transaction codec round-trips all four kinds") {
    KeyPair customer = keypair_from_seed(1);
    KeyPair merchant = keypair_from_seed(2);
    EscrowParams ep = small_params();
    ep.merchants = {merchant.pk};
    ep.escrow_balance = 4 * kCoin;
    Digest id = sha256({std::vector<std::uint8_t>{1}});
    LotteryTicket t = make_ticket(customer.sk, 0, id, 3);

    std::vector<Transaction> txs{
        Transaction{EscrowCreateTx{ep, customer.pk,
                                   sign(customer.sk, escrow_create_sign_bytes(ep, customer.pk))}},
        Transaction{RedeemTx{t, sign(merchant.sk, redeem_sign_bytes(t))}},
        Transaction{ProofOfCheatingTx{{t, make_ticket(customer.sk, 0, id, 9)}}},
        Transaction{RefundTx{id, customer.pk,
                             sign(customer.sk, refund_sign_bytes(id, customer.pk))}},
    };
    for (const auto& tx : txs) {
        auto wire = encode_tx(tx);
        auto back = decode_tx(wire);
        REQUIRE(back.has_value());
        CHECK(encode_tx(*back) == wire);
        CHECK(tx_kind(*back) == tx_kind(tx));
        wire.pop_back();
        CHECK_FALSE(decode_tx(wire).has_value());
    }
    CHECK_FALSE(decode_tx(std::vector<std::uint8_t>{0x7f}).has_value());
}

TEST_CASE("vdf publication: block h+1 carries the delay value of block h") {
    ChainSim sim(test_config());
    for (int i = 0; i < 5; ++i) sim.mine_block();
    for (std::uint64_t h = 0; h + 1 <= sim.height(); ++h) {
        const auto& next = sim.blocks()[h + 1];
        CHECK(next.parent_vdf ==
              vdf_eval(sim.blocks()[h].block_hash, sim.config().vdf_iterations));
        CHECK(sim.vdf_for_round(h) == next.parent_vdf);
    }
    CHECK_FALSE(sim.vdf_for_round(sim.height() + 1).has_value());
}

TEST_CASE("identical seeds and submissions replay to identical snapshots") {
    auto run = [](std::uint64_t seed) {
        Fixture fx(small_params(), 4, seed);
        std::uint64_t first = fx.esc()->first_issue_round;
        fx.mine_until(first + 2);
        std::uint64_t s = fx.sim.draw_result(fx.id, first)->front();
        fx.submit_and_mine(fx.claim(static_cast<std::uint16_t>(s % 2), s));
        fx.mine_until(fx.esc()->refund_round - 1);
        fx.submit_and_mine(fx.refund());
        return fx.sim.export_snapshot();
    };
    CHECK(run(7) == run(7));
    CHECK(run(7) != run(8));
}

TEST_CASE("snapshot export and import agree") {
    Fixture fx(small_params(), 4);
    fx.mine_until(fx.esc()->first_issue_round + 2);
    std::string doc = fx.sim.export_snapshot();
    ChainSnapshot snap = import_snapshot(doc);
    CHECK(snap.vdf_iterations == fx.sim.config().vdf_iterations);
    CHECK(snap.blocks.size() == fx.sim.blocks().size());
    REQUIRE(snap.escrows.size() == 1);
    const auto& e = snap.escrows[0];
    CHECK(e.id == fx.id);
    CHECK(e.first_issue_round == fx.esc()->first_issue_round);
    CHECK(e.lifetime_rounds == 4);
    CHECK(snap.blocks.back().block_hash == fx.sim.blocks().back().block_hash);
    CHECK_THROWS_AS(import_snapshot("{not json"), std::runtime_error);
    CHECK_THROWS_AS(import_snapshot("{}"), std::runtime_error);
}
