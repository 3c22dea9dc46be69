#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "microcash/chain.hpp"

namespace microcash {

enum class AdversaryKind {
    None,
    DuplicateTickets,
    OutOfRangeSeqno,
    EarlyRefundAttempt,
    WithholdClaims,
};

std::string_view to_string(AdversaryKind k);

//! One customer, `merchants` merchants, one escrow, driven end to end:
//! creation, confirmation wait, per-round issuance, draws, claims, refund.
struct ScenarioConfig {
    double p = 0.1;
    Amount beta = kCoin;  // winning value
    std::uint64_t ticket_rate = 10;
    std::uint64_t draw_len = 1;
    std::uint64_t d_draw = 6;
    std::uint64_t d_redeem = 6;
    std::uint64_t lifetime_rounds = 20;
    std::uint32_t merchants = 2;
    std::uint64_t issued_per_round = 0;  // 0 = full ticket_rate
    std::uint64_t view_lag = 0;          // merchant round lag, 0 or 1
    AdversaryKind adversary = AdversaryKind::None;
    std::uint64_t duplicate_per_round = 1;  // y, DuplicateTickets only
    std::uint32_t duplicate_fanout = 2;     // copies per duplicated seqno, <= merchants
    std::uint64_t withhold_delay = 0;       // rounds after t_draw, WithholdClaims only
    std::uint64_t seed = 0;
};

//! Throws std::invalid_argument with a one-line reason.
void validate_config(const ScenarioConfig& cfg);

struct Metrics {
    std::uint64_t seed = 0;
    std::uint64_t tickets_issued = 0;
    std::uint64_t tickets_accepted = 0;
    std::uint64_t tickets_rejected = 0;  // includes cheat-evidence escalations
    std::map<std::string, std::uint64_t> reject_reasons;
    std::uint64_t draws_completed = 0;
    std::uint64_t winners_expected = 0;
    std::uint64_t winners_observed = 0;
    std::uint64_t redeemed = 0;            // honest redeem payouts
    std::uint64_t duplicate_payouts = 0;   // payouts made while breaking the escrow
    Amount coins_paid = 0;                 // beta * redeemed
    Amount coins_paid_duplicates = 0;
    std::uint64_t proofs_published = 0;
    Amount fees_total = 0;
    Amount penalties_burned = 0;
    Amount refund_amount = 0;
    std::uint64_t refund_rejections = 0;
    bool refund_accepted = false;
    std::map<std::string, std::uint64_t> chain_bytes_by_kind;
    bool conservation_ok = false;
    bool escrow_broken = false;
    std::string final_status;
};

std::string metrics_json(const Metrics& m);
std::string metrics_csv(const Metrics& m);

//! Optional side outputs of a scenario run: the final chain snapshot and a
//! per-block CSV stream (height, tx count, bytes, fees).
struct ScenarioArtifacts {
    std::string chain_snapshot;
    std::string blocks_csv;
};

//! Deterministic for a given (cfg, seed). Every mined block is followed by a
//! funds-conservation check; the result feeds Metrics::conservation_ok.
Metrics run_scenario(const ScenarioConfig& cfg, ScenarioArtifacts* artifacts = nullptr);

struct AttackAttempt {
    std::string vector;
    std::string outcome;
    bool rejected = false;
};

struct AssertionReport {
    std::vector<AttackAttempt> attempts;
    bool all_rejected = false;
};

//! Tries every transaction a customer could sign to pull funds out before
//! t_refund (early refund, self-redeem, refund of a broken escrow) and
//! reports that each one bounced.
AssertionReport front_running_check(const ScenarioConfig& cfg);

//! Runs cfg with a WithholdClaims adversary at the given delay.
Metrics withholding_check(ScenarioConfig cfg, std::uint64_t delay);

struct BenchReport {
    std::uint64_t iterations = 0;
    double customer_tickets_per_sec = 0;
    double merchant_tickets_per_sec = 0;
    double miner_claims_per_sec = 0;
    // exact per-ticket operation counts, hardware independent
    double customer_signs_per_ticket = 0;
    double merchant_verifies_per_ticket = 0;
    double merchant_hashes_per_ticket = 0;
    double miner_verifies_per_claim = 0;
    std::string machine;
    std::uint64_t threads = 1;
};

std::string bench_json(const BenchReport& r);

//! Wall-clock single-thread rates for the three roles plus instrumented
//! operation counts. iterations must be >= 10'000.
BenchReport bench_rates(std::uint64_t iterations);

//! Structured-text scenario loader; throws std::runtime_error on bad input.
ScenarioConfig load_scenario(const std::string& json_text);

}  // namespace microcash
