#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "microcash/escrow.hpp"

namespace microcash {

enum class LotteryVariant { Exact, Independent };

//! Duplication-game parameters in lottery rounds. For the independent variant
//! draw_len is 1, so tau/d/r/k double as kappa/w/x/upsilon.
struct GameParams {
    std::uint32_t merchants = 2;  // m
    double p = 0;
    double beta = 0;        // coins
    std::uint64_t tau = 0;  // tickets per lottery round (= draw_len * tkt_rate)
    std::uint64_t d = 1;    // draw delay in lottery rounds
    std::uint64_t r = 1;    // redeem window in lottery rounds
    std::uint64_t k = 1;    // escrow lifetime in lottery rounds
};

//! ceil(rounds / draw_len); the conservative direction for the bound.
std::uint64_t lottery_rounds_ceil(std::uint64_t rounds, std::uint64_t draw_len);

//! Game parameters of an escrow setup under the exact-win lottery.
GameParams game_params_for(const EscrowParams& params, std::uint64_t lifetime_rounds);

//! B_escrow = beta * p * tkt_rate * l_esc, exact in micro-coins.
Amount payment_balance(Amount beta, double p, std::uint64_t ticket_rate,
                       std::uint64_t lifetime_rounds);

//! log C(n, k) via lgamma; returns -inf for k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

//! Strict lower bound on B_penalty for the exact-win lottery (coins).
double penalty_lower_bound_exact(const GameParams& gp);

//! Strict lower bound on B_penalty for the independent lottery (coins).
double penalty_lower_bound_independent(const GameParams& gp);

//! Smallest psi with BinomCDF(psi; n, p) >= q. Exact at integer psi.
std::uint64_t binomial_quantile(std::uint64_t n, double p, double q);

//! B_escrow for the independent lottery: beta * F^-1(p, l*rate, 1-eps).
Amount escrow_balance_independent(Amount beta, double p, std::uint64_t ticket_rate,
                                  std::uint64_t lifetime_rounds, double epsilon);

//! Probability that duplicating y seqnos in one lottery round is caught.
double detection_probability(const GameParams& gp, std::uint64_t y, LotteryVariant variant);

//! Per-round duplication cap: (1-p)*tau exact, tau independent.
std::uint64_t max_duplication(const GameParams& gp, LotteryVariant variant);

//! Exact expected utility of a duplication strategy over the k-round
//! decision process, with the end-of-lifetime truncation of the exit state.
double dp_expected_utility(const GameParams& gp, std::span<const std::uint64_t> strategy,
                           double penalty_coins, LotteryVariant variant);

struct BestResponse {
    double utility = 0;
    std::vector<std::uint64_t> strategy;
};

//! Maximizes the DP over first-round duplication by exhaustive search, with
//! the closed-form maximizer for later rounds.
BestResponse best_response_utility(const GameParams& gp, double penalty_coins,
                                   LotteryVariant variant);

struct McResult {
    double mean = 0;
    double ci99_half_width = 0;
    std::uint64_t trials = 0;
};

//! Seeded stochastic replay of the duplication game. Trials are sharded with
//! derived seeds and reduced in fixed order, so the parallel and serial paths
//! return identical results.
McResult monte_carlo_utility(const GameParams& gp, std::span<const std::uint64_t> strategy,
                             double penalty_coins, LotteryVariant variant, std::uint64_t trials,
                             std::uint64_t seed, bool parallel = true);

struct WorkloadSpec {
    double service_cost_per_sec = 0;  // dollars
    double fee_fraction = 0.02;
    double tickets_per_sec = 0;
    double claim_fee = 0.068;  // dollars per on-chain transaction
    double escrow_interval_sec = 0;
    double round_sec = 600;
};

struct WorkloadParams {
    double p = 0;
    double beta = 0;  // dollars
};

WorkloadParams workload_params(const WorkloadSpec& ws);

//! Analytic overhead rows; the sequential column models one escrow per
//! winning ticket.
struct WorkloadReport {
    WorkloadParams derived;
    double winners_per_sec = 0;
    double escrows_per_sec = 0;
    double escrows_per_sec_sequential = 0;
    double tx_per_sec = 0;
    double tx_per_sec_sequential = 0;
    double fees_per_round = 0;
    double fees_per_round_sequential = 0;
    double bw_customer_miner_bps = 0;
    double bw_customer_merchant_bps = 0;
    double bw_merchant_miner_bps = 0;
    double chain_growth_mb_per_round = 0;
};

WorkloadReport workload_report(const WorkloadSpec& ws, double escrow_tx_bytes = 327,
                               double claim_tx_bytes = 356, double ticket_bytes = 106);

}  // namespace microcash
