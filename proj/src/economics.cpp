#include "microcash/economics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace microcash {

namespace {

// Below this, 1/C(tau, (1-p)tau) is treated as 0 (reciprocal under 1e-300).
constexpr double kLogBinomialCutoff = 690.0;

double logaddexp(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

std::uint64_t checked_round(double v, const char* what) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-6 * std::max(1.0, std::abs(v)) || r < 0)
        throw std::invalid_argument(std::string(what) + " is not a non-negative integer");
    return static_cast<std::uint64_t>(r);
}

// splitmix64, used only to derive per-shard seeds.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void validate(const GameParams& gp) {
    if (gp.merchants < 1) throw std::invalid_argument("merchants must be >= 1");
    if (!(gp.p > 0.0) || !(gp.p < 1.0)) throw std::invalid_argument("p must be in (0, 1)");
    if (!(gp.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (gp.tau == 0 || gp.d == 0 || gp.r == 0 || gp.k == 0)
        throw std::invalid_argument("tau, d, r, k must be positive");
}

//! Additional utility collected on the exit path when cheating in (1-based)
//! lottery round `i` of a k-round escrow is detected: the planned duplication
//! of rounds i..i+d-1 plus full duplication of the remaining redeem-window
//! rounds, truncated at the end of the lifetime.
double exit_gain(const GameParams& gp, std::span<const std::uint64_t> strategy, std::uint64_t i,
                 double gain_per_ticket) {
    double dup = 0;
    std::uint64_t last_planned = std::min(i + gp.d - 1, gp.k);
    for (std::uint64_t j = i; j <= last_planned; ++j) dup += static_cast<double>(strategy[j - 1]);
    if (gp.k >= i + gp.d) {
        std::uint64_t tail = std::min<std::uint64_t>(gp.r, gp.k - i - gp.d + 1);
        dup += static_cast<double>(tail * gp.tau);
    }
    return gain_per_ticket * dup;
}

}  // namespace

std::uint64_t lottery_rounds_ceil(std::uint64_t rounds, std::uint64_t draw_len) {
    return (rounds + draw_len - 1) / draw_len;
}

GameParams game_params_for(const EscrowParams& params, std::uint64_t lifetime_rounds) {
    GameParams gp;
    gp.merchants = static_cast<std::uint32_t>(params.merchants.size());
    gp.p = params.win_probability;
    gp.beta = to_coins(params.winning_value);
    gp.tau = params.ticket_rate * params.draw_len;
    gp.d = lottery_rounds_ceil(params.d_draw, params.draw_len);
    gp.r = lottery_rounds_ceil(params.d_redeem, params.draw_len);
    gp.k = lifetime_rounds / params.draw_len;
    return gp;
}

Amount payment_balance(Amount beta, double p, std::uint64_t ticket_rate,
                       std::uint64_t lifetime_rounds) {
    if (beta < 0 || !(p > 0.0) || p > 1.0 || ticket_rate == 0 || lifetime_rounds == 0)
        throw std::invalid_argument("payment_balance: non-positive input");
    long double v = static_cast<long double>(beta) * static_cast<long double>(p) *
                    static_cast<long double>(ticket_rate) * static_cast<long double>(lifetime_rounds);
    return static_cast<Amount>(llroundl(v));
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return -INFINITY;
    return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
           std::lgamma(static_cast<double>(n - k) + 1);
}

double penalty_lower_bound_exact(const GameParams& gp) {
    validate(gp);
    std::uint64_t losers = checked_round((1.0 - gp.p) * static_cast<double>(gp.tau), "(1-p)*tau");
    if (gp.merchants == 1) return 0.0;
    double log_c = log_binomial(gp.tau, losers);
    double inv_c = log_c > kLogBinomialCutoff ? 0.0 : std::exp(-log_c);
    double tau = static_cast<double>(gp.tau);
    double term = (1.0 - gp.p) / (1.0 - inv_c) +
                  (1.0 - gp.p) * static_cast<double>(gp.d - 1) + static_cast<double>(gp.r);
    return static_cast<double>(gp.merchants - 1) * gp.p * gp.beta * tau * term;
}

double penalty_lower_bound_independent(const GameParams& gp) {
    validate(gp);
    if (gp.merchants == 1) return 0.0;
    double kappa = static_cast<double>(gp.tau);
    double win_any = -std::expm1(kappa * std::log1p(-gp.p));  // 1 - (1-p)^kappa
    double term = 1.0 / win_any + static_cast<double>(gp.d + gp.r) - 1.0;
    return static_cast<double>(gp.merchants - 1) * gp.p * gp.beta * kappa * term;
}

std::uint64_t binomial_quantile(std::uint64_t n, double p, double q) {
    if (n == 0) throw std::invalid_argument("binomial_quantile: n must be positive");
    if (!(p >= 0.0) || p > 1.0 || !(q > 0.0) || q > 1.0)
        throw std::invalid_argument("binomial_quantile: parameters out of range");
    if (p == 0.0) return 0;
    if (p == 1.0) return n;

    double log_q = std::log(q);
    double log_pmf = static_cast<double>(n) * std::log1p(-p);
    double log_cdf = log_pmf;
    std::uint64_t k = 0;
    while (k < n && log_cdf < log_q) {
        // pmf(k+1) = pmf(k) * (n-k)/(k+1) * p/(1-p), streamed in log space
        log_pmf += std::log(static_cast<double>(n - k)) - std::log(static_cast<double>(k + 1)) +
                   std::log(p) - std::log1p(-p);
        log_cdf = logaddexp(log_cdf, log_pmf);
        ++k;
    }
    return k;
}

Amount escrow_balance_independent(Amount beta, double p, std::uint64_t ticket_rate,
                                  std::uint64_t lifetime_rounds, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("escrow_balance_independent: epsilon must be in (0, 1)");
    std::uint64_t n = lifetime_rounds * ticket_rate;
    std::uint64_t psi = binomial_quantile(n, p, 1.0 - epsilon);
    return beta * static_cast<Amount>(psi);
}

double detection_probability(const GameParams& gp, std::uint64_t y, LotteryVariant variant) {
    if (y == 0) return 0.0;
    if (variant == LotteryVariant::Independent)
        return -std::expm1(static_cast<double>(y) * std::log1p(-gp.p));
    std::uint64_t losers = checked_round((1.0 - gp.p) * static_cast<double>(gp.tau), "(1-p)*tau");
    if (y > losers) return 1.0;
    // 1 - C(losers, y) / C(tau, y)
    return -std::expm1(log_binomial(losers, y) - log_binomial(gp.tau, y));
}

std::uint64_t max_duplication(const GameParams& gp, LotteryVariant variant) {
    if (variant == LotteryVariant::Independent) return gp.tau;
    return checked_round((1.0 - gp.p) * static_cast<double>(gp.tau), "(1-p)*tau");
}

double dp_expected_utility(const GameParams& gp, std::span<const std::uint64_t> strategy,
                           double penalty_coins, LotteryVariant variant) {
    validate(gp);
    if (gp.k > 64) throw std::invalid_argument("dp_expected_utility: k must be <= 64");
    if (strategy.size() != gp.k)
        throw std::invalid_argument("dp_expected_utility: strategy length must equal k");
    std::uint64_t cap = max_duplication(gp, variant);
    for (auto y : strategy)
        if (y > cap) throw std::invalid_argument("dp_expected_utility: y exceeds duplication cap");

    double gain = static_cast<double>(gp.merchants - 1) * gp.p * gp.beta;
    double expected = 0.0;  // E_0 = 0
    for (std::uint64_t i = gp.k; i >= 1; --i) {
        std::uint64_t y = strategy[i - 1];
        double q = detection_probability(gp, y, variant);
        double on_exit = exit_gain(gp, strategy, i, gain) - penalty_coins;
        expected = q * on_exit + (1.0 - q) * (gain * static_cast<double>(y) + expected);
    }
    return expected;
}

BestResponse best_response_utility(const GameParams& gp, double penalty_coins,
                                   LotteryVariant variant) {
    validate(gp);
    if (gp.tau > 10'000)
        throw std::invalid_argument("best_response_utility: tau too large for exhaustive search");
    std::uint64_t cap = max_duplication(gp, variant);
    BestResponse best;
    best.utility = -INFINITY;
    std::vector<std::uint64_t> strategy(gp.k, cap);
    for (std::uint64_t y1 = 0; y1 <= cap; ++y1) {
        strategy[0] = y1;
        double u = dp_expected_utility(gp, strategy, penalty_coins, variant);
        if (u > best.utility) {
            best.utility = u;
            best.strategy = strategy;
        }
    }
    return best;
}

McResult monte_carlo_utility(const GameParams& gp, std::span<const std::uint64_t> strategy,
                             double penalty_coins, LotteryVariant variant, std::uint64_t trials,
                             std::uint64_t seed, bool parallel) {
    validate(gp);
    if (strategy.size() != gp.k)
        throw std::invalid_argument("monte_carlo_utility: strategy length must equal k");

    double gain = static_cast<double>(gp.merchants - 1) * gp.p * gp.beta;
    std::vector<double> detect(gp.k), exit_util(gp.k);
    for (std::uint64_t i = 1; i <= gp.k; ++i) {
        detect[i - 1] = detection_probability(gp, strategy[i - 1], variant);
        exit_util[i - 1] = exit_gain(gp, strategy, i, gain) - penalty_coins;
    }

    constexpr std::uint64_t kShards = 64;
    std::uint64_t n_shards = std::min(kShards, std::max<std::uint64_t>(trials, 1));
    std::vector<double> sums(n_shards, 0.0), sumsqs(n_shards, 0.0);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(n_shards); ++s) {
        std::uint64_t count = trials / n_shards + (static_cast<std::uint64_t>(s) < trials % n_shards ? 1 : 0);
        std::mt19937_64 rng(mix64(seed ^ (0x5eedULL + static_cast<std::uint64_t>(s))));
        double sum = 0.0, sumsq = 0.0;
        for (std::uint64_t t = 0; t < count; ++t) {
            double utility = 0.0;
            for (std::uint64_t i = 0; i < gp.k; ++i) {
                double u01 = std::ldexp(static_cast<double>(rng() >> 11), -53);
                if (u01 < detect[i]) {
                    utility += exit_util[i];
                    break;
                }
                utility += gain * static_cast<double>(strategy[i]);
            }
            sum += utility;
            sumsq += utility * utility;
        }
        sums[s] = sum;
        sumsqs[s] = sumsq;
    }

    double total = 0.0, total_sq = 0.0;
    for (std::uint64_t s = 0; s < n_shards; ++s) {
        total += sums[s];
        total_sq += sumsqs[s];
    }
    double n = static_cast<double>(trials);
    double mean = total / n;
    double var = std::max(0.0, total_sq / n - mean * mean);
    double half = 2.5758 * std::sqrt(var / n);  // 99% two-sided normal interval
    return McResult{mean, half, trials};
}

WorkloadParams workload_params(const WorkloadSpec& ws) {
    if (!(ws.tickets_per_sec > 0) || !(ws.claim_fee > 0) || !(ws.service_cost_per_sec > 0))
        throw std::invalid_argument("workload_params: rates must be positive");
    WorkloadParams out;
    out.p = ws.fee_fraction * ws.service_cost_per_sec / (ws.tickets_per_sec * ws.claim_fee);
    out.beta = ws.service_cost_per_sec / (out.p * ws.tickets_per_sec);
    return out;
}

WorkloadReport workload_report(const WorkloadSpec& ws, double escrow_tx_bytes,
                               double claim_tx_bytes, double ticket_bytes) {
    WorkloadReport rep;
    rep.derived = workload_params(ws);
    rep.winners_per_sec = rep.derived.p * ws.tickets_per_sec;
    rep.escrows_per_sec = ws.escrow_interval_sec > 0 ? 1.0 / ws.escrow_interval_sec : 0.0;
    rep.escrows_per_sec_sequential = rep.escrows_per_sec + rep.winners_per_sec;
    rep.tx_per_sec = rep.winners_per_sec + rep.escrows_per_sec;
    rep.tx_per_sec_sequential = rep.winners_per_sec + rep.escrows_per_sec_sequential;
    rep.fees_per_round = rep.tx_per_sec * ws.round_sec * ws.claim_fee;
    rep.fees_per_round_sequential = rep.tx_per_sec_sequential * ws.round_sec * ws.claim_fee;
    rep.bw_customer_miner_bps = rep.escrows_per_sec * escrow_tx_bytes * 8;
    rep.bw_customer_merchant_bps = ws.tickets_per_sec * ticket_bytes * 8;
    rep.bw_merchant_miner_bps = rep.winners_per_sec * claim_tx_bytes * 8;
    rep.chain_growth_mb_per_round =
        (rep.escrows_per_sec * escrow_tx_bytes + rep.winners_per_sec * claim_tx_bytes) *
        ws.round_sec / 1e6;
    return rep;
}

}  // namespace microcash
