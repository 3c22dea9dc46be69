// Command-line front end: escrow bound computation, scenario simulation,
// lottery draws over exported snapshots, benchmarks, and workload reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "microcash/bytes.hpp"
#include "microcash/chain.hpp"
#include "microcash/economics.hpp"
#include "microcash/lottery.hpp"
#include "microcash/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInvariant = 3;

int emit(const nlohmann::ordered_json& doc, const std::string& out_path,
         const std::string& format) {
    std::string text;
    if (format == "csv") {
        std::ostringstream header, row;
        bool first = true;
        for (const auto& [key, value] : doc.items()) {
            if (!value.is_primitive()) continue;  // nested objects stay json-only
            if (!first) {
                header << ',';
                row << ',';
            }
            first = false;
            header << key;
            if (value.is_string())
                row << value.get<std::string>();
            else
                row << value.dump();
        }
        text = header.str() + "\n" + row.str() + "\n";
    } else {
        text = doc.dump(2) + "\n";
    }
    if (out_path.empty()) {
        std::cout << text;
        return kExitOk;
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return kExitUsage;
    }
    out << text;
    return kExitOk;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct BoundsArgs {
    double p = 0.01;
    double beta = 1.0;
    std::uint64_t tkt_rate = 1000;
    std::uint64_t draw_len = 1;
    std::uint64_t lifetime = 200;
    std::uint32_t merchants = 5;
    std::uint64_t d_draw = 6;
    std::uint64_t d_redeem = 6;
    double epsilon = 0.01;
    std::string variant = "exact";
};

int cmd_bounds(const BoundsArgs& a, std::uint64_t seed, const std::string& out,
               const std::string& format) {
    using namespace microcash;
    GameParams gp;
    gp.merchants = a.merchants;
    gp.p = a.p;
    gp.beta = a.beta;
    gp.tau = a.tkt_rate * a.draw_len;
    gp.d = lottery_rounds_ceil(a.d_draw, a.draw_len);
    gp.r = lottery_rounds_ceil(a.d_redeem, a.draw_len);
    gp.k = lottery_rounds_ceil(a.lifetime, a.draw_len);

    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    doc["variant"] = a.variant;
    doc["p"] = a.p;
    doc["beta_coins"] = a.beta;
    doc["ticket_rate"] = a.tkt_rate;
    doc["draw_len"] = a.draw_len;
    doc["lifetime_rounds"] = a.lifetime;
    doc["merchants"] = a.merchants;
    doc["d_draw"] = a.d_draw;
    doc["d_redeem"] = a.d_redeem;
    if (a.variant == "exact") {
        Amount be = payment_balance(coins(a.beta), a.p, a.tkt_rate, a.lifetime);
        doc["escrow_balance_coins"] = to_coins(be);
        doc["winners_per_draw"] =
            static_cast<std::uint64_t>(std::llround(a.p * static_cast<double>(gp.tau)));
        doc["penalty_bound_coins"] = penalty_lower_bound_exact(gp);
    } else {
        doc["epsilon"] = a.epsilon;
        Amount be = escrow_balance_independent(coins(a.beta), a.p, a.tkt_rate, a.lifetime,
                                               a.epsilon);
        doc["escrow_balance_coins"] = to_coins(be);
        doc["expected_winners_total"] =
            a.p * static_cast<double>(a.tkt_rate) * static_cast<double>(a.lifetime);
        doc["penalty_bound_coins"] = penalty_lower_bound_independent(gp);
    }
    return emit(doc, out, format);
}

void write_or_throw(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out, const std::string& format,
                 const std::string& snapshot_out, const std::string& blocks_csv) {
    using namespace microcash;
    ScenarioConfig cfg = load_scenario(read_file(config_path));
    if (seed) cfg.seed = *seed;
    ScenarioArtifacts art;
    bool want_art = !snapshot_out.empty() || !blocks_csv.empty();
    Metrics m = run_scenario(cfg, want_art ? &art : nullptr);
    if (!snapshot_out.empty()) write_or_throw(snapshot_out, art.chain_snapshot);
    if (!blocks_csv.empty()) write_or_throw(blocks_csv, art.blocks_csv);
    int rc = kExitOk;
    std::string failed;
    if (!m.conservation_ok) failed = "funds conservation";
    if (m.tickets_accepted + m.tickets_rejected != m.tickets_issued)
        failed = "ticket accounting";
    if (!failed.empty()) rc = kExitInvariant;
    std::string text = format == "csv" ? metrics_csv(m) : metrics_json(m) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return kExitUsage;
        }
        f << text;
    }
    if (rc != kExitOk) std::cerr << "invariant failed: " << failed << "\n";
    return rc;
}

int cmd_draw(const std::string& snapshot_path, std::uint64_t round, const std::string& escrow_hex,
             const std::string& out, const std::string& format) {
    using namespace microcash;
    ChainSnapshot snap = import_snapshot(read_file(snapshot_path));
    if (snap.escrows.empty()) throw std::invalid_argument("snapshot has no escrows");
    const SnapshotEscrow* esc = &snap.escrows.front();
    if (!escrow_hex.empty()) {
        esc = nullptr;
        for (const auto& e : snap.escrows)
            if (to_hex(e.id.span()) == escrow_hex) esc = &e;
        if (!esc) throw std::invalid_argument("escrow id not found in snapshot");
    }
    DrawSchedule sched{esc->first_issue_round, esc->lifetime_rounds, esc->draw_len, esc->d_draw,
                       esc->d_redeem};
    auto t_draw = draw_round_for(round, sched);
    if (!t_draw) throw std::invalid_argument("round is outside the issuance window");

    std::optional<VdfValue> vdf;
    if (*t_draw + 1 < snap.blocks.size())
        vdf = snap.blocks[*t_draw + 1].parent_vdf;
    else if (*t_draw < snap.blocks.size())
        vdf = vdf_eval(snap.blocks[*t_draw].block_hash, snap.vdf_iterations);
    if (!vdf) throw std::invalid_argument("snapshot does not reach the draw round");

    std::uint64_t group = (round - esc->first_issue_round) / esc->draw_len;
    std::uint64_t per_group = esc->draw_len * esc->ticket_rate;
    std::uint64_t lo = group * per_group;
    auto n = static_cast<std::uint64_t>(
        std::llround(esc->win_probability * static_cast<double>(per_group)));
    auto winners = winning_set(*vdf, esc->id, lo, lo + per_group - 1, n);

    nlohmann::ordered_json doc;
    doc["escrow"] = to_hex(esc->id.span());
    doc["round"] = round;
    doc["draw_round"] = *t_draw;
    doc["seqno_lo"] = lo;
    doc["seqno_hi"] = lo + per_group - 1;
    doc["winning_seqnos"] = winners;
    return emit(doc, out, format);
}

int cmd_bench(std::uint64_t iterations, std::uint64_t seed, const std::string& out,
              const std::string& format) {
    using namespace microcash;
    BenchReport r = bench_rates(iterations);
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(bench_json(r));
    doc["seed"] = seed;
    return emit(doc, out, format);
}

int cmd_workload(const std::string& spec_path, std::uint64_t seed, const std::string& out,
                 const std::string& format) {
    using namespace microcash;
    nlohmann::json js = nlohmann::json::parse(read_file(spec_path));
    WorkloadSpec ws;
    ws.service_cost_per_sec = js.at("service_cost_per_sec").get<double>();
    ws.fee_fraction = js.value("fee_fraction", ws.fee_fraction);
    ws.tickets_per_sec = js.at("tickets_per_sec").get<double>();
    ws.claim_fee = js.value("claim_fee", ws.claim_fee);
    ws.escrow_interval_sec = js.at("escrow_interval_sec").get<double>();
    ws.round_sec = js.value("round_sec", ws.round_sec);
    WorkloadReport r = workload_report(ws);

    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    doc["p"] = r.derived.p;
    doc["beta_dollars"] = r.derived.beta;
    doc["winners_per_sec"] = r.winners_per_sec;
    doc["escrows_per_sec"] = r.escrows_per_sec;
    doc["escrows_per_sec_sequential"] = r.escrows_per_sec_sequential;
    doc["tx_per_sec"] = r.tx_per_sec;
    doc["tx_per_sec_sequential"] = r.tx_per_sec_sequential;
    doc["fees_per_round_dollars"] = r.fees_per_round;
    doc["fees_per_round_sequential_dollars"] = r.fees_per_round_sequential;
    doc["bw_customer_miner_bps"] = r.bw_customer_miner_bps;
    doc["bw_customer_merchant_bps"] = r.bw_customer_merchant_bps;
    doc["bw_merchant_miner_bps"] = r.bw_merchant_miner_bps;
    doc["chain_growth_mb_per_round"] = r.chain_growth_mb_per_round;
    return emit(doc, out, format);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"microcash: probabilistic micropayment escrow toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::string out_path;
    std::string format = "json";
    auto* seed_opt = app.add_option("--seed", seed, "rng seed, echoed into every output");
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    BoundsArgs ba;
    auto* bounds = app.add_subcommand("bounds", "escrow and penalty bounds for a setup");
    bounds->add_option("--p", ba.p, "win probability");
    bounds->add_option("--beta", ba.beta, "winning value in coins");
    bounds->add_option("--tkt-rate", ba.tkt_rate, "tickets per round");
    bounds->add_option("--draw-len", ba.draw_len, "rounds per draw group");
    bounds->add_option("--lifetime", ba.lifetime, "escrow lifetime in rounds");
    bounds->add_option("--merchants", ba.merchants, "merchant count m");
    bounds->add_option("--d-draw", ba.d_draw, "draw delay in rounds");
    bounds->add_option("--d-redeem", ba.d_redeem, "redeem window in rounds");
    bounds->add_option("--epsilon", ba.epsilon, "overdraft probability (independent variant)");
    bounds->add_option("--variant", ba.variant, "exact or independent")
        ->check(CLI::IsMember({"exact", "independent"}));

    std::string sim_config, snapshot_out, blocks_csv;
    auto* simulate = app.add_subcommand("simulate", "run a scenario config over the chain sim");
    simulate->add_option("--config", sim_config, "scenario config file")->required();
    simulate->add_option("--snapshot-out", snapshot_out, "write the final chain snapshot here");
    simulate->add_option("--blocks-csv", blocks_csv, "write per-block stats CSV here");

    std::string snap_path, escrow_hex;
    std::uint64_t draw_round = 0;
    auto* draw = app.add_subcommand("draw", "winning set for a round of a snapshotted escrow");
    draw->add_option("--snapshot", snap_path, "chain snapshot file")->required();
    draw->add_option("--round", draw_round, "issue round to draw for")->required();
    draw->add_option("--escrow", escrow_hex, "escrow id (hex, default: first in snapshot)");

    std::uint64_t iterations = 10'000;
    auto* bench = app.add_subcommand("bench", "per-role ticket processing rates");
    bench->add_option("--iterations", iterations, "tickets per measurement, >= 10000");

    std::string workload_spec;
    auto* workload = app.add_subcommand("workload", "analytic overhead report for a workload");
    workload->add_option("--spec", workload_spec, "workload spec file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (bounds->parsed()) return cmd_bounds(ba, seed, out_path, format);
        if (simulate->parsed())
            return cmd_simulate(sim_config,
                                seed_opt->count() > 0 ? std::optional<std::uint64_t>(seed)
                                                      : std::nullopt,
                                out_path, format, snapshot_out, blocks_csv);
        if (draw->parsed()) return cmd_draw(snap_path, draw_round, escrow_hex, out_path, format);
        if (bench->parsed()) return cmd_bench(iterations, seed, out_path, format);
        if (workload->parsed()) return cmd_workload(workload_spec, seed, out_path, format);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}
