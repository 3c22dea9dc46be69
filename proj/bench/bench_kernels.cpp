// Serial reference vs OpenMP paths for the data-parallel kernels. Each pair
// must produce identical output; the timing table shows the speedup.

#include <chrono>
#include <cstdio>
#include <string>

#include "microcash/crypto.hpp"
#include "microcash/economics.hpp"
#include "microcash/lottery.hpp"
#include "microcash/protocol.hpp"

using namespace microcash;

namespace {

double secs(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s %10.3fs %10.3fs %7.2fx   %s\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t n = argc > 1 ? std::stoull(argv[1]) : 20'000;
    KeyPair customer = keypair_from_seed(7);
    Digest id = sha256({});

    std::printf("%-28s %11s %11s %8s\n", "kernel", "serial", "openmp", "speedup");

    std::vector<std::uint16_t> recipients(n);
    for (std::uint64_t i = 0; i < n; ++i) recipients[i] = static_cast<std::uint16_t>(i % 8);

    auto t0 = std::chrono::steady_clock::now();
    auto serial_tix = batch_issue(customer.sk, id, 0, recipients, false);
    double ts = secs(t0);
    t0 = std::chrono::steady_clock::now();
    auto par_tix = batch_issue(customer.sk, id, 0, recipients, true);
    row("batch_issue", ts, secs(t0), serial_tix == par_tix);

    t0 = std::chrono::steady_clock::now();
    auto serial_ok = batch_sig_check(serial_tix, customer.pk, false);
    ts = secs(t0);
    t0 = std::chrono::steady_clock::now();
    auto par_ok = batch_sig_check(par_tix, customer.pk, true);
    row("batch_sig_check", ts, secs(t0), serial_ok == par_ok);

    VdfValue vdf = vdf_eval(id, 16);
    std::uint64_t range = n * 100;
    t0 = std::chrono::steady_clock::now();
    auto serial_wins = count_winners_independent(id, 0, range, vdf, 0.01, false);
    ts = secs(t0);
    t0 = std::chrono::steady_clock::now();
    auto par_wins = count_winners_independent(id, 0, range, vdf, 0.01, true);
    row("count_winners_independent", ts, secs(t0), serial_wins == par_wins);

    GameParams gp{5, 0.01, 1.0, 1000, 6, 6, 8};
    std::vector<std::uint64_t> strategy(gp.k, 990);
    t0 = std::chrono::steady_clock::now();
    auto serial_mc = monte_carlo_utility(gp, strategy, 478.0, LotteryVariant::Exact, n * 10, 99,
                                         false);
    ts = secs(t0);
    t0 = std::chrono::steady_clock::now();
    auto par_mc = monte_carlo_utility(gp, strategy, 478.0, LotteryVariant::Exact, n * 10, 99,
                                      true);
    row("monte_carlo_utility", ts, secs(t0), serial_mc.mean == par_mc.mean);

    bool all_ok = serial_tix == par_tix && serial_ok == par_ok && serial_wins == par_wins &&
                  serial_mc.mean == par_mc.mean;
    return all_ok ? 0 : 1;
}
