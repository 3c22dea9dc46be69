#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "microcash/economics.hpp"
#include "microcash/escrow.hpp"
#include "microcash/protocol.hpp"

namespace microcash {

struct EscrowCreateTx {
    EscrowParams params;
    PublicKey customer{};
    Signature customer_sig{};
};

struct RedeemTx {
    LotteryTicket ticket;
    Signature merchant_sig{};
};

struct ProofOfCheatingTx {
    std::vector<LotteryTicket> evidence;
};

struct RefundTx {
    Digest escrow_id;
    PublicKey customer{};
    Signature customer_sig{};
};

using Transaction = std::variant<EscrowCreateTx, RedeemTx, ProofOfCheatingTx, RefundTx>;

std::vector<std::uint8_t> encode_tx(const Transaction& tx);
std::optional<Transaction> decode_tx(std::span<const std::uint8_t> wire);
std::string_view tx_kind(const Transaction& tx);

std::vector<std::uint8_t> escrow_create_sign_bytes(const EscrowParams& params,
                                                   const PublicKey& customer);
std::vector<std::uint8_t> redeem_sign_bytes(const LotteryTicket& ticket);
std::vector<std::uint8_t> refund_sign_bytes(const Digest& escrow_id, const PublicKey& customer);

enum class TxResult {
    Accepted,
    CheatDetected,  // accepted; broke the escrow
    // rejections
    UnknownEscrow,
    BadSignature,
    InsufficientFunds,
    BadParams,
    NonIntegerLifetime,
    NonIntegerWinnerCount,
    DrawLenOutOfRange,
    LifetimeNotMultiple,
    InsufficientPenalty,
    EscrowNotActive,
    UnknownMerchantIndex,
    LotteryNotDrawn,
    NotWinner,
    Expired,
    AlreadyRedeemed,
    TooEarly,
    NotOwner,
    InvalidEvidence,
    InsufficientEscrow,
};

std::string_view to_string(TxResult r);
inline bool tx_applied(TxResult r) {
    return r == TxResult::Accepted || r == TxResult::CheatDetected;
}

struct TxOutcome {
    Transaction tx;
    TxResult result = TxResult::Accepted;
    std::uint64_t height = 0;  // block in which it was processed
    std::size_t wire_bytes = 0;
};

struct Block {
    std::uint64_t height = 0;
    Digest parent_hash;
    Digest block_hash;
    VdfValue parent_vdf;  // vdf_eval(parent block_hash, config iterations)
    std::vector<Transaction> transactions;
};

struct ChainConfig {
    std::uint64_t vdf_iterations = 10'000;
    std::uint64_t max_draw_len = 10;  // c
    std::uint64_t confirmation_depth = 6;
    Amount claim_fee = coins(0.068);
    std::uint64_t seed = 0;
};

struct BlockStats {
    std::uint64_t height = 0;
    std::uint64_t tx_count = 0;
    std::uint64_t bytes = 0;
    Amount fees = 0;
};

//! Deterministic single-chain simulator. All state is a pure function of
//! (seed, config, funded accounts, submitted transactions).
class ChainSim {
public:
    explicit ChainSim(ChainConfig config);

    //! Credit initial funds to an account (counts toward conservation).
    void fund(const PublicKey& account, Amount amount);

    void submit(Transaction tx) { mempool_.push_back(std::move(tx)); }

    //! Mines one block: validates mempool transactions in submission order,
    //! includes the valid ones, drops the rest with a recorded reason.
    const Block& mine_block();

    std::uint64_t height() const { return blocks_.back().height; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<TxOutcome>& outcomes() const { return outcomes_; }
    const std::vector<BlockStats>& block_stats() const { return stats_; }

    const EscrowState* escrow(const Digest& id) const;
    //! Escrows in creation order.
    std::vector<const EscrowState*> escrows() const;

    Amount balance(const PublicKey& account) const;
    Amount burned() const { return burned_; }
    Amount fees_recorded() const { return fees_; }
    Amount total_funded() const { return funded_; }

    //! funded == balances + locked(Active) + burned, in micro-coins.
    bool conservation_holds() const;

    //! VDF of the block at `round`; available once block round+1 exists
    //! (published there), or computable locally from the block hash.
    std::optional<VdfValue> vdf_for_round(std::uint64_t round) const;

    const ChainConfig& config() const { return config_; }

    //! Canonical structured-text (JSON) snapshot for replay comparison and
    //! offline inspection.
    std::string export_snapshot() const;

    //! Winning seqnos of the draw group containing `issue_round`.
    //! Requires the block after t_draw (or t_draw itself) to exist.
    std::optional<std::vector<std::uint64_t>> draw_result(const Digest& escrow_id,
                                                          std::uint64_t issue_round) const;

private:
    TxResult apply(const Transaction& tx, std::uint64_t height);
    TxResult apply_create(const EscrowCreateTx& tx, std::uint64_t height);
    TxResult apply_redeem(const RedeemTx& tx, std::uint64_t height);
    TxResult apply_proof(const ProofOfCheatingTx& tx, std::uint64_t height);
    TxResult apply_refund(const RefundTx& tx, std::uint64_t height);
    void pay_duplicate(EscrowState& esc, std::uint64_t seqno, std::uint16_t index);
    void settle_breaking();
    bool winning(const EscrowState& esc, std::uint64_t seqno, std::uint64_t height,
                 std::uint64_t* t_draw_out) const;

    ChainConfig config_;
    std::mt19937_64 rng_;
    std::vector<Block> blocks_;
    std::vector<Transaction> mempool_;
    std::vector<TxOutcome> outcomes_;
    std::vector<BlockStats> stats_;
    std::map<std::array<std::uint8_t, 32>, Amount> balances_;
    std::map<Digest, EscrowState> escrows_;
    std::vector<Digest> escrow_order_;
    mutable std::map<std::uint64_t, VdfValue> vdf_cache_;
    Amount burned_ = 0;
    Amount fees_ = 0;
    Amount funded_ = 0;
};

//! Read-back view of an exported snapshot: enough to re-run draws and
//! inspect escrow setups offline.
struct SnapshotBlock {
    std::uint64_t height = 0;
    Digest block_hash;
    VdfValue parent_vdf;
};

struct SnapshotEscrow {
    Digest id;
    double win_probability = 0;
    std::uint64_t ticket_rate = 0;
    std::uint64_t draw_len = 1;
    std::uint64_t d_draw = 1;
    std::uint64_t d_redeem = 1;
    std::uint64_t first_issue_round = 0;
    std::uint64_t lifetime_rounds = 0;
};

struct ChainSnapshot {
    std::uint64_t vdf_iterations = 0;
    std::vector<SnapshotBlock> blocks;
    std::vector<SnapshotEscrow> escrows;
};

//! Parses a document produced by ChainSim::export_snapshot.
//! Throws std::runtime_error on malformed input.
ChainSnapshot import_snapshot(const std::string& json_text);

}  // namespace microcash
