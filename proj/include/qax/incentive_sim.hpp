#pragma once

#include "qax/protocol.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace qax::sim {

struct SellerStrategy {
    /// Probability that the seller's answer is correct.
    double accuracy = 1.0;
};

struct BuyerStrategy {
    /// Out-of-band cost to the buyer of producing evidence.
    Money evidence_cost;
};

/// p·P − (1−p)·S − fee_A: the seller's expected ledger net when the buyer
/// verifies. Throws InvalidProbability outside [0, 1].
double seller_expected_payoff(double accuracy, const Terms& terms);

/// (S + fee_A) / (P + S), the accuracy at which the expected payoff is zero.
double break_even_accuracy(const Terms& terms);

/// A seller stakes and answers iff the expected payoff is positive.
bool seller_participates(const SellerStrategy& seller, const Terms& terms);

/// Verifying recovers the deposit at the evidence cost. Ties do not verify.
bool buyer_should_verify(const BuyerStrategy& buyer, const Terms& terms);

/// Ledger deltas of one full lifecycle run through the real protocol code.
struct TrialOutcome {
    SettlementPath path = SettlementPath::Correct;
    Money seller_net;
    Money buyer_net;
    Money fee_delta;
    Money sink_delta;
    bool conserved = false;
};

/// Funds a fresh ledger, then create → post → accept → answer and either
/// evidence → auto adjudication → settle, or expiry → settle.
TrialOutcome run_trial(const Terms& terms, bool answer_correct, bool buyer_verifies);

struct SimConfig {
    Terms terms;
    std::vector<double> grid;
    BuyerStrategy buyer;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    /// 0 picks the hardware concurrency. Does not affect the report.
    unsigned threads = 0;
};

struct GridPoint {
    double accuracy = 0.0;
    bool seller_participates = false;
    std::uint64_t trials = 0;
    std::uint64_t correct = 0;
    double mean_seller_payoff = 0.0;
    double seller_payoff_stderr = 0.0;
    double closed_form_payoff = 0.0;
    double mean_buyer_outflow = 0.0;
    /// Ledger outflow plus evidence cost when the buyer verifies.
    double mean_buyer_cost = 0.0;
    std::int64_t exchange_revenue = 0;
    double exchange_revenue_per_transaction = 0.0;
    std::int64_t sink_absorption = 0;
    double mean_sink_absorption = 0.0;
    /// Every trial's exchange revenue equalled fee_Q + fee_A.
    bool fee_invariant = false;
    /// Every trial ended with total supply equal to faucet issuance.
    bool conserved = false;
};

struct SimReport {
    SimConfig config;
    bool buyer_verifies = false;
    std::vector<GridPoint> points;
    double break_even_closed_form = 0.0;
    /// Linear interpolation of the empirical payoff's zero crossing.
    std::optional<double> break_even_estimate;
};

/// Deterministic in the config (threads excluded). Throws InvalidConfig.
SimReport run_simulation(const SimConfig& config);

nlohmann::json report_to_json(const SimReport& report);

/// Per-trial seed derived from (seed, grid index, trial index).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t trial);

/// Uniform draw in [0, 1) from the top 53 bits of a splitmix64 step.
double unit_draw(std::uint64_t seed);

} // namespace qax::sim
