#pragma once

#include "qax/answer_spec.hpp"
#include "qax/ledger.hpp"
#include "qax/money.hpp"
#include "qax/policy.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qax {

/// Money and time parameters of one question. All deadlines are inclusive.
struct Terms {
    Money price;      // paid by the buyer for the answer
    Money stake;      // put at risk by the seller
    Money deposit;    // refundable buyer deposit, returned on sufficient evidence
    Money buyer_fee;  // exchange fee charged to the buyer
    Money seller_fee; // exchange fee charged to the seller
    Timestamp answer_deadline = 0;
    Timestamp evidence_deadline = 0;

    bool operator==(const Terms&) const = default;
};

/// Empty when the terms are well formed, otherwise the first violation.
std::optional<std::string> terms_violation(const Terms& terms);

enum class TxState {
    Draft,
    Posted,
    Accepted,
    Answered,
    AnswerRejected,
    EvidenceSubmitted,
    Adjudicated,
    Settled,
    ExpiredUnaccepted,
    ExpiredUnanswered,
    ExpiredUnverified,
};

inline constexpr std::array<TxState, 11> kAllStates{
    TxState::Draft,           TxState::Posted,          TxState::Accepted,          TxState::Answered,
    TxState::AnswerRejected,  TxState::EvidenceSubmitted, TxState::Adjudicated,     TxState::Settled,
    TxState::ExpiredUnaccepted, TxState::ExpiredUnanswered, TxState::ExpiredUnverified,
};

std::string_view to_string(TxState state);
TxState tx_state_from_string(std::string_view s);

enum class Verdict { Correct, Incorrect, InsufficientEvidence };

std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view s);

struct EvidenceRecord {
    std::string body;
    std::string digest;
    Timestamp submitted_at = 0;

    bool operator==(const EvidenceRecord&) const = default;
};

/// A party as the protocol sees it: a pseudonym and the account it pays from.
struct Participant {
    std::string pseudonym;
    AccountId account;

    bool operator==(const Participant&) const = default;
};

struct Transaction {
    std::string id;
    Participant buyer;
    std::optional<Participant> seller;
    std::string question_text;
    AnswerSpec spec;
    Terms terms;
    AdjudicationPolicy policy;
    TxState state = TxState::Draft;
    std::optional<AnswerValue> answer;
    std::optional<EvidenceRecord> evidence;
    std::optional<Verdict> verdict;
    AccountId escrow;
    /// The state settle() was called from; set once Settled.
    std::optional<TxState> settled_from;

    bool operator==(const Transaction&) const = default;
};

/// Rows of the settlement payout table.
enum class SettlementPath {
    Correct,
    Incorrect,
    InsufficientEvidence,
    AnswerRejected,
    ExpiredUnanswered,
    ExpiredUnverified,
    ExpiredUnaccepted,
};

inline constexpr std::array<SettlementPath, 7> kAllSettlementPaths{
    SettlementPath::Correct,           SettlementPath::Incorrect,         SettlementPath::InsufficientEvidence,
    SettlementPath::AnswerRejected,    SettlementPath::ExpiredUnanswered, SettlementPath::ExpiredUnverified,
    SettlementPath::ExpiredUnaccepted,
};

std::string_view to_string(SettlementPath path);

enum class Role { Buyer, Seller, Escrow, ExchangeFee, Sink };

struct PlannedTransfer {
    Role from;
    Role to;
    Money amount;
    Reason reason;
};

/// Entries settle() emits for `path`, in order. Zero amounts are omitted.
std::vector<PlannedTransfer> payout_plan(const Terms& terms, SettlementPath path);

/// Path settle() would take from the transaction's current state.
std::optional<SettlementPath> settlement_path(const Transaction& t);

/// Escrow balance implied by the transaction's state.
Money expected_escrow(const Transaction& t);

/// Transaction lifecycle and settlement. Every operation either applies in
/// full or throws without touching the ledger or the transaction.
class Protocol {
public:
    /// Opens the exchange_fee and sink accounts if the ledger has none.
    explicit Protocol(Ledger& ledger);

    Transaction create_question(std::string id, Participant buyer, std::string text, AnswerSpec spec, Terms terms,
                                AdjudicationPolicy policy = AutoAttestationPolicy{});
    Transaction post_question(Transaction t);
    Transaction accept_question(Transaction t, Participant seller, Timestamp now);
    Transaction submit_answer(Transaction t, std::string_view caller, std::string_view raw, Timestamp now);
    Transaction submit_evidence(Transaction t, std::string_view caller, std::string body, Timestamp now);
    Transaction adjudicate(Transaction t, Verdict verdict);
    Transaction settle(Transaction t);

    /// Applies deadline expiry. Idempotent; never touches the ledger.
    static Transaction advance_time(Transaction t, Timestamp now);

    const AccountId& fee_account() const { return fee_; }
    const AccountId& sink_account() const { return sink_; }

private:
    AccountId account_for(const Transaction& t, Role role) const;

    Ledger& ledger_;
    AccountId fee_;
    AccountId sink_;
};

nlohmann::json terms_to_json(const Terms& terms);
/// Fees default to the given values when absent from `j`.
Terms terms_from_json(const nlohmann::json& j, Money default_buyer_fee = Money{}, Money default_seller_fee = Money{});

nlohmann::json policy_to_json(const AdjudicationPolicy& policy);
AdjudicationPolicy policy_from_json(const nlohmann::json& j);

nlohmann::json transaction_to_json(const Transaction& t);
Transaction transaction_from_json(const nlohmann::json& j);

} // namespace qax
