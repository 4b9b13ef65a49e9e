#pragma once

#include "qax/protocol.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace qax {

struct Decision {
    Verdict verdict = Verdict::InsufficientEvidence;
    std::string rationale;
    Timestamp decided_at = 0;
    std::string policy_used;

    bool operator==(const Decision&) const = default;
};

/// Evidence body expected by AutoAttestation:
///   {"claimed_outcome": string, "supporting_note": string}
/// The claimed outcome is read under the question's own AnswerSpec.
///
/// Total and deterministic: malformed bodies, a foreign schema, and claims
/// outside the allowed set all yield InsufficientEvidence. decided_at is the
/// evidence submission time, so the result depends only on the inputs.
Decision auto_verdict(const AnswerSpec& spec, const AnswerValue& answer, const EvidenceRecord& evidence,
                      std::string_view schema);

/// Ruling by the arbiter named in the transaction's ManualRuling policy.
Decision manual_verdict(std::string_view arbiter, const Transaction& t, Verdict verdict, std::string rationale,
                        Timestamp now);

/// Builds an attestation body in the AutoAttestation format.
std::string make_attestation(std::string_view claimed_outcome, std::string_view supporting_note);

/// One Decision per transaction, recorded once and never replaced.
class DecisionStore {
public:
    /// Throws WrongState if `txn` already has a Decision.
    const Decision& record(const std::string& txn, Decision decision);
    const Decision* find(const std::string& txn) const;
    const std::map<std::string, Decision>& all() const { return decisions_; }

private:
    std::map<std::string, Decision> decisions_;
};

nlohmann::json decision_to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

} // namespace qax
