#include "qax/adjudication.hpp"

#include "qax/error.hpp"

#include <nlohmann/json.hpp>

namespace qax {

namespace {

Decision insufficient(const EvidenceRecord& evidence, std::string why)
{
    return Decision{Verdict::InsufficientEvidence, std::move(why), evidence.submitted_at, "AutoAttestation"};
}

} // namespace

Decision auto_verdict(const AnswerSpec& spec, const AnswerValue& answer, const EvidenceRecord& evidence,
                      std::string_view schema)
{
    if (schema != kAttestationSchemaV1)
        return insufficient(evidence, "unsupported attestation schema");

    auto doc = nlohmann::json::parse(evidence.body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object())
        return insufficient(evidence, "evidence is not a JSON object");
    auto claimed = doc.find("claimed_outcome");
    auto note = doc.find("supporting_note");
    if (claimed == doc.end() || !claimed->is_string() || note == doc.end() || !note->is_string())
        return insufficient(evidence, "attestation lacks claimed_outcome/supporting_note strings");

    AnswerValue outcome;
    try {
        outcome = canonicalize(spec, claimed->get<std::string>());
    } catch (const Error&) {
        return insufficient(evidence, "claimed outcome is unparseable");
    }
    if (check_membership(spec, outcome) == Membership::OutsideSet)
        return insufficient(evidence, "claimed outcome is outside the allowed set");

    if (outcome.canonical == answer.canonical)
        return Decision{Verdict::Correct, "attested outcome matches answer '" + answer.canonical + "'",
                        evidence.submitted_at, "AutoAttestation"};
    return Decision{Verdict::Incorrect,
                    "attested outcome '" + outcome.canonical + "' differs from answer '" + answer.canonical + "'",
                    evidence.submitted_at, "AutoAttestation"};
}

Decision manual_verdict(std::string_view arbiter, const Transaction& t, Verdict verdict, std::string rationale,
                        Timestamp now)
{
    const auto* manual = std::get_if<ManualRulingPolicy>(&t.policy);
    if (manual == nullptr || manual->arbiter != arbiter)
        throw Error(ErrorCode::NotArbiter, "caller is not the assigned arbiter");
    if (t.state != TxState::EvidenceSubmitted)
        throw Error(ErrorCode::WrongState, "ruling not allowed in state " + std::string(to_string(t.state)));
    if (trim(rationale).empty())
        throw Error(ErrorCode::EmptyRationale, "a ruling needs a rationale");
    return Decision{verdict, std::move(rationale), now, "ManualRuling"};
}

std::string make_attestation(std::string_view claimed_outcome, std::string_view supporting_note)
{
    nlohmann::json doc{{"claimed_outcome", claimed_outcome}, {"supporting_note", supporting_note}};
    return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

const Decision& DecisionStore::record(const std::string& txn, Decision decision)
{
    auto [it, inserted] = decisions_.emplace(txn, std::move(decision));
    if (!inserted)
        throw Error(ErrorCode::WrongState, "transaction " + txn + " already has a decision");
    return it->second;
}

const Decision* DecisionStore::find(const std::string& txn) const
{
    auto it = decisions_.find(txn);
    return it == decisions_.end() ? nullptr : &it->second;
}

nlohmann::json decision_to_json(const Decision& d)
{
    return {{"verdict", to_string(d.verdict)},
            {"rationale", d.rationale},
            {"decided_at", d.decided_at},
            {"policy_used", d.policy_used}};
}

Decision decision_from_json(const nlohmann::json& j)
{
    try {
        return Decision{verdict_from_string(j.at("verdict").get<std::string>()), j.at("rationale").get<std::string>(),
                        j.at("decided_at").get<Timestamp>(), j.at("policy_used").get<std::string>()};
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptEvent, ex.what());
    }
}

} // namespace qax
