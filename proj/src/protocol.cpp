#include "qax/protocol.hpp"

#include "qax/digest.hpp"
#include "qax/error.hpp"

#include <nlohmann/json.hpp>

#include <utility>

namespace qax {

namespace {

constexpr std::array<std::pair<TxState, std::string_view>, 11> kStateNames{{
    {TxState::Draft, "Draft"},
    {TxState::Posted, "Posted"},
    {TxState::Accepted, "Accepted"},
    {TxState::Answered, "Answered"},
    {TxState::AnswerRejected, "AnswerRejected"},
    {TxState::EvidenceSubmitted, "EvidenceSubmitted"},
    {TxState::Adjudicated, "Adjudicated"},
    {TxState::Settled, "Settled"},
    {TxState::ExpiredUnaccepted, "ExpiredUnaccepted"},
    {TxState::ExpiredUnanswered, "ExpiredUnanswered"},
    {TxState::ExpiredUnverified, "ExpiredUnverified"},
}};

[[noreturn]] void wrong_state(const Transaction& t, std::string_view op)
{
    throw Error(ErrorCode::WrongState, std::string(op) + " not allowed in state " + std::string(to_string(t.state)));
}

void require_state(const Transaction& t, TxState expected, std::string_view op)
{
    if (t.state != expected)
        wrong_state(t, op);
}

} // namespace

std::string_view to_string(TxState state)
{
    for (const auto& [s, name] : kStateNames)
        if (s == state)
            return name;
    return "Unknown";
}

TxState tx_state_from_string(std::string_view s)
{
    for (const auto& [state, name] : kStateNames)
        if (name == s)
            return state;
    throw Error(ErrorCode::CorruptEvent, "unknown transaction state '" + std::string(s) + "'");
}

std::string_view to_string(Verdict verdict)
{
    switch (verdict) {
    case Verdict::Correct: return "Correct";
    case Verdict::Incorrect: return "Incorrect";
    case Verdict::InsufficientEvidence: return "InsufficientEvidence";
    }
    return "Unknown";
}

Verdict verdict_from_string(std::string_view s)
{
    if (s == "Correct")
        return Verdict::Correct;
    if (s == "Incorrect")
        return Verdict::Incorrect;
    if (s == "InsufficientEvidence")
        return Verdict::InsufficientEvidence;
    throw Error(ErrorCode::BadRequest, "unknown verdict '" + std::string(s) + "'");
}

std::string_view to_string(SettlementPath path)
{
    switch (path) {
    case SettlementPath::Correct: return "Correct";
    case SettlementPath::Incorrect: return "Incorrect";
    case SettlementPath::InsufficientEvidence: return "InsufficientEvidence";
    case SettlementPath::AnswerRejected: return "AnswerRejected";
    case SettlementPath::ExpiredUnanswered: return "ExpiredUnanswered";
    case SettlementPath::ExpiredUnverified: return "ExpiredUnverified";
    case SettlementPath::ExpiredUnaccepted: return "ExpiredUnaccepted";
    }
    return "Unknown";
}

std::optional<std::string> terms_violation(const Terms& terms)
{
    if (terms.price <= Money{})
        return "price must be positive";
    if (terms.stake <= Money{})
        return "stake must be positive";
    if (terms.deposit <= Money{})
        return "deposit must be positive";
    if (terms.buyer_fee < Money{} || terms.seller_fee < Money{})
        return "fees must be non-negative";
    if (terms.answer_deadline >= terms.evidence_deadline)
        return "answer deadline must precede evidence deadline";
    return std::nullopt;
}

std::vector<PlannedTransfer> payout_plan(const Terms& terms, SettlementPath path)
{
    std::vector<PlannedTransfer> plan;
    auto add = [&](Role from, Role to, Money amount, Reason reason) {
        if (amount > Money{})
            plan.push_back({from, to, amount, reason});
    };

    switch (path) {
    case SettlementPath::Correct:
        add(Role::Escrow, Role::Seller, terms.price, Reason::PayoutPrice);
        add(Role::Escrow, Role::Seller, terms.stake, Reason::ReturnStake);
        add(Role::Escrow, Role::Buyer, terms.deposit, Reason::ReturnDeposit);
        break;
    case SettlementPath::Incorrect:
        add(Role::Escrow, Role::Sink, terms.price, Reason::SinkPrice);
        add(Role::Escrow, Role::Sink, terms.stake, Reason::ForfeitStake);
        add(Role::Escrow, Role::Buyer, terms.deposit, Reason::ReturnDeposit);
        break;
    case SettlementPath::InsufficientEvidence:
    case SettlementPath::ExpiredUnverified:
        add(Role::Escrow, Role::Seller, terms.price, Reason::PayoutPrice);
        add(Role::Escrow, Role::Seller, terms.stake, Reason::ReturnStake);
        add(Role::Escrow, Role::Sink, terms.deposit, Reason::ForfeitDeposit);
        break;
    case SettlementPath::AnswerRejected:
    case SettlementPath::ExpiredUnanswered:
        add(Role::Escrow, Role::Sink, terms.stake, Reason::ForfeitStake);
        add(Role::Escrow, Role::Buyer, terms.price, Reason::Refund);
        add(Role::Escrow, Role::Buyer, terms.deposit, Reason::ReturnDeposit);
        break;
    case SettlementPath::ExpiredUnaccepted:
        add(Role::Escrow, Role::Buyer, terms.price, Reason::Refund);
        add(Role::Escrow, Role::Buyer, terms.deposit, Reason::ReturnDeposit);
        add(Role::ExchangeFee, Role::Buyer, terms.buyer_fee, Reason::Refund);
        break;
    }
    return plan;
}

std::optional<SettlementPath> settlement_path(const Transaction& t)
{
    switch (t.state) {
    case TxState::Adjudicated:
        if (!t.verdict)
            return std::nullopt;
        switch (*t.verdict) {
        case Verdict::Correct: return SettlementPath::Correct;
        case Verdict::Incorrect: return SettlementPath::Incorrect;
        case Verdict::InsufficientEvidence: return SettlementPath::InsufficientEvidence;
        }
        return std::nullopt;
    case TxState::AnswerRejected: return SettlementPath::AnswerRejected;
    case TxState::ExpiredUnanswered: return SettlementPath::ExpiredUnanswered;
    case TxState::ExpiredUnverified: return SettlementPath::ExpiredUnverified;
    case TxState::ExpiredUnaccepted: return SettlementPath::ExpiredUnaccepted;
    default: return std::nullopt;
    }
}

Money expected_escrow(const Transaction& t)
{
    switch (t.state) {
    case TxState::Draft:
    case TxState::Settled: return Money{};
    case TxState::Posted:
    case TxState::ExpiredUnaccepted: return t.terms.price + t.terms.deposit;
    default: return t.terms.price + t.terms.deposit + t.terms.stake;
    }
}

Protocol::Protocol(Ledger& ledger) : ledger_(ledger)
{
    fee_ = ledger_.fee_account() ? *ledger_.fee_account() : ledger_.open_account(AccountKind::ExchangeFee);
    sink_ = ledger_.sink_account() ? *ledger_.sink_account() : ledger_.open_account(AccountKind::Sink);
}

AccountId Protocol::account_for(const Transaction& t, Role role) const
{
    switch (role) {
    case Role::Buyer: return t.buyer.account;
    case Role::Seller: return t.seller->account;
    case Role::Escrow: return t.escrow;
    case Role::ExchangeFee: return fee_;
    case Role::Sink: return sink_;
    }
    throw Error(ErrorCode::BadRequest, "unknown role");
}

Transaction Protocol::create_question(std::string id, Participant buyer, std::string text, AnswerSpec spec,
                                      Terms terms, AdjudicationPolicy policy)
{
    if (auto check = validate_spec(spec); !check.ok())
        throw Error(ErrorCode::InvalidSpec, std::string(to_string(*check.violation)) + ": " + check.detail);
    if (auto violation = terms_violation(terms))
        throw Error(ErrorCode::InvalidTerms, *violation);
    if (const auto* manual = std::get_if<ManualRulingPolicy>(&policy); manual && manual->arbiter.empty())
        throw Error(ErrorCode::BadRequest, "manual ruling policy needs an arbiter");
    if (!ledger_.contains(buyer.account))
        throw Error(ErrorCode::UnknownAccount, buyer.account.value);

    Transaction t;
    t.id = std::move(id);
    t.buyer = std::move(buyer);
    t.question_text = std::move(text);
    t.spec = std::move(spec);
    t.terms = terms;
    t.policy = std::move(policy);
    t.escrow = ledger_.open_account(AccountKind::Escrow, t.id);
    return t;
}

Transaction Protocol::post_question(Transaction t)
{
    require_state(t, TxState::Draft, "post_question");
    const Terms& terms = t.terms;
    Money needed = terms.price + terms.deposit + terms.buyer_fee;
    if (ledger_.balance_of(t.buyer.account) < needed)
        throw Error(ErrorCode::InsufficientFunds, "buyer needs " + std::to_string(needed.minor()));

    ledger_.post_entry(t.buyer.account, t.escrow, terms.price, Reason::PostPrice, t.id);
    ledger_.post_entry(t.buyer.account, t.escrow, terms.deposit, Reason::PostDeposit, t.id);
    if (terms.buyer_fee > Money{})
        ledger_.post_entry(t.buyer.account, fee_, terms.buyer_fee, Reason::FeeQ, t.id);
    t.state = TxState::Posted;
    return t;
}

Transaction Protocol::accept_question(Transaction t, Participant seller, Timestamp now)
{
    require_state(t, TxState::Posted, "accept_question");
    if (seller.pseudonym == t.buyer.pseudonym || seller.account == t.buyer.account)
        throw Error(ErrorCode::SelfDealing, "buyer cannot accept its own question");
    if (now > t.terms.answer_deadline)
        throw Error(ErrorCode::DeadlinePassed, "answer deadline passed");
    Money needed = t.terms.stake + t.terms.seller_fee;
    if (ledger_.balance_of(seller.account) < needed)
        throw Error(ErrorCode::InsufficientFunds, "seller needs " + std::to_string(needed.minor()));

    ledger_.post_entry(seller.account, t.escrow, t.terms.stake, Reason::Stake, t.id);
    if (t.terms.seller_fee > Money{})
        ledger_.post_entry(seller.account, fee_, t.terms.seller_fee, Reason::FeeA, t.id);
    t.seller = std::move(seller);
    t.state = TxState::Accepted;
    return t;
}

Transaction Protocol::submit_answer(Transaction t, std::string_view caller, std::string_view raw, Timestamp now)
{
    require_state(t, TxState::Accepted, "submit_answer");
    if (caller != t.seller->pseudonym)
        throw Error(ErrorCode::NotSeller, "only the seller may answer");
    if (now > t.terms.answer_deadline)
        throw Error(ErrorCode::DeadlinePassed, "answer deadline passed");

    AnswerValue value{std::string(raw), std::string{}, 0};
    Membership membership = Membership::OutsideSet;
    try {
        value = canonicalize(t.spec, raw);
        membership = check_membership(t.spec, value);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Unparseable)
            throw;
    }
    t.answer = std::move(value);
    t.state = membership == Membership::InSet ? TxState::Answered : TxState::AnswerRejected;
    return t;
}

Transaction Protocol::submit_evidence(Transaction t, std::string_view caller, std::string body, Timestamp now)
{
    require_state(t, TxState::Answered, "submit_evidence");
    if (caller != t.buyer.pseudonym)
        throw Error(ErrorCode::NotBuyer, "only the buyer may submit evidence");
    if (now > t.terms.evidence_deadline)
        throw Error(ErrorCode::DeadlinePassed, "evidence deadline passed");

    std::string digest = sha256_hex(body);
    t.evidence = EvidenceRecord{std::move(body), std::move(digest), now};
    t.state = TxState::EvidenceSubmitted;
    return t;
}

Transaction Protocol::adjudicate(Transaction t, Verdict verdict)
{
    require_state(t, TxState::EvidenceSubmitted, "adjudicate");
    t.verdict = verdict;
    t.state = TxState::Adjudicated;
    return t;
}

Transaction Protocol::settle(Transaction t)
{
    auto path = settlement_path(t);
    if (!path)
        wrong_state(t, "settle");

    Money escrow_balance = ledger_.balance_of(t.escrow);
    Money expected = expected_escrow(t);
    if (escrow_balance != expected)
        throw Error(ErrorCode::EscrowMismatch, t.escrow.value + " holds " + std::to_string(escrow_balance.minor()) +
                                                   ", expected " + std::to_string(expected.minor()));
    auto plan = payout_plan(t.terms, *path);
    Money from_fee;
    for (const auto& transfer : plan)
        if (transfer.from == Role::ExchangeFee)
            from_fee += transfer.amount;
    if (ledger_.balance_of(fee_) < from_fee)
        throw Error(ErrorCode::EscrowMismatch, "fee account cannot cover refund");

    for (const auto& transfer : plan)
        ledger_.post_entry(account_for(t, transfer.from), account_for(t, transfer.to), transfer.amount,
                           transfer.reason, t.id);
    t.settled_from = t.state;
    t.state = TxState::Settled;
    return t;
}

Transaction Protocol::advance_time(Transaction t, Timestamp now)
{
    switch (t.state) {
    case TxState::Posted:
        if (now > t.terms.answer_deadline)
            t.state = TxState::ExpiredUnaccepted;
        break;
    case TxState::Accepted:
        if (now > t.terms.answer_deadline)
            t.state = TxState::ExpiredUnanswered;
        break;
    case TxState::Answered:
        if (now > t.terms.evidence_deadline)
            t.state = TxState::ExpiredUnverified;
        break;
    default:
        break;
    }
    return t;
}

nlohmann::json terms_to_json(const Terms& terms)
{
    return nlohmann::json{
        {"price_P", terms.price.minor()},
        {"stake_S", terms.stake.minor()},
        {"deposit_D", terms.deposit.minor()},
        {"fee_Q", terms.buyer_fee.minor()},
        {"fee_A", terms.seller_fee.minor()},
        {"answer_deadline", terms.answer_deadline},
        {"evidence_deadline", terms.evidence_deadline},
    };
}

Terms terms_from_json(const nlohmann::json& j, Money default_buyer_fee, Money default_seller_fee)
{
    try {
        Terms terms;
        terms.price = Money{j.at("price_P").get<std::int64_t>()};
        terms.stake = Money{j.at("stake_S").get<std::int64_t>()};
        terms.deposit = Money{j.at("deposit_D").get<std::int64_t>()};
        terms.buyer_fee = j.contains("fee_Q") ? Money{j.at("fee_Q").get<std::int64_t>()} : default_buyer_fee;
        terms.seller_fee = j.contains("fee_A") ? Money{j.at("fee_A").get<std::int64_t>()} : default_seller_fee;
        terms.answer_deadline = j.at("answer_deadline").get<Timestamp>();
        terms.evidence_deadline = j.at("evidence_deadline").get<Timestamp>();
        return terms;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::InvalidTerms, ex.what());
    }
}

nlohmann::json policy_to_json(const AdjudicationPolicy& policy)
{
    if (const auto* manual = std::get_if<ManualRulingPolicy>(&policy))
        return {{"kind", "ManualRuling"}, {"arbiter", manual->arbiter}};
    return {{"kind", "AutoAttestation"}, {"schema", std::get<AutoAttestationPolicy>(policy).schema}};
}

AdjudicationPolicy policy_from_json(const nlohmann::json& j)
{
    try {
        auto kind = j.at("kind").get<std::string>();
        if (kind == "ManualRuling")
            return ManualRulingPolicy{j.at("arbiter").get<std::string>()};
        if (kind == "AutoAttestation") {
            auto schema = j.value("schema", std::string(kAttestationSchemaV1));
            if (schema != kAttestationSchemaV1)
                throw Error(ErrorCode::BadRequest, "unsupported attestation schema '" + schema + "'");
            return AutoAttestationPolicy{schema};
        }
        throw Error(ErrorCode::BadRequest, "unknown policy kind '" + kind + "'");
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::BadRequest, ex.what());
    }
}

namespace {

nlohmann::json participant_to_json(const Participant& p)
{
    return {{"pseudonym", p.pseudonym}, {"account", p.account.value}};
}

Participant participant_from_json(const nlohmann::json& j)
{
    return {j.at("pseudonym").get<std::string>(), AccountId{j.at("account").get<std::string>()}};
}

} // namespace

nlohmann::json transaction_to_json(const Transaction& t)
{
    nlohmann::json j;
    j["id"] = t.id;
    j["buyer"] = participant_to_json(t.buyer);
    j["seller"] = t.seller ? participant_to_json(*t.seller) : nlohmann::json(nullptr);
    j["question_text"] = t.question_text;
    j["spec"] = spec_to_json(t.spec);
    j["terms"] = terms_to_json(t.terms);
    j["policy"] = policy_to_json(t.policy);
    j["state"] = to_string(t.state);
    if (t.answer)
        j["answer"] = {{"raw", t.answer->raw}, {"canonical", t.answer->canonical}, {"number", t.answer->number}};
    else
        j["answer"] = nullptr;
    if (t.evidence)
        j["evidence"] = {{"body_base64", base64_encode(t.evidence->body)},
                         {"digest", t.evidence->digest},
                         {"submitted_at", t.evidence->submitted_at}};
    else
        j["evidence"] = nullptr;
    j["verdict"] = t.verdict ? nlohmann::json(to_string(*t.verdict)) : nlohmann::json(nullptr);
    j["escrow_account"] = t.escrow.value;
    j["settled_from"] = t.settled_from ? nlohmann::json(to_string(*t.settled_from)) : nlohmann::json(nullptr);
    return j;
}

Transaction transaction_from_json(const nlohmann::json& j)
{
    try {
        Transaction t;
        t.id = j.at("id").get<std::string>();
        t.buyer = participant_from_json(j.at("buyer"));
        if (!j.at("seller").is_null())
            t.seller = participant_from_json(j.at("seller"));
        t.question_text = j.at("question_text").get<std::string>();
        t.spec = spec_from_json(j.at("spec"));
        t.terms = terms_from_json(j.at("terms"));
        t.policy = policy_from_json(j.at("policy"));
        t.state = tx_state_from_string(j.at("state").get<std::string>());
        if (const auto& a = j.at("answer"); !a.is_null())
            t.answer = AnswerValue{a.at("raw").get<std::string>(), a.at("canonical").get<std::string>(),
                                   a.at("number").get<std::int64_t>()};
        if (const auto& e = j.at("evidence"); !e.is_null()) {
            auto body = base64_decode(e.at("body_base64").get<std::string>());
            if (!body)
                throw Error(ErrorCode::CorruptEvent, "evidence body is not base64");
            t.evidence = EvidenceRecord{*body, e.at("digest").get<std::string>(), e.at("submitted_at").get<Timestamp>()};
        }
        if (const auto& v = j.at("verdict"); !v.is_null())
            t.verdict = verdict_from_string(v.get<std::string>());
        t.escrow = AccountId{j.at("escrow_account").get<std::string>()};
        if (const auto& s = j.at("settled_from"); !s.is_null())
            t.settled_from = tx_state_from_string(s.get<std::string>());
        return t;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptEvent, ex.what());
    }
}

} // namespace qax
