#include "qax/exchange.hpp"

#include "qax/digest.hpp"
#include "qax/error.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <sstream>

namespace qax {

namespace {

const std::set<std::string> kCapabilities{"buy", "sell", "arbitrate"};

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(path.substr(0, path.find('?')));
    while (std::getline(in, part, '/'))
        if (!part.empty())
            parts.push_back(part);
    return parts;
}

nlohmann::json parse_body(const std::string& body)
{
    if (trim(body).empty())
        return nlohmann::json::object();
    auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
}

Response error_response(const Error& e)
{
    return Response{http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}}};
}

const std::string& actor_of(const Event& e)
{
    return e.payload.at("actor").get_ref<const std::string&>();
}

} // namespace

int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::WrongState: return 409;
    case ErrorCode::InsufficientFunds: return 402;
    case ErrorCode::DeadlinePassed: return 410;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Unauthenticated: return 401;
    case ErrorCode::NotSeller:
    case ErrorCode::NotBuyer:
    case ErrorCode::NotArbiter:
    case ErrorCode::SelfDealing:
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::EmptyOptionSet:
    case ErrorCode::DuplicateOption:
    case ErrorCode::EmptyRange:
    case ErrorCode::VacuousSpec:
    case ErrorCode::Unparseable:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidTerms:
    case ErrorCode::EmptyRationale:
    case ErrorCode::InvalidProbability:
    case ErrorCode::InvalidConfig:
    case ErrorCode::NonPositiveAmount:
    case ErrorCode::BadRequest: return 400;
    case ErrorCode::DuplicateSingleton:
    case ErrorCode::SameAccount:
    case ErrorCode::UnknownAccount:
    case ErrorCode::EscrowMismatch:
    case ErrorCode::SequenceGap:
    case ErrorCode::CorruptEvent: return 500;
    case ErrorCode::StorageFailure: return 503;
    }
    return 500;
}

ExchangeOptions ExchangeOptions::from_config(const ServiceConfig& config)
{
    ExchangeOptions options;
    options.default_buyer_fee = config.default_buyer_fee;
    options.default_seller_fee = config.default_seller_fee;
    options.clock = config.clock;
    options.admin_token = config.admin_token;
    options.start_time = config.start_time;
    return options;
}

Exchange::Exchange(ExchangeOptions options, EventLog log) : options_(std::move(options)), now_(options_.start_time)
{
    Protocol singletons(ledger_); // opens exchange_fee and sink first

    std::uint64_t expected = 1;
    for (const auto& e : log.events()) {
        if (e.seq != expected++)
            throw Error(ErrorCode::SequenceGap, "event " + std::to_string(e.seq) + " out of sequence");
        try {
            apply(e);
        } catch (const Error& err) {
            throw Error(ErrorCode::CorruptEvent, "event " + std::to_string(e.seq) + " cannot be applied: " + err.what());
        } catch (const nlohmann::json::exception& err) {
            throw Error(ErrorCode::CorruptEvent, "event " + std::to_string(e.seq) + ": " + err.what());
        }
    }
    log_ = std::move(log);
}

std::unique_ptr<Exchange> Exchange::open(ExchangeOptions options, const std::filesystem::path& log_path)
{
    if (log_path.has_parent_path())
        std::filesystem::create_directories(log_path.parent_path());
    truncate_torn_tail(log_path);
    auto loaded = load_event_log(log_path);
    EventLog log(log_path);
    log.adopt(std::move(loaded.events));
    return std::make_unique<Exchange>(std::move(options), std::move(log));
}

std::string Exchange::new_token(std::size_t bytes, std::uint64_t slot) const
{
    if (!options_.token_seed)
        return random_hex(bytes);
    // Keyed by the event about to be written, so a restarted process issues
    // the same tokens an uninterrupted one would.
    std::seed_seq seq{*options_.token_seed, log_.size() + 1, slot};
    std::mt19937_64 rng(seq);
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bytes; ++i) {
        auto b = static_cast<unsigned>(rng() & 0xff);
        out += kDigits[b >> 4];
        out += kDigits[b & 0x0f];
    }
    return out;
}

Timestamp Exchange::current_time() const
{
    if (options_.clock == ClockMode::Simulated)
        return now_;
    auto wall = std::chrono::duration_cast<std::chrono::seconds>(
                    std::chrono::system_clock::now().time_since_epoch())
                    .count();
    return std::max<Timestamp>(now_, wall);
}

std::string Exchange::authenticate(const Request& request) const
{
    if (!request.credential || request.credential->empty())
        throw Error(ErrorCode::Unauthenticated, "missing credential");
    if (!options_.admin_token.empty() && *request.credential == options_.admin_token)
        return kAdminActor;
    auto it = by_credential_.find(sha256_hex(*request.credential));
    if (it == by_credential_.end())
        throw Error(ErrorCode::Unauthenticated, "unknown credential");
    return it->second;
}

bool Exchange::is_admin(const Request& request) const
{
    return !options_.admin_token.empty() && request.credential && *request.credential == options_.admin_token;
}

bool Exchange::is_participant(const Transaction& t, const std::string& actor) const
{
    if (actor == kAdminActor || t.buyer.pseudonym == actor)
        return true;
    if (t.seller && t.seller->pseudonym == actor)
        return true;
    const auto* manual = std::get_if<ManualRulingPolicy>(&t.policy);
    return manual != nullptr && manual->arbiter == actor;
}

Transaction& Exchange::visible(const std::string& txn, const std::string& actor)
{
    auto it = transactions_.find(txn);
    if (it == transactions_.end() || !is_participant(it->second, actor))
        throw Error(ErrorCode::NotFound, "no such question");
    return it->second;
}

const Transaction& Exchange::visible(const std::string& txn, const std::string& actor) const
{
    auto it = transactions_.find(txn);
    if (it == transactions_.end() || !is_participant(it->second, actor))
        throw Error(ErrorCode::NotFound, "no such question");
    return it->second;
}

const PartyRegistration& Exchange::registered(const std::string& pseudonym) const
{
    auto it = parties_.find(pseudonym);
    if (it == parties_.end())
        throw Error(ErrorCode::NotFound, "no such party");
    return it->second;
}

// ---------------------------------------------------------------------------
// Event application. Each handler validates before mutating so a throw leaves
// the state untouched; live requests and replay share this path.

void Exchange::apply(const Event& e)
{
    switch (e.kind) {
    case EventKind::Registered: apply_registered(e); break;
    case EventKind::Funded: apply_funded(e); break;
    case EventKind::QuestionCreated: apply_question_created(e); break;
    case EventKind::QuestionPosted: apply_question_posted(e); break;
    case EventKind::Accepted: apply_accepted(e); break;
    case EventKind::Answered: apply_answered(e); break;
    case EventKind::EvidenceSubmitted: apply_evidence(e); break;
    case EventKind::Adjudicated: apply_adjudicated(e); break;
    case EventKind::Settled: apply_settled(e); break;
    case EventKind::TimeAdvanced: apply_time_advanced(e); break;
    }
    now_ = std::max(now_, e.recorded_at);
}

void Exchange::apply_registered(const Event& e)
{
    PartyRegistration reg;
    reg.pseudonym = e.payload.at("pseudonym").get<std::string>();
    reg.credential_digest = e.payload.at("credential_sha256").get<std::string>();
    for (const auto& cap : e.payload.at("capabilities"))
        reg.capabilities.insert(cap.get<std::string>());
    if (reg.capabilities.empty())
        throw Error(ErrorCode::BadRequest, "at least one capability is required");
    for (const auto& cap : reg.capabilities)
        if (!kCapabilities.contains(cap))
            throw Error(ErrorCode::BadRequest, "unknown capability '" + cap + "'");
    if (parties_.contains(reg.pseudonym) || by_credential_.contains(reg.credential_digest))
        throw Error(ErrorCode::BadRequest, "party already registered");

    if (reg.capabilities.contains("buy"))
        reg.buyer_account = ledger_.open_account(AccountKind::Buyer, reg.pseudonym);
    if (reg.capabilities.contains("sell"))
        reg.seller_account = ledger_.open_account(AccountKind::Seller, reg.pseudonym);
    by_credential_.emplace(reg.credential_digest, reg.pseudonym);
    parties_.emplace(reg.pseudonym, std::move(reg));
}

void Exchange::apply_funded(const Event& e)
{
    const auto& reg = registered(e.payload.at("pseudonym").get<std::string>());
    auto role = e.payload.at("role").get<std::string>();
    const auto& account = role == "buyer" ? reg.buyer_account : role == "seller" ? reg.seller_account : std::nullopt;
    if (!account)
        throw Error(ErrorCode::BadRequest, "party has no " + role + " account");
    ledger_.fund(*account, Money{e.payload.at("amount").get<std::int64_t>()});
}

void Exchange::apply_question_created(const Event& e)
{
    const std::string& actor = actor_of(e);
    const auto& reg = registered(actor);
    if (!reg.capabilities.contains("buy"))
        throw Error(ErrorCode::Forbidden, "party cannot buy");
    auto id = e.payload.at("txn").get<std::string>();
    if (transactions_.contains(id))
        throw Error(ErrorCode::CorruptEvent, "duplicate question id " + id);

    AnswerSpec spec = spec_from_json(e.payload.at("spec"));
    Terms terms = terms_from_json(e.payload.at("terms"));
    AdjudicationPolicy policy = policy_from_json(e.payload.at("policy"));
    if (const auto* manual = std::get_if<ManualRulingPolicy>(&policy)) {
        auto it = parties_.find(manual->arbiter);
        if (it == parties_.end() || !it->second.capabilities.contains("arbitrate"))
            throw Error(ErrorCode::BadRequest, "arbiter is not a registered arbitrator");
        if (manual->arbiter == actor)
            throw Error(ErrorCode::SelfDealing, "buyer cannot arbitrate its own question");
    }

    Protocol protocol(ledger_);
    Transaction t = protocol.create_question(id, Participant{actor, *reg.buyer_account},
                                             e.payload.at("question_text").get<std::string>(), std::move(spec), terms,
                                             std::move(policy));
    transactions_.emplace(id, std::move(t));
}

void Exchange::apply_question_posted(const Event& e)
{
    const std::string& actor = actor_of(e);
    Transaction& t = visible(e.payload.at("txn").get<std::string>(), actor);
    if (actor != t.buyer.pseudonym)
        throw Error(ErrorCode::NotBuyer, "only the buyer may post");
    Protocol protocol(ledger_);
    t = protocol.post_question(t);
}

void Exchange::apply_accepted(const Event& e)
{
    const std::string& actor = actor_of(e);
    auto it = transactions_.find(e.payload.at("txn").get<std::string>());
    if (it == transactions_.end())
        throw Error(ErrorCode::NotFound, "no such question");
    Transaction& t = it->second;
    // Outsiders may only ever learn that a question is open for acceptance.
    if (!is_participant(t, actor) && t.state != TxState::Posted)
        throw Error(ErrorCode::NotFound, "no such question");
    if (actor == kAdminActor)
        throw Error(ErrorCode::Forbidden, "the exchange does not sell answers");
    const auto& reg = registered(actor);
    if (!reg.capabilities.contains("sell") || !reg.seller_account)
        throw Error(ErrorCode::Forbidden, "party cannot sell");
    if (const auto* manual = std::get_if<ManualRulingPolicy>(&t.policy); manual && manual->arbiter == actor)
        throw Error(ErrorCode::SelfDealing, "arbiter cannot answer");

    Protocol protocol(ledger_);
    t = protocol.accept_question(t, Participant{actor, *reg.seller_account}, e.recorded_at);
}

void Exchange::apply_answered(const Event& e)
{
    const std::string& actor = actor_of(e);
    Transaction& t = visible(e.payload.at("txn").get<std::string>(), actor);
    Protocol protocol(ledger_);
    t = protocol.submit_answer(t, actor, e.payload.at("answer").get<std::string>(), e.recorded_at);
}

void Exchange::apply_evidence(const Event& e)
{
    const std::string& actor = actor_of(e);
    Transaction& t = visible(e.payload.at("txn").get<std::string>(), actor);
    auto body = base64_decode(e.payload.at("body_base64").get<std::string>());
    if (!body)
        throw Error(ErrorCode::BadRequest, "evidence is not valid base64");
    Protocol protocol(ledger_);
    t = protocol.submit_evidence(t, actor, std::move(*body), e.recorded_at);
}

void Exchange::apply_adjudicated(const Event& e)
{
    const std::string& actor = actor_of(e);
    Transaction& t = visible(e.payload.at("txn").get<std::string>(), actor);
    if (decisions_.find(t.id) != nullptr)
        throw Error(ErrorCode::WrongState, "transaction already has a decision");

    Decision decision;
    if (std::holds_alternative<ManualRulingPolicy>(t.policy)) {
        decision = manual_verdict(actor, t, verdict_from_string(e.payload.at("verdict").get<std::string>()),
                                  e.payload.at("rationale").get<std::string>(), e.recorded_at);
    } else {
        if (t.state != TxState::EvidenceSubmitted)
            throw Error(ErrorCode::WrongState, "adjudicate not allowed in state " + std::string(to_string(t.state)));
        decision = auto_verdict(t.spec, *t.answer, *t.evidence, std::get<AutoAttestationPolicy>(t.policy).schema);
    }
    Protocol protocol(ledger_);
    Transaction next = protocol.adjudicate(t, decision.verdict);
    decisions_.record(t.id, std::move(decision));
    t = std::move(next);
}

void Exchange::apply_settled(const Event& e)
{
    const std::string& actor = actor_of(e);
    Transaction& t = visible(e.payload.at("txn").get<std::string>(), actor);
    Protocol protocol(ledger_);
    t = protocol.settle(Protocol::advance_time(t, e.recorded_at));
}

void Exchange::apply_time_advanced(const Event& e)
{
    auto to = e.payload.at("now").get<Timestamp>();
    if (to < now_)
        throw Error(ErrorCode::BadRequest, "clock cannot move backwards");
    for (auto& [id, t] : transactions_)
        t = Protocol::advance_time(std::move(t), to);
    now_ = to;
}

// ---------------------------------------------------------------------------
// Request routing.

Response Exchange::commit(EventKind kind, nlohmann::json payload, std::optional<Timestamp> recorded_at)
{
    if (poisoned_)
        throw Error(ErrorCode::StorageFailure, "event log unavailable; restart to recover");
    Event e{log_.size() + 1, kind, std::move(payload), recorded_at.value_or(current_time())};
    apply(e);
    try {
        log_.append(e);
    } catch (const Error&) {
        // The in-memory state is now ahead of the durable log.
        poisoned_ = true;
        throw;
    }
    return Response{200, {{"seq", e.seq}}};
}

Response Exchange::route_request(const Request& request)
{
    try {
        if (request.method == "GET") {
            std::shared_lock lock(mutex_);
            return dispatch(request);
        }
        std::unique_lock lock(mutex_);
        return dispatch(request);
    } catch (const Error& e) {
        return error_response(e);
    } catch (const nlohmann::json::exception& e) {
        return error_response(Error(ErrorCode::BadRequest, e.what()));
    }
}

Response Exchange::dispatch(const Request& request)
{
    auto parts = split_path(request.path);
    const std::string& method = request.method;

    if (method == "POST" && parts == std::vector<std::string>{"register"}) {
        auto body = parse_body(request.body);
        nlohmann::json caps = body.value("capabilities", nlohmann::json::array({"buy", "sell"}));
        if (!caps.is_array())
            throw Error(ErrorCode::BadRequest, "capabilities must be an array");
        std::string pseudonym = "anon-" + new_token(8, 0);
        std::string credential = new_token(24, 1);
        commit(EventKind::Registered,
               {{"pseudonym", pseudonym}, {"credential_sha256", sha256_hex(credential)}, {"capabilities", caps}});
        const auto& reg = parties_.at(pseudonym);
        nlohmann::json accounts = nlohmann::json::object();
        if (reg.buyer_account)
            accounts["buyer"] = reg.buyer_account->value;
        if (reg.seller_account)
            accounts["seller"] = reg.seller_account->value;
        return Response{201, {{"pseudonym", pseudonym}, {"credential", credential}, {"accounts", accounts}}};
    }

    if (parts.size() == 2 && parts[0] == "admin" && method == "POST") {
        if (!is_admin(request))
            throw Error(request.credential ? ErrorCode::Forbidden : ErrorCode::Unauthenticated, "admin only");
        auto body = parse_body(request.body);
        if (parts[1] == "fund") {
            auto pseudonym = body.at("pseudonym").get<std::string>();
            auto role = body.value("role", std::string("buyer"));
            commit(EventKind::Funded,
                   {{"actor", kAdminActor},
                    {"pseudonym", pseudonym},
                    {"role", role},
                    {"amount", body.at("amount").get<std::int64_t>()}});
            const auto& reg = parties_.at(pseudonym);
            const auto& account = role == "buyer" ? *reg.buyer_account : *reg.seller_account;
            return Response{200, {{"account", account.value}, {"balance", ledger_.balance_of(account).minor()}}};
        }
        if (parts[1] == "tick") {
            Timestamp to = 0;
            if (options_.clock == ClockMode::Real)
                to = current_time();
            else if (body.contains("now"))
                to = body.at("now").get<Timestamp>();
            else if (body.contains("seconds"))
                to = now_ + body.at("seconds").get<Timestamp>();
            else
                throw Error(ErrorCode::BadRequest, "tick needs 'now' or 'seconds'");
            commit(EventKind::TimeAdvanced, {{"actor", kAdminActor}, {"now", to}}, to);
            return Response{200, {{"now", now_}}};
        }
        throw Error(ErrorCode::NotFound, "no such endpoint");
    }

    std::string actor = authenticate(request);

    if (parts.size() == 2 && parts[0] == "accounts" && method == "GET") {
        AccountId id{parts[1]};
        if (!ledger_.contains(id))
            throw Error(ErrorCode::NotFound, "no such account");
        const Account& account = ledger_.account(id);
        bool own = account.owner == actor &&
                   (account.kind == AccountKind::Buyer || account.kind == AccountKind::Seller);
        if (actor != kAdminActor && !own)
            throw Error(ErrorCode::NotFound, "no such account");
        return Response{200, {{"id", id.value}, {"kind", to_string(account.kind)}, {"balance", account.balance.minor()}}};
    }

    if (parts.size() == 1 && parts[0] == "questions" && method == "POST") {
        if (actor == kAdminActor)
            throw Error(ErrorCode::Forbidden, "the exchange does not ask questions");
        auto body = parse_body(request.body);
        std::string id = "q-" + std::to_string(transactions_.size() + 1);
        Terms terms = terms_from_json(body.at("terms"), options_.default_buyer_fee, options_.default_seller_fee);
        nlohmann::json policy = body.value("policy", policy_to_json(AutoAttestationPolicy{}));
        commit(EventKind::QuestionCreated,
               {{"actor", actor},
                {"txn", id},
                {"question_text", body.at("question_text").get<std::string>()},
                {"spec", spec_to_json(spec_from_json(body.at("spec")))},
                {"terms", terms_to_json(terms)},
                {"policy", policy_to_json(policy_from_json(policy))}});
        return Response{201, view_locked(transactions_.at(id), actor)};
    }

    if (parts.size() >= 2 && parts[0] == "questions") {
        const std::string& id = parts[1];
        if (parts.size() == 2 && method == "GET")
            return Response{200, view_locked(visible(id, actor), actor)};
        if (parts.size() != 3 || method != "POST")
            throw Error(ErrorCode::NotFound, "no such endpoint");

        auto body = parse_body(request.body);
        const std::string& action = parts[2];
        nlohmann::json payload{{"actor", actor}, {"txn", id}};
        EventKind kind;
        if (action == "post") {
            kind = EventKind::QuestionPosted;
        } else if (action == "accept") {
            kind = EventKind::Accepted;
        } else if (action == "answer") {
            kind = EventKind::Answered;
            payload["answer"] = body.at("answer").get<std::string>();
        } else if (action == "evidence") {
            kind = EventKind::EvidenceSubmitted;
            if (body.contains("body_base64")) {
                auto encoded = body.at("body_base64").get<std::string>();
                if (!base64_decode(encoded))
                    throw Error(ErrorCode::BadRequest, "body_base64 is not valid base64");
                payload["body_base64"] = encoded;
            } else {
                payload["body_base64"] = base64_encode(body.at("body").get<std::string>());
            }
        } else if (action == "adjudicate") {
            kind = EventKind::Adjudicated;
            if (body.contains("verdict"))
                payload["verdict"] = body.at("verdict").get<std::string>();
            if (body.contains("rationale"))
                payload["rationale"] = body.at("rationale").get<std::string>();
            const Transaction& t = visible(id, actor);
            if (std::holds_alternative<ManualRulingPolicy>(t.policy)) {
                if (!payload.contains("verdict") || !payload.contains("rationale")) {
                    if (std::get<ManualRulingPolicy>(t.policy).arbiter != actor)
                        throw Error(ErrorCode::NotArbiter, "caller is not the assigned arbiter");
                    throw Error(ErrorCode::BadRequest, "manual ruling needs verdict and rationale");
                }
                verdict_from_string(payload.at("verdict").get<std::string>());
            }
        } else if (action == "settle") {
            kind = EventKind::Settled;
        } else {
            throw Error(ErrorCode::NotFound, "no such endpoint");
        }
        commit(kind, std::move(payload));
        return Response{200, view_locked(transactions_.at(id), actor)};
    }

    throw Error(ErrorCode::NotFound, "no such endpoint");
}

// ---------------------------------------------------------------------------
// Views and serialization.

nlohmann::json Exchange::view_locked(const Transaction& t, const std::string& viewer) const
{
    std::string role = viewer == kAdminActor                                 ? "admin"
                       : viewer == t.buyer.pseudonym                         ? "buyer"
                       : (t.seller && t.seller->pseudonym == viewer)         ? "seller"
                                                                             : "arbiter";
    nlohmann::json v;
    v["id"] = t.id;
    v["viewer_role"] = role;
    v["state"] = to_string(t.state);
    v["settled_from"] = t.settled_from ? nlohmann::json(to_string(*t.settled_from)) : nlohmann::json(nullptr);
    v["question_text"] = t.question_text;
    v["spec"] = spec_to_json(t.spec);
    v["terms"] = terms_to_json(t.terms);
    v["policy"] = policy_to_json(t.policy);
    v["buyer"] = t.buyer.pseudonym;
    v["seller"] = t.seller ? nlohmann::json(t.seller->pseudonym) : nlohmann::json(nullptr);
    v["answer"] = t.answer ? nlohmann::json{{"raw", t.answer->raw}, {"canonical", t.answer->canonical}}
                           : nlohmann::json(nullptr);
    v["evidence"] = t.evidence ? nlohmann::json{{"digest", t.evidence->digest},
                                                {"submitted_at", t.evidence->submitted_at},
                                                {"body_base64", base64_encode(t.evidence->body)}}
                               : nlohmann::json(nullptr);
    v["verdict"] = t.verdict ? nlohmann::json(to_string(*t.verdict)) : nlohmann::json(nullptr);
    const Decision* decision = decisions_.find(t.id);
    v["decision"] = decision ? decision_to_json(*decision) : nlohmann::json(nullptr);

    auto role_of = [&](const AccountId& account) -> std::string {
        if (account == t.buyer.account)
            return "buyer";
        if (t.seller && account == t.seller->account)
            return "seller";
        if (account == t.escrow)
            return "escrow";
        if (ledger_.fee_account() && account == *ledger_.fee_account())
            return "exchange_fee";
        return "sink";
    };
    static constexpr const char* kRoleNames[] = {"buyer", "seller", "escrow", "exchange_fee", "sink"};

    nlohmann::json preview = nlohmann::json::object();
    for (auto path : kAllSettlementPaths) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& p : payout_plan(t.terms, path))
            rows.push_back({{"from", kRoleNames[static_cast<int>(p.from)]},
                            {"to", kRoleNames[static_cast<int>(p.to)]},
                            {"amount", p.amount.minor()},
                            {"reason", to_string(p.reason)}});
        preview[std::string(to_string(path))] = rows;
    }
    v["payout_preview"] = preview;

    nlohmann::json entries = nlohmann::json::array();
    for (const auto& entry : ledger_.journal())
        if (entry.txn == t.id)
            entries.push_back({{"seq", entry.seq},
                               {"from", role_of(*entry.debit)},
                               {"to", role_of(entry.credit)},
                               {"amount", entry.amount.minor()},
                               {"reason", to_string(entry.reason)}});
    v["entries"] = entries;
    return v;
}

nlohmann::json Exchange::render_view(const std::string& txn, const std::string& viewer) const
{
    std::shared_lock lock(mutex_);
    return view_locked(visible(txn, viewer), viewer);
}

std::string Exchange::serialize_state() const
{
    std::shared_lock lock(mutex_);
    nlohmann::json state;
    state["clock"] = now_;
    state["event_count"] = log_.size();

    nlohmann::json parties = nlohmann::json::array();
    for (const auto& [pseudonym, reg] : parties_)
        parties.push_back({{"pseudonym", pseudonym},
                           {"credential_sha256", reg.credential_digest},
                           {"capabilities", reg.capabilities},
                           {"buyer_account", reg.buyer_account ? nlohmann::json(reg.buyer_account->value) : nlohmann::json(nullptr)},
                           {"seller_account", reg.seller_account ? nlohmann::json(reg.seller_account->value) : nlohmann::json(nullptr)}});
    state["parties"] = parties;

    nlohmann::json accounts = nlohmann::json::array();
    for (const auto& [id, account] : ledger_.accounts())
        accounts.push_back({{"id", id.value},
                            {"kind", to_string(account.kind)},
                            {"owner", account.owner ? nlohmann::json(*account.owner) : nlohmann::json(nullptr)},
                            {"balance", account.balance.minor()}});
    state["ledger"] = {{"accounts", accounts},
                       {"issued", ledger_.total_issued().minor()},
                       {"total_supply", ledger_.total_supply().minor()},
                       {"journal", export_journal(ledger_.journal())}};

    nlohmann::json transactions = nlohmann::json::array();
    for (const auto& [id, t] : transactions_)
        transactions.push_back(transaction_to_json(t));
    state["transactions"] = transactions;

    nlohmann::json decisions = nlohmann::json::object();
    for (const auto& [id, d] : decisions_.all())
        decisions[id] = decision_to_json(d);
    state["decisions"] = decisions;
    return state.dump();
}

std::uint64_t Exchange::event_count() const
{
    std::shared_lock lock(mutex_);
    return log_.size();
}

std::vector<Event> Exchange::events() const
{
    std::shared_lock lock(mutex_);
    return log_.events();
}

Timestamp Exchange::now() const
{
    std::shared_lock lock(mutex_);
    return current_time();
}

bool Exchange::poisoned() const
{
    std::shared_lock lock(mutex_);
    return poisoned_;
}

Money Exchange::balance_of(const AccountId& account) const
{
    std::shared_lock lock(mutex_);
    return ledger_.balance_of(account);
}

Money Exchange::total_supply() const
{
    std::shared_lock lock(mutex_);
    return ledger_.total_supply();
}

Money Exchange::total_issued() const
{
    std::shared_lock lock(mutex_);
    return ledger_.total_issued();
}

std::optional<AccountId> Exchange::fee_account() const
{
    std::shared_lock lock(mutex_);
    return ledger_.fee_account();
}

std::optional<AccountId> Exchange::sink_account() const
{
    std::shared_lock lock(mutex_);
    return ledger_.sink_account();
}

std::vector<LedgerEntry> Exchange::journal() const
{
    std::shared_lock lock(mutex_);
    return ledger_.journal();
}

std::optional<Transaction> Exchange::transaction(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = transactions_.find(id);
    if (it == transactions_.end())
        return std::nullopt;
    return it->second;
}

std::optional<PartyRegistration> Exchange::party(const std::string& pseudonym) const
{
    std::shared_lock lock(mutex_);
    auto it = parties_.find(pseudonym);
    if (it == parties_.end())
        return std::nullopt;
    return it->second;
}

std::string replay_state(const ExchangeOptions& options, std::vector<Event> events)
{
    EventLog log;
    log.adopt(std::move(events));
    Exchange exchange(options, std::move(log));
    return exchange.serialize_state();
}

} // namespace qax
