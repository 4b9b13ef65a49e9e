#pragma once

#include "qax/adjudication.hpp"
#include "qax/config.hpp"
#include "qax/event_log.hpp"
#include "qax/ledger.hpp"
#include "qax/protocol.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace qax {

struct Request {
    std::string method;
    std::string path;
    /// Bearer credential, if the caller presented one.
    std::optional<std::string> credential;
    std::string body;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

int http_status(ErrorCode code);

struct ExchangeOptions {
    Money default_buyer_fee{5000};
    Money default_seller_fee{5000};
    ClockMode clock = ClockMode::Simulated;
    std::string admin_token;
    Timestamp start_time = 0;
    /// Seeds pseudonym/credential generation. Unset uses the OS CSPRNG.
    std::optional<std::uint64_t> token_seed;

    static ExchangeOptions from_config(const ServiceConfig& config);
};

struct PartyRegistration {
    std::string pseudonym;
    /// SHA-256 of the credential; the credential itself is never stored.
    std::string credential_digest;
    std::set<std::string> capabilities;
    std::optional<AccountId> buyer_account;
    std::optional<AccountId> seller_account;
};

/// The central exchange: parties, questions, escrow and adjudication behind
/// one request router. State is event sourced; every mutating request that
/// succeeds appends exactly one Event, and replaying the log rebuilds the
/// same state.
///
/// Thread-safe. Mutations are serialized under one writer lock, which also
/// fixes the event order; reads share the lock.
class Exchange {
public:
    explicit Exchange(ExchangeOptions options, EventLog log = EventLog{});

    Exchange(const Exchange&) = delete;
    Exchange& operator=(const Exchange&) = delete;

    /// Loads `log_path` (dropping a torn trailing write), replays it, and
    /// appends new events to the same file.
    static std::unique_ptr<Exchange> open(ExchangeOptions options, const std::filesystem::path& log_path);

    Response route_request(const Request& request);

    /// Anonymized view of a transaction for `viewer` (a pseudonym). Throws
    /// NotFound for anyone who is not a participant or the assigned arbiter.
    nlohmann::json render_view(const std::string& txn, const std::string& viewer) const;

    /// Canonical serialization of the full state; identical logs give
    /// byte-identical output.
    std::string serialize_state() const;

    std::uint64_t event_count() const;
    std::vector<Event> events() const;
    Timestamp now() const;
    bool poisoned() const;

    Money balance_of(const AccountId& account) const;
    Money total_supply() const;
    Money total_issued() const;
    std::optional<AccountId> fee_account() const;
    std::optional<AccountId> sink_account() const;
    std::vector<LedgerEntry> journal() const;
    std::optional<Transaction> transaction(const std::string& id) const;
    std::optional<PartyRegistration> party(const std::string& pseudonym) const;

private:
    void apply(const Event& e);
    void apply_registered(const Event& e);
    void apply_funded(const Event& e);
    void apply_question_created(const Event& e);
    void apply_question_posted(const Event& e);
    void apply_accepted(const Event& e);
    void apply_answered(const Event& e);
    void apply_evidence(const Event& e);
    void apply_adjudicated(const Event& e);
    void apply_settled(const Event& e);
    void apply_time_advanced(const Event& e);

    Response dispatch(const Request& request);
    Response commit(EventKind kind, nlohmann::json payload, std::optional<Timestamp> recorded_at = std::nullopt);
    std::string authenticate(const Request& request) const;
    bool is_admin(const Request& request) const;
    std::string new_token(std::size_t bytes, std::uint64_t slot) const;
    Timestamp current_time() const;

    bool is_participant(const Transaction& t, const std::string& actor) const;
    Transaction& visible(const std::string& txn, const std::string& actor);
    const Transaction& visible(const std::string& txn, const std::string& actor) const;
    const PartyRegistration& registered(const std::string& pseudonym) const;
    nlohmann::json view_locked(const Transaction& t, const std::string& viewer) const;

    ExchangeOptions options_;
    EventLog log_;
    Ledger ledger_;
    std::map<std::string, PartyRegistration> parties_;
    std::map<std::string, std::string> by_credential_;
    std::map<std::string, Transaction> transactions_;
    DecisionStore decisions_;
    Timestamp now_ = 0;
    bool poisoned_ = false;
    mutable std::shared_mutex mutex_;
};

/// Replays `events` into a fresh exchange and returns its serialized state.
std::string replay_state(const ExchangeOptions& options, std::vector<Event> events);

inline constexpr const char* kAdminActor = "@admin";

} // namespace qax
