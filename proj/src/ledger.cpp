#include "qax/ledger.hpp"

#include "qax/error.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <sstream>
#include <utility>

namespace qax {

namespace {

constexpr std::array<std::pair<AccountKind, std::string_view>, 5> kKindNames{{
    {AccountKind::Buyer, "buyer"},
    {AccountKind::Seller, "seller"},
    {AccountKind::Escrow, "escrow"},
    {AccountKind::ExchangeFee, "exchange_fee"},
    {AccountKind::Sink, "sink"},
}};

constexpr std::array<std::pair<Reason, std::string_view>, 13> kReasonNames{{
    {Reason::Fund, "FUND"},
    {Reason::PostPrice, "POST_PRICE"},
    {Reason::PostDeposit, "POST_DEPOSIT"},
    {Reason::Stake, "STAKE"},
    {Reason::FeeQ, "FEE_Q"},
    {Reason::FeeA, "FEE_A"},
    {Reason::PayoutPrice, "PAYOUT_PRICE"},
    {Reason::ReturnStake, "RETURN_STAKE"},
    {Reason::ReturnDeposit, "RETURN_DEPOSIT"},
    {Reason::ForfeitStake, "FORFEIT_STAKE"},
    {Reason::ForfeitDeposit, "FORFEIT_DEPOSIT"},
    {Reason::SinkPrice, "SINK_PRICE"},
    {Reason::Refund, "REFUND"},
}};

} // namespace

std::string_view to_string(AccountKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

AccountKind account_kind_from_string(std::string_view s)
{
    for (const auto& [k, name] : kKindNames)
        if (name == s)
            return k;
    throw Error(ErrorCode::BadRequest, "unknown account kind '" + std::string(s) + "'");
}

std::string_view to_string(Reason reason)
{
    for (const auto& [r, name] : kReasonNames)
        if (r == reason)
            return name;
    return "UNKNOWN";
}

Reason reason_from_string(std::string_view s)
{
    for (const auto& [r, name] : kReasonNames)
        if (name == s)
            return r;
    throw Error(ErrorCode::CorruptEvent, "unknown reason code '" + std::string(s) + "'");
}

AccountId Ledger::open_account(AccountKind kind, std::optional<std::string> owner)
{
    if (kind == AccountKind::ExchangeFee && fee_)
        throw Error(ErrorCode::DuplicateSingleton, "exchange_fee account already exists");
    if (kind == AccountKind::Sink && sink_)
        throw Error(ErrorCode::DuplicateSingleton, "sink account already exists");

    AccountId id{"acct-" + std::to_string(next_account_++)};
    accounts_.emplace(id, Account{id, kind, std::move(owner), Money{}});
    if (kind == AccountKind::ExchangeFee)
        fee_ = id;
    else if (kind == AccountKind::Sink)
        sink_ = id;
    return id;
}

Account& Ledger::lookup(const AccountId& account)
{
    auto it = accounts_.find(account);
    if (it == accounts_.end())
        throw Error(ErrorCode::UnknownAccount, account.value);
    return it->second;
}

const Account& Ledger::account(const AccountId& account) const
{
    auto it = accounts_.find(account);
    if (it == accounts_.end())
        throw Error(ErrorCode::UnknownAccount, account.value);
    return it->second;
}

const LedgerEntry& Ledger::fund(const AccountId& account, Money amount)
{
    Account& target = lookup(account);
    if (amount <= Money{})
        throw Error(ErrorCode::NonPositiveAmount, std::to_string(amount.minor()));
    std::int64_t next_issued = 0;
    if (__builtin_add_overflow(issued_.minor(), amount.minor(), &next_issued))
        throw Error(ErrorCode::BadRequest, "issuance overflow");

    target.balance += amount;
    issued_ = Money{next_issued};
    journal_.push_back(LedgerEntry{journal_.size() + 1, std::nullopt, account, amount, Reason::Fund, std::nullopt});
    return journal_.back();
}

const LedgerEntry& Ledger::post_entry(const AccountId& debit, const AccountId& credit, Money amount,
                                      Reason reason, std::optional<std::string> txn)
{
    Account& from = lookup(debit);
    Account& to = lookup(credit);
    if (debit == credit)
        throw Error(ErrorCode::SameAccount, debit.value);
    if (amount <= Money{})
        throw Error(ErrorCode::NonPositiveAmount, std::to_string(amount.minor()));
    if (reason == Reason::Fund)
        throw Error(ErrorCode::BadRequest, "FUND is reserved for issuance");
    if (from.balance < amount)
        throw Error(ErrorCode::InsufficientFunds, debit.value + " holds " + std::to_string(from.balance.minor()) +
                                                      ", needs " + std::to_string(amount.minor()));

    from.balance -= amount;
    to.balance += amount;
    journal_.push_back(LedgerEntry{journal_.size() + 1, debit, credit, amount, reason, std::move(txn)});
    return journal_.back();
}

Money Ledger::balance_of(const AccountId& account) const
{
    return this->account(account).balance;
}

Money Ledger::total_supply() const
{
    Money total;
    for (const auto& [id, acct] : accounts_)
        total += acct.balance;
    return total;
}

std::map<AccountId, Money> replay_balances(std::span<const LedgerEntry> entries)
{
    std::map<AccountId, Money> balances;
    for (const auto& e : entries) {
        if (e.debit)
            balances[*e.debit] -= e.amount;
        balances[e.credit] += e.amount;
    }
    return balances;
}

namespace {

nlohmann::json entry_to_json(const LedgerEntry& e)
{
    nlohmann::json j;
    j["seq"] = e.seq;
    j["debit"] = e.debit ? nlohmann::json(e.debit->value) : nlohmann::json(nullptr);
    j["credit"] = e.credit.value;
    j["amount"] = e.amount.minor();
    j["reason"] = to_string(e.reason);
    j["txn"] = e.txn ? nlohmann::json(*e.txn) : nlohmann::json(nullptr);
    return j;
}

LedgerEntry entry_from_json(const nlohmann::json& j)
{
    LedgerEntry e;
    e.seq = j.at("seq").get<std::uint64_t>();
    if (!j.at("debit").is_null())
        e.debit = AccountId{j.at("debit").get<std::string>()};
    e.credit = AccountId{j.at("credit").get<std::string>()};
    e.amount = Money{j.at("amount").get<std::int64_t>()};
    e.reason = reason_from_string(j.at("reason").get<std::string>());
    if (!j.at("txn").is_null())
        e.txn = j.at("txn").get<std::string>();
    return e;
}

} // namespace

std::string export_journal(std::span<const LedgerEntry> entries)
{
    std::string out;
    for (const auto& e : entries) {
        out += entry_to_json(e).dump();
        out += '\n';
    }
    return out;
}

std::vector<LedgerEntry> import_journal(std::string_view text)
{
    std::vector<LedgerEntry> entries;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            throw Error(ErrorCode::CorruptEvent, "journal line without LF terminator");
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        try {
            entries.push_back(entry_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::CorruptEvent, ex.what());
        }
    }
    return entries;
}

} // namespace qax
