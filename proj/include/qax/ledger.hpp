#pragma once

#include "qax/money.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qax {

enum class AccountKind { Buyer, Seller, Escrow, ExchangeFee, Sink };

std::string_view to_string(AccountKind kind);
AccountKind account_kind_from_string(std::string_view s);

struct AccountId {
    std::string value;

    auto operator<=>(const AccountId&) const = default;
};

/// Closed set of reasons; every movement in the journal carries one.
enum class Reason {
    Fund,
    PostPrice,
    PostDeposit,
    Stake,
    FeeQ,
    FeeA,
    PayoutPrice,
    ReturnStake,
    ReturnDeposit,
    ForfeitStake,
    ForfeitDeposit,
    SinkPrice,
    Refund,
};

std::string_view to_string(Reason reason);
Reason reason_from_string(std::string_view s);

/// A single journal record. Transfers debit one account and credit another
/// by the same amount. Faucet issuance (Reason::Fund) is the only record
/// without a debit side and the only way supply enters the ledger.
struct LedgerEntry {
    std::uint64_t seq = 0;
    std::optional<AccountId> debit;
    AccountId credit;
    Money amount;
    Reason reason = Reason::Fund;
    std::optional<std::string> txn;

    bool operator==(const LedgerEntry&) const = default;
};

struct Account {
    AccountId id;
    AccountKind kind = AccountKind::Buyer;
    std::optional<std::string> owner;
    Money balance;
};

/// Exact-integer double-entry ledger. Protocol-agnostic: it enforces only
/// double entry, positive amounts and non-negative balances.
///
/// Not internally synchronized. Callers serialize mutations through a single
/// writer; a Ledger value may be moved between threads.
class Ledger {
public:
    AccountId open_account(AccountKind kind, std::optional<std::string> owner = std::nullopt);

    /// Faucet issuance into `account`. Increases total supply.
    const LedgerEntry& fund(const AccountId& account, Money amount);

    const LedgerEntry& post_entry(const AccountId& debit, const AccountId& credit, Money amount,
                                  Reason reason, std::optional<std::string> txn);

    Money balance_of(const AccountId& account) const;
    Money total_supply() const;
    Money total_issued() const { return issued_; }

    bool contains(const AccountId& account) const { return accounts_.contains(account); }
    const Account& account(const AccountId& account) const;
    std::optional<AccountId> fee_account() const { return fee_; }
    std::optional<AccountId> sink_account() const { return sink_; }

    const std::map<AccountId, Account>& accounts() const { return accounts_; }
    const std::vector<LedgerEntry>& journal() const { return journal_; }

private:
    Account& lookup(const AccountId& account);

    std::map<AccountId, Account> accounts_;
    std::vector<LedgerEntry> journal_;
    std::optional<AccountId> fee_;
    std::optional<AccountId> sink_;
    std::uint64_t next_account_ = 1;
    Money issued_;
};

/// Balances obtained by applying `entries` in order to an all-zero state.
std::map<AccountId, Money> replay_balances(std::span<const LedgerEntry> entries);

/// One JSON object per line, LF terminated.
std::string export_journal(std::span<const LedgerEntry> entries);
std::vector<LedgerEntry> import_journal(std::string_view text);

} // namespace qax
