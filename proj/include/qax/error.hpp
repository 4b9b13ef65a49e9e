#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qax {

enum class ErrorCode {
    // ledger
    DuplicateSingleton,
    InsufficientFunds,
    SameAccount,
    NonPositiveAmount,
    UnknownAccount,
    // answer_spec
    EmptyOptionSet,
    DuplicateOption,
    EmptyRange,
    VacuousSpec,
    Unparseable,
    // protocol
    InvalidSpec,
    InvalidTerms,
    WrongState,
    DeadlinePassed,
    SelfDealing,
    NotSeller,
    NotBuyer,
    EscrowMismatch,
    // adjudication
    NotArbiter,
    EmptyRationale,
    // incentive_sim
    InvalidProbability,
    InvalidConfig,
    // service
    SequenceGap,
    StorageFailure,
    CorruptEvent,
    NotFound,
    Unauthenticated,
    Forbidden,
    BadRequest,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}
    explicit Error(ErrorCode code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace qax
