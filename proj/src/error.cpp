#include "qax/error.hpp"

namespace qax {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DuplicateSingleton: return "DuplicateSingleton";
    case ErrorCode::InsufficientFunds: return "InsufficientFunds";
    case ErrorCode::SameAccount: return "SameAccount";
    case ErrorCode::NonPositiveAmount: return "NonPositiveAmount";
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::EmptyOptionSet: return "EmptyOptionSet";
    case ErrorCode::DuplicateOption: return "DuplicateOption";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::VacuousSpec: return "VacuousSpec";
    case ErrorCode::Unparseable: return "Unparseable";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidTerms: return "InvalidTerms";
    case ErrorCode::WrongState: return "WrongState";
    case ErrorCode::DeadlinePassed: return "DeadlinePassed";
    case ErrorCode::SelfDealing: return "SelfDealing";
    case ErrorCode::NotSeller: return "NotSeller";
    case ErrorCode::NotBuyer: return "NotBuyer";
    case ErrorCode::EscrowMismatch: return "EscrowMismatch";
    case ErrorCode::NotArbiter: return "NotArbiter";
    case ErrorCode::EmptyRationale: return "EmptyRationale";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SequenceGap: return "SequenceGap";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::CorruptEvent: return "CorruptEvent";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::BadRequest: return "BadRequest";
    }
    return "Unknown";
}

} // namespace qax
