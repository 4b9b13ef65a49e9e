#pragma once

#include <string>
#include <variant>

namespace qax {

inline constexpr const char* kAttestationSchemaV1 = "attestation/v1";

/// Evidence is a structured attestation checked mechanically.
struct AutoAttestationPolicy {
    std::string schema = kAttestationSchemaV1;
    bool operator==(const AutoAttestationPolicy&) const = default;
};

/// A named arbiter reads the evidence and rules.
struct ManualRulingPolicy {
    std::string arbiter;
    bool operator==(const ManualRulingPolicy&) const = default;
};

using AdjudicationPolicy = std::variant<AutoAttestationPolicy, ManualRulingPolicy>;

} // namespace qax
