#pragma once

#include "qax/money.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qax {

/// Ledger deltas for one question, read back from its journal entries.
struct DemoRow {
    std::string id;
    std::string question;
    std::string answer;
    std::string path;
    Money buyer_outflow;
    Money seller_net;
    Money fees;
    Money sink;
};

struct DemoSummary {
    std::vector<DemoRow> rows;
    Money buyer_outflow;
    Money seller_net;
    Money fees;
    Money sink;
    std::int64_t days = 0;
    /// Human-readable reconciliation failures; empty means every total
    /// matched the ledger exactly.
    std::vector<std::string> mismatches;

    bool reconciled() const { return mismatches.empty(); }
};

/// A buyer spends ten simulated days asking five $2,000 questions through the
/// exchange API. Prints a settlement summary to `out` and reconciles it
/// against account balances.
DemoSummary run_demo(std::ostream& out, const std::optional<std::filesystem::path>& log_path = std::nullopt);

std::string format_dollars(Money amount);

} // namespace qax
