#pragma once

#include "qax/money.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace qax {

enum class ClockMode { Real, Simulated };

/// Service configuration, read from `key=value` lines. `#` starts a comment.
///
///   listen=127.0.0.1:8080
///   data_dir=./data
///   fee_q=5000
///   fee_a=5000
///   clock=simulated        # or real
///   admin_token=...        # bearer token for /admin/*; empty disables them
///   start_time=1700000000  # simulated clock origin
struct ServiceConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::filesystem::path data_dir = "data";
    Money default_buyer_fee{5000};
    Money default_seller_fee{5000};
    ClockMode clock = ClockMode::Simulated;
    std::string admin_token;
    Timestamp start_time = 0;
};

/// Throws Error(InvalidConfig) on unknown keys or malformed values.
ServiceConfig parse_config(std::string_view text);
ServiceConfig load_config(const std::filesystem::path& path);

std::string_view to_string(ClockMode mode);

} // namespace qax
