#include "qax/config.hpp"

#include "qax/answer_spec.hpp"
#include "qax/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qax {

namespace {

std::int64_t parse_int(std::string_view key, std::string_view value)
{
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw Error(ErrorCode::InvalidConfig, std::string(key) + ": not an integer: '" + std::string(value) + "'");
    return out;
}

} // namespace

std::string_view to_string(ClockMode mode)
{
    return mode == ClockMode::Real ? "real" : "simulated";
}

ServiceConfig parse_config(std::string_view text)
{
    ServiceConfig config;
    std::istringstream in{std::string(text)};
    std::string raw_line;
    int line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string line = raw_line.substr(0, raw_line.find('#'));
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "listen") {
            auto colon = value.rfind(':');
            if (colon == std::string::npos)
                throw Error(ErrorCode::InvalidConfig, "listen: expected host:port");
            config.listen_host = value.substr(0, colon);
            auto port = parse_int(key, std::string_view(value).substr(colon + 1));
            if (port < 0 || port > 65535)
                throw Error(ErrorCode::InvalidConfig, "listen: port out of range");
            config.listen_port = static_cast<int>(port);
        } else if (key == "data_dir") {
            config.data_dir = value;
        } else if (key == "fee_q" || key == "fee_a") {
            auto fee = parse_int(key, value);
            if (fee < 0)
                throw Error(ErrorCode::InvalidConfig, key + ": fees must be non-negative");
            (key == "fee_q" ? config.default_buyer_fee : config.default_seller_fee) = Money{fee};
        } else if (key == "clock") {
            if (value == "real")
                config.clock = ClockMode::Real;
            else if (value == "simulated")
                config.clock = ClockMode::Simulated;
            else
                throw Error(ErrorCode::InvalidConfig, "clock: expected real or simulated");
        } else if (key == "admin_token") {
            config.admin_token = value;
        } else if (key == "start_time") {
            config.start_time = parse_int(key, value);
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
        }
    }
    return config;
}

ServiceConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::InvalidConfig, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace qax
