#include "qax/http_server.hpp"

#include "qax/error.hpp"

#include <httplib.h>

namespace qax {

namespace {

std::optional<std::string> bearer(const httplib::Request& req)
{
    auto header = req.get_header_value("Authorization");
    constexpr std::string_view kPrefix = "Bearer ";
    if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0)
        return std::nullopt;
    return header.substr(kPrefix.size());
}

} // namespace

HttpServer::HttpServer(Exchange& exchange) : exchange_(exchange), server_(std::make_unique<httplib::Server>())
{
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        Response r = exchange_.route_request(Request{req.method, req.path, bearer(req), req.body});
        res.status = r.status;
        res.set_content(r.body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), "application/json");
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        int bound = server_->bind_to_any_port(host);
        if (bound < 0)
            throw Error(ErrorCode::StorageFailure, "cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port))
        throw Error(ErrorCode::StorageFailure, "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::run()
{
    server_->listen_after_bind();
}

void HttpServer::stop()
{
    server_->stop();
}

} // namespace qax
