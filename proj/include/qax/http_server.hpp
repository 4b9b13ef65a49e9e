#pragma once

#include "qax/exchange.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace qax {

/// HTTP/JSON front end. Each request is translated into a qax::Request and
/// handed to Exchange::route_request; credentials travel as
/// `Authorization: Bearer <credential>`.
class HttpServer {
public:
    explicit HttpServer(Exchange& exchange);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; returns the bound port (useful with port 0). Throws on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    void stop();

private:
    Exchange& exchange_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace qax
