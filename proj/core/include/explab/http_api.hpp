#pragma once

#include <memory>
#include <string>

#include "explab/session_service.hpp"

namespace explab {

/// JSON body for a session view, as returned by the HTTP endpoints.
std::string view_to_json(const SessionView& view);

/// HTTP front end for a SessionService:
///   POST /sessions                 {"experiment":1,"condition":"","subject":"p01","budget":N}
///   POST /sessions/{id}/actions    {"action":"forward"}
///   POST /sessions/{id}/advance
///   GET  /sessions/{id}
///   GET  /sessions/{id}/export
///   GET  /mazes/{id}               ?layout=1 adds the ASCII layout
/// Errors are {"error":{"code":…,"message":…}} with status 400, 404, 409 or 500.
class HttpApi {
public:
    explicit HttpApi(SessionService& service);
    ~HttpApi();
    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Blocks until stop(). Returns false if the address cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it, or -1 on failure.
    int bind_any_port(const std::string& host);
    /// Serves on the socket from bind_any_port; blocks until stop().
    bool serve_bound();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace explab
