#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "casa/service.hpp"

namespace casa {

struct ServerOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8765;  // 0 picks a free port
    SessionOptions session;
    std::size_t queue_capacity = 256;
};

/// WebSocket front end: one SessionCore per connection, ticked on the
/// server's clock at the active scenario's tick rate. All connections share
/// one I/O thread.
class WebSocketServer {
public:
    explicit WebSocketServer(ServerOptions options);
    ~WebSocketServer();

    /// Port actually bound.
    unsigned short port() const;

    /// Serves until stop() is called.
    void run();

    /// Safe to call from any thread.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace casa
