#pragma once

// Streaming service: newline-delimited JSON over plain TCP and the same
// messages as WebSocket text frames. Broadcast is fire-and-forget; each client
// owns a bounded outbound buffer that drops its oldest pending message when full.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "lunatrack/pipeline.hpp"

namespace lunatrack::service {

struct ServiceOptions {
    /// "host:port"; port 0 picks a free port.
    std::string tcp_address{"127.0.0.1:7070"};
    /// Empty disables the WebSocket endpoint.
    std::string ws_address;
    std::size_t client_buffer{256};
};

/// Receives each inbound line (TCP line or WebSocket text frame).
using InboundHandler = std::function<void(const std::string&)>;

/// WebSocket address derived from a TCP one: same host, next port.
std::string default_ws_address(const std::string& tcp_address);

class StreamService final : public Publisher {
public:
    StreamService(ServiceOptions options, InboundHandler inbound);
    ~StreamService() override;

    /// Binds and starts the I/O thread; throws ResourceError when binding fails.
    void start();
    void stop();

    void publish(const std::string& line) override;
    void set_hello(const std::string& line) override;

    unsigned short tcp_port() const;
    unsigned short ws_port() const;
    std::size_t client_count() const;
    /// Messages discarded from client buffers because a client was slow.
    std::uint64_t dropped() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace lunatrack::service
