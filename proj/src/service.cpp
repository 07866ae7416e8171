#include "lunatrack/service.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "lunatrack/config.hpp"
#include "lunatrack/errors.hpp"

namespace lunatrack::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::string default_ws_address(const std::string& tcp_address) {
    const auto [host, port] = split_address(tcp_address);
    if (port == 0) return host + ":0";
    if (port == 65535) throw ConfigError("no port after 65535 for the WebSocket endpoint");
    return host + ":" + std::to_string(port + 1);
}

namespace {

constexpr std::size_t kMaxInboundLine = 64 * 1024;

class Session : public std::enable_shared_from_this<Session> {
public:
    Session(std::size_t capacity, std::atomic<std::uint64_t>& dropped) : capacity_(capacity), dropped_(dropped) {}
    virtual ~Session() = default;

    virtual void start(const std::string& hello) = 0;
    virtual void close() = 0;

    // Called on the I/O thread only.
    void enqueue(std::shared_ptr<const std::string> msg) {
        if (closed_) return;
        // The front element may be in flight; never evict it.
        const std::size_t in_flight = writing_ ? 1 : 0;
        if (queue_.size() >= capacity_ + in_flight) {
            if (queue_.size() > in_flight) {
                queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(in_flight));
                ++dropped_;
            }
        }
        queue_.push_back(std::move(msg));
        if (!writing_) write_next();
    }

    bool closed() const { return closed_; }

protected:
    virtual void write_next() = 0;

    std::size_t capacity_;
    std::atomic<std::uint64_t>& dropped_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool writing_{false};
    bool closed_{false};
};

class TcpSession final : public Session {
public:
    TcpSession(tcp::socket socket, std::size_t capacity, std::atomic<std::uint64_t>& dropped, InboundHandler& inbound)
        : Session(capacity, dropped), socket_(std::move(socket)), inbound_(inbound), buffer_(kMaxInboundLine) {}

    void start(const std::string& hello) override {
        if (!hello.empty()) enqueue(std::make_shared<const std::string>(hello + "\n"));
        read();
    }

    void close() override {
        if (closed_) return;
        closed_ = true;
        beast::error_code ec;
        socket_.shutdown(tcp::socket::shutdown_both, ec);
        socket_.close(ec);
    }

private:
    void read() {
        auto self = std::static_pointer_cast<TcpSession>(shared_from_this());
        asio::async_read_until(socket_, buffer_, '\n', [self](beast::error_code ec, std::size_t n) {
            if (ec) {
                self->close();
                return;
            }
            std::string line(asio::buffers_begin(self->buffer_.data()),
                             asio::buffers_begin(self->buffer_.data()) + static_cast<std::ptrdiff_t>(n));
            self->buffer_.consume(n);
            while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
            if (!line.empty() && self->inbound_) self->inbound_(line);
            self->read();
        });
    }

    void write_next() override {
        if (queue_.empty() || closed_) {
            writing_ = false;
            return;
        }
        writing_ = true;
        auto self = std::static_pointer_cast<TcpSession>(shared_from_this());
        auto msg = queue_.front();
        asio::async_write(socket_, asio::buffer(*msg), [self, msg](beast::error_code ec, std::size_t) {
            self->queue_.pop_front();
            if (ec) {
                self->writing_ = false;
                self->close();
                return;
            }
            self->write_next();
        });
    }

    tcp::socket socket_;
    InboundHandler& inbound_;
    asio::streambuf buffer_;
};

class WsSession final : public Session {
public:
    WsSession(tcp::socket socket, std::size_t capacity, std::atomic<std::uint64_t>& dropped, InboundHandler& inbound)
        : Session(capacity, dropped), ws_(std::move(socket)), inbound_(inbound) {
        ws_.read_message_max(kMaxInboundLine);
    }

    void start(const std::string& hello) override {
        auto self = std::static_pointer_cast<WsSession>(shared_from_this());
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self, hello](beast::error_code ec) {
            if (ec) {
                self->close();
                return;
            }
            self->accepted_ = true;
            self->ws_.text(true);
            if (!hello.empty()) self->enqueue(std::make_shared<const std::string>(hello));
            if (!self->writing_) self->write_next();
            self->read();
        });
    }

    void close() override {
        if (closed_) return;
        closed_ = true;
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).socket().close(ec);
    }

private:
    void read() {
        auto self = std::static_pointer_cast<WsSession>(shared_from_this());
        ws_.async_read(buffer_, [self](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            if (self->inbound_) self->inbound_(text);
            self->read();
        });
    }

    void write_next() override {
        if (!accepted_) return;
        if (queue_.empty() || closed_) {
            writing_ = false;
            return;
        }
        writing_ = true;
        auto self = std::static_pointer_cast<WsSession>(shared_from_this());
        auto msg = queue_.front();
        ws_.async_write(asio::buffer(*msg), [self, msg](beast::error_code ec, std::size_t) {
            self->queue_.pop_front();
            if (ec) {
                self->writing_ = false;
                self->close();
                return;
            }
            self->write_next();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    InboundHandler& inbound_;
    beast::flat_buffer buffer_;
    bool accepted_{false};
};

}  // namespace

struct StreamService::Impl {
    ServiceOptions options;
    InboundHandler inbound;
    asio::io_context io;
    std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
    std::unique_ptr<tcp::acceptor> tcp_acceptor;
    std::unique_ptr<tcp::acceptor> ws_acceptor;
    std::thread thread;
    std::set<std::shared_ptr<Session>> sessions;  // I/O thread only
    std::atomic<std::size_t> client_count{0};
    std::atomic<std::uint64_t> dropped{0};
    std::mutex hello_mutex;
    std::string hello;
    bool running{false};

    std::unique_ptr<tcp::acceptor> bind(const std::string& address) {
        const auto [host, port] = split_address(address);
        beast::error_code ec;
        const auto ip = asio::ip::make_address(host == "localhost" ? "127.0.0.1" : host, ec);
        if (ec) throw ConfigError("invalid listen host '" + host + "'");
        auto acc = std::make_unique<tcp::acceptor>(io);
        const tcp::endpoint ep(ip, port);
        acc->open(ep.protocol(), ec);
        if (!ec) acc->set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acc->bind(ep, ec);
        if (!ec) acc->listen(asio::socket_base::max_listen_connections, ec);
        if (ec) throw ResourceError("cannot listen on " + address + ": " + ec.message());
        return acc;
    }

    std::string current_hello() {
        std::lock_guard lock(hello_mutex);
        return hello;
    }

    void prune() {
        for (auto it = sessions.begin(); it != sessions.end();) {
            it = (*it)->closed() ? sessions.erase(it) : std::next(it);
        }
        client_count = sessions.size();
    }

    template <typename S>
    void accept(tcp::acceptor& acc) {
        acc.async_accept([this, &acc](beast::error_code ec, tcp::socket socket) {
            if (ec) return;  // acceptor closed
            auto s = std::make_shared<S>(std::move(socket), options.client_buffer, dropped, inbound);
            prune();
            sessions.insert(s);
            client_count = sessions.size();
            s->start(current_hello());
            accept<S>(acc);
        });
    }
};

StreamService::StreamService(ServiceOptions options, InboundHandler inbound) : impl_(std::make_unique<Impl>()) {
    if (options.client_buffer == 0) throw ConfigError("service: client buffer must be positive");
    impl_->options = std::move(options);
    impl_->inbound = std::move(inbound);
}

StreamService::~StreamService() { stop(); }

void StreamService::start() {
    auto& d = *impl_;
    if (d.running) return;
    d.tcp_acceptor = d.bind(d.options.tcp_address);
    if (!d.options.ws_address.empty()) d.ws_acceptor = d.bind(d.options.ws_address);
    d.accept<TcpSession>(*d.tcp_acceptor);
    if (d.ws_acceptor) d.accept<WsSession>(*d.ws_acceptor);
    d.work.emplace(d.io.get_executor());
    d.thread = std::thread([&d] { d.io.run(); });
    d.running = true;
}

void StreamService::stop() {
    auto& d = *impl_;
    if (!d.running) return;
    d.running = false;
    asio::post(d.io, [&d] {
        beast::error_code ec;
        if (d.tcp_acceptor) d.tcp_acceptor->close(ec);
        if (d.ws_acceptor) d.ws_acceptor->close(ec);
        for (const auto& s : d.sessions) s->close();
        d.sessions.clear();
        d.client_count = 0;
        d.work.reset();
    });
    d.thread.join();
}

void StreamService::publish(const std::string& line) {
    auto& d = *impl_;
    if (!d.running || d.client_count.load() == 0) return;
    auto ws_msg = std::make_shared<const std::string>(line);
    auto tcp_msg = std::make_shared<const std::string>(line + "\n");
    asio::post(d.io, [&d, ws_msg, tcp_msg] {
        d.prune();
        for (const auto& s : d.sessions) {
            s->enqueue(dynamic_cast<TcpSession*>(s.get()) != nullptr ? tcp_msg : ws_msg);
        }
    });
}

void StreamService::set_hello(const std::string& line) {
    std::lock_guard lock(impl_->hello_mutex);
    impl_->hello = line;
}

unsigned short StreamService::tcp_port() const {
    return impl_->tcp_acceptor ? impl_->tcp_acceptor->local_endpoint().port() : 0;
}

unsigned short StreamService::ws_port() const {
    return impl_->ws_acceptor ? impl_->ws_acceptor->local_endpoint().port() : 0;
}

std::size_t StreamService::client_count() const { return impl_->client_count.load(); }

std::uint64_t StreamService::dropped() const { return impl_->dropped.load(); }

}  // namespace lunatrack::service
