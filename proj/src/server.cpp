#include "casa/server.hpp"

#include <chrono>
#include <iostream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace casa {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, const ServerOptions& options, int serial)
        : ws_(std::move(socket)),
          timer_(ws_.get_executor()),
          core_("session-" + std::to_string(serial), options.session),
          queue_(options.queue_capacity) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->read();
            self->next_tick_ = std::chrono::steady_clock::now();
            self->schedule_tick();
        });
    }

    void close() {
        closed_ = true;
        timer_.cancel();
        beast::error_code ec;
        ws_.next_layer().socket().close(ec);
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            const bool was_active = self->core_.active();
            for (auto& msg : self->core_.handle_message(text)) self->queue_.push(msg);
            // A fresh episode restarts the tick clock so its first tick lands
            // one period after the start message.
            if (!was_active && self->core_.active()) self->next_tick_ = std::chrono::steady_clock::now();
            self->flush();
            self->read();
        });
    }

    void schedule_tick() {
        if (closed_) return;
        const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / core_.tick_rate()));
        next_tick_ += period;
        timer_.expires_at(next_tick_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec || self->closed_) return;
            for (auto& msg : self->core_.tick()) self->queue_.push(msg);
            for (auto& msg : self->core_.poll_jobs()) self->queue_.push(msg);
            self->flush();
            self->schedule_tick();
        });
    }

    void flush() {
        if (writing_ || closed_) return;
        auto text = queue_.pop();
        if (!text) return;
        writing_ = true;
        outgoing_ = std::move(*text);
        ws_.text(true);
        ws_.async_write(net::buffer(outgoing_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->writing_ = false;
            if (ec) {
                self->close();
                return;
            }
            self->flush();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    net::steady_timer timer_;
    beast::flat_buffer buffer_;
    SessionCore core_;
    OutboundQueue queue_;
    std::string outgoing_;
    std::chrono::steady_clock::time_point next_tick_;
    bool writing_ = false;
    bool closed_ = false;
};

}  // namespace

struct WebSocketServer::Impl {
    ServerOptions options;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::vector<std::weak_ptr<Connection>> connections;
    int serial = 0;

    void accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            auto conn = std::make_shared<Connection>(std::move(socket), options, serial++);
            connections.push_back(conn);
            conn->start();
            accept();
        });
    }
};

WebSocketServer::WebSocketServer(ServerOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    const tcp::endpoint endpoint(net::ip::make_address(impl_->options.address), impl_->options.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(net::socket_base::max_listen_connections);
    impl_->accept();
}

WebSocketServer::~WebSocketServer() = default;

unsigned short WebSocketServer::port() const {
    return impl_->acceptor.local_endpoint().port();
}

void WebSocketServer::run() {
    impl_->ioc.run();
}

void WebSocketServer::stop() {
    net::post(impl_->ioc, [impl = impl_.get()] {
        beast::error_code ec;
        impl->acceptor.close(ec);
        for (auto& weak : impl->connections)
            if (auto c = weak.lock()) c->close();
        impl->connections.clear();
        impl->ioc.stop();
    });
}

}  // namespace casa
