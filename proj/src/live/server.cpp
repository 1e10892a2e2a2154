#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <fstream>
#include <sstream>

#include "ltlreplan/live.hpp"

namespace ltlreplan::live {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

std::string mime_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    return "application/octet-stream";
}

class Client;

}  // namespace

struct LiveServer::Impl {
    LiveSession& session;
    std::filesystem::path root;
    asio::io_context ioc;
    tcp::acceptor acceptor;
    asio::steady_timer timer;
    std::vector<std::weak_ptr<Client>> clients;
    std::weak_ptr<Client> controller;

    Impl(LiveSession& s, std::uint16_t port, std::filesystem::path r)
        : session(s), root(std::move(r)), acceptor(ioc, tcp::endpoint(asio::ip::address_v4::loopback(), port)),
          timer(ioc) {}

    void accept();
    void schedule_tick();
    void broadcast(const std::string& text);
    http::response<http::string_body> serve_static(const http::request<http::string_body>& req) const;
};

namespace {

/// One WebSocket client; writes are queued so at most one is in flight.
class Client : public std::enable_shared_from_this<Client> {
public:
    Client(tcp::socket socket, LiveServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

    void start(http::request<http::string_body> req) {
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->server_.clients.push_back(self);
            if (self->server_.controller.expired()) self->server_.controller = self;
            self->send(self->server_.session.snapshot().dump());
            self->read();
        });
    }

    void send(std::string text) {
        outbox_.push_back(std::move(text));
        if (outbox_.size() == 1) write();
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->handle(text);
            self->read();
        });
    }

    void handle(const std::string& text) {
        json reply;
        const json msg = json::parse(text, nullptr, false);
        if (msg.is_discarded()) {
            reply = {{"type", "event"}, {"kind", "error"}, {"detail", "malformed JSON"}};
        } else if (server_.controller.lock().get() != this) {
            reply = {{"type", "event"}, {"kind", "error"}, {"detail", "read-only session"}};
        } else {
            reply = server_.session.apply(msg);
        }
        send(reply.dump());
    }

    void write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) self->write();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    LiveServer::Impl& server_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
};

/// Plain HTTP connection: serves static files or hands /ws upgrades to a Client.
class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket socket, LiveServer::Impl& server) : stream_(std::move(socket)), server_(server) {}

    void start() {
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->handle();
        });
    }

private:
    void handle() {
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/ws") {
                std::make_shared<Client>(stream_.release_socket(), server_)->start(std::move(req_));
                return;
            }
            res_ = std::make_shared<http::response<http::string_body>>(http::status::not_found, req_.version());
            res_->body() = "no such endpoint";
        } else {
            res_ = std::make_shared<http::response<http::string_body>>(server_.serve_static(req_));
        }
        res_->prepare_payload();
        http::async_write(stream_, *res_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (!self->res_->keep_alive()) {
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                return;
            }
            self->req_ = {};
            self->start();
        });
    }

    beast::tcp_stream stream_;
    LiveServer::Impl& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::shared_ptr<http::response<http::string_body>> res_;
};

}  // namespace

http::response<http::string_body> LiveServer::Impl::serve_static(const http::request<http::string_body>& req) const {
    http::response<http::string_body> res{http::status::ok, req.version()};
    res.keep_alive(req.keep_alive());
    std::string target(req.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target.back() == '/') target += "index.html";
    if (req.method() != http::verb::get || target.find("..") != std::string::npos) {
        res.result(http::status::bad_request);
        res.body() = "bad request";
        return res;
    }
    const std::filesystem::path file = root / target.substr(1);
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        res.result(http::status::not_found);
        res.body() = "not found";
        return res;
    }
    std::ostringstream body;
    body << in.rdbuf();
    res.set(http::field::content_type, mime_type(file));
    res.body() = body.str();
    return res;
}

void LiveServer::Impl::accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        std::make_shared<HttpConnection>(std::move(socket), *this)->start();
        accept();
    });
}

void LiveServer::Impl::broadcast(const std::string& text) {
    std::erase_if(clients, [](const auto& w) { return w.expired(); });
    for (auto& w : clients)
        if (auto c = w.lock()) c->send(text);
}

void LiveServer::Impl::schedule_tick() {
    const auto period = std::chrono::duration<double>(session.dt() / session.speed());
    timer.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(period));
    timer.async_wait([this](beast::error_code ec) {
        if (ec) return;
        for (const auto& e : session.step()) broadcast(event_message(e).dump());
        broadcast(session.snapshot().dump());
        schedule_tick();
    });
}

LiveServer::LiveServer(LiveSession& session, std::uint16_t port, std::filesystem::path static_root)
    : impl_(std::make_unique<Impl>(session, port, std::move(static_root))) {}

LiveServer::~LiveServer() { stop(); }

std::uint16_t LiveServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void LiveServer::run() {
    impl_->accept();
    impl_->schedule_tick();
    impl_->ioc.run();
}

void LiveServer::stop() { impl_->ioc.stop(); }

}  // namespace ltlreplan::live
