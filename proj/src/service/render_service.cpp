#include "session.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace rara::service {

std::vector<std::filesystem::path> SceneCache::scene_files() const {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".ply" || ext == ".json")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    return files;
}

SceneHandle SceneCache::load(const std::filesystem::path& file) {
    const auto key = file.string();
    const auto mtime = std::filesystem::last_write_time(file);
    {
        std::shared_lock lk(mutex_);
        const auto it = entries_.find(key);
        if (it != entries_.end() && it->second.mtime == mtime) {
            return it->second.scene;
        }
    }
    // Two sessions may load the same file at once; either result is fine.
    auto scene = std::make_shared<const Scene>(load_scene(file));
    std::unique_lock lk(mutex_);
    entries_[key] = Entry{mtime, scene};
    return scene;
}

SceneHandle SceneCache::get(const std::string& name) {
    for (const auto& file : scene_files()) {
        if (file.stem().string() == name) {
            return load(file);
        }
    }
    return nullptr;
}

nlohmann::json SceneCache::describe() {
    nlohmann::json out = nlohmann::json::array();
    std::set<std::string> seen;
    for (const auto& file : scene_files()) {
        const std::string name = file.stem().string();
        if (!seen.insert(name).second) {
            spdlog::warn("scene {}: name already taken, skipped", file.string());
            continue;
        }
        try {
            const SceneHandle s = load(file);
            const Bounds& b = s->bounds();
            out.push_back({{"name", name},
                           {"file", file.filename().string()},
                           {"gaussians", s->size()},
                           {"bounds",
                            {{"min", {b.min.x(), b.min.y(), b.min.z()}}, {"max", {b.max.x(), b.max.y(), b.max.z()}}}}});
        } catch (const std::filesystem::filesystem_error&) {
            throw;
        } catch (const std::exception& e) {
            seen.erase(name);
            spdlog::warn("scene {}: not loadable, skipped ({})", file.string(), e.what());
        }
    }
    return out;
}

namespace detail {
namespace {

std::string_view mime_type(const std::filesystem::path& p) {
    static const std::pair<const char*, const char*> types[] = {
        {".html", "text/html"},         {".js", "text/javascript"}, {".mjs", "text/javascript"},
        {".css", "text/css"},           {".json", "application/json"}, {".png", "image/png"},
        {".svg", "image/svg+xml"},      {".ico", "image/x-icon"},   {".wasm", "application/wasm"},
        {".map", "application/json"},
    };
    const auto ext = p.extension().string();
    for (const auto& [e, t] : types) {
        if (ext == e) {
            return t;
        }
    }
    return "application/octet-stream";
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, ServiceContext& ctx) : stream_(std::move(socket)), ctx_(ctx) {}

    void run() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
    }

private:
    using Response = http::response<http::string_body>;

    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) {
            return;
        }
        const std::string path(req_.target().substr(0, req_.target().find('?')));
        if (websocket::is_upgrade(req_)) {
            if (path == "/ws") {
                stream_.expires_never();
                std::make_shared<WsSession>(stream_.release_socket(), ctx_)->run(std::move(req_));
                return;
            }
            send(make(http::status::not_found, R"({"error":"websocket endpoint is /ws"})", "application/json"));
            return;
        }
        send(handle(path));
    }

    Response make(http::status status, std::string body, std::string_view type) {
        Response res{status, req_.version()};
        res.set(http::field::server, "rara");
        res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
        res.set(http::field::access_control_allow_origin, "*");
        res.keep_alive(req_.keep_alive());
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    }

    Response handle(const std::string& path) {
        if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
            return make(http::status::method_not_allowed, R"({"error":"only GET is supported"})", "application/json");
        }
        if (path == "/healthz") {
            return make(http::status::ok, nlohmann::json{{"status", "ok"}}.dump(), "application/json");
        }
        if (path == "/scenes") {
            try {
                return make(http::status::ok, ctx_.cache.describe().dump(), "application/json");
            } catch (const std::exception& e) {
                spdlog::error("/scenes: {}", e.what());
                return make(http::status::internal_server_error,
                            nlohmann::json{{"error", std::string("cannot read scene directory: ") + e.what()}}.dump(),
                            "application/json");
            }
        }
        if (ctx_.options.static_dir) {
            if (auto res = serve_static(path)) {
                return std::move(*res);
            }
        }
        return make(http::status::not_found, R"({"error":"not found"})", "application/json");
    }

    std::optional<Response> serve_static(const std::string& path) {
        if (path.empty() || path.front() != '/' || path.find("..") != std::string::npos) {
            return std::nullopt;
        }
        std::filesystem::path file = *ctx_.options.static_dir / path.substr(1);
        if (path == "/") {
            file = *ctx_.options.static_dir / "index.html";
        }
        std::ifstream in(file, std::ios::binary);
        if (!in || !std::filesystem::is_regular_file(file)) {
            return std::nullopt;
        }
        std::ostringstream body;
        body << in.rdbuf();
        return make(http::status::ok, body.str(), mime_type(file));
    }

    void send(Response res) {
        auto sp = std::make_shared<Response>(std::move(res));
        http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
            if (ec) {
                return;
            }
            if (sp->need_eof()) {
                stream_shutdown(self->stream_);
                return;
            }
            self->do_read();
        });
    }

    static void stream_shutdown(beast::tcp_stream& s) {
        beast::error_code ec;
        s.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    ServiceContext& ctx_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

} // namespace

void start_http_session(tcp::socket socket, ServiceContext& ctx) {
    std::make_shared<HttpSession>(std::move(socket), ctx)->run();
}

} // namespace detail

struct RenderService::Impl {
    explicit Impl(ServiceOptions o) : options(std::move(o)), ctx(options) {}

    void do_accept() {
        acceptor.async_accept(detail::net::make_strand(ioc), [this](beast_ec ec, detail::tcp::socket socket) {
            if (ec) {
                if (ec != detail::net::error::operation_aborted) {
                    spdlog::warn("accept: {}", ec.message());
                }
                if (!acceptor.is_open()) {
                    return;
                }
            } else {
                detail::start_http_session(std::move(socket), ctx);
            }
            do_accept();
        });
    }

    using beast_ec = detail::beast::error_code;

    ServiceOptions options;
    detail::ServiceContext ctx;
    detail::net::io_context ioc{1};
    detail::tcp::acceptor acceptor{ioc};
    std::thread io_thread;
    unsigned short port = 0;
    bool running = false;
};

RenderService::RenderService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

RenderService::~RenderService() { stop(); }

unsigned short RenderService::start() {
    if (impl_->running) {
        return impl_->port;
    }
    auto& im = *impl_;
    const auto address = detail::net::ip::make_address(im.options.address);
    const detail::tcp::endpoint endpoint(address, im.options.port);
    im.acceptor.open(endpoint.protocol());
    im.acceptor.set_option(detail::net::socket_base::reuse_address(true));
    im.acceptor.bind(endpoint);
    im.acceptor.listen(detail::net::socket_base::max_listen_connections);
    im.port = im.acceptor.local_endpoint().port();
    im.do_accept();
    im.io_thread = std::thread([&im] { im.ioc.run(); });
    im.running = true;
    spdlog::info("service listening on {}:{}", im.options.address, im.port);
    return im.port;
}

void RenderService::stop() {
    if (!impl_ || !impl_->running) {
        return;
    }
    auto& im = *impl_;
    im.running = false;
    detail::net::post(im.ioc, [&im] {
        detail::beast::error_code ec;
        im.acceptor.close(ec);
    });

    std::vector<std::shared_ptr<detail::WsSession>> sessions;
    {
        std::lock_guard lk(im.ctx.mutex);
        im.ctx.stopping = true;
        for (auto& w : im.ctx.sessions) {
            if (auto s = w.lock()) {
                sessions.push_back(std::move(s));
            }
        }
    }
    for (auto& s : sessions) {
        s->shutdown();
    }
    sessions.clear();

    // In-flight renders finish; their frames are dropped once a session closes.
    {
        std::unique_lock lk(im.ctx.mutex);
        if (!im.ctx.workers_done.wait_for(lk, std::chrono::seconds(60), [&] { return im.ctx.active_workers == 0; })) {
            spdlog::error("service stop: render workers still running");
        }
    }
    // Give close handshakes a moment before tearing the loop down.
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    while (im.ctx.live_connections.load() > 0 && std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    im.ioc.stop();
    im.io_thread.join();
    spdlog::info("service stopped");
}

unsigned short RenderService::port() const { return impl_->port; }

} // namespace rara::service
