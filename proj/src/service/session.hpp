#pragma once

#include "rara/camera.hpp"
#include "rara/rasterizer.hpp"
#include "rara/service.hpp"

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace rara::service::detail {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class WsSession;

// Shared by the listener and every session.
struct ServiceContext {
    ServiceContext(const ServiceOptions& o) : options(o), cache(o.scene_dir) {}

    const ServiceOptions& options;
    SceneCache cache;

    std::mutex mutex;
    std::vector<std::weak_ptr<WsSession>> sessions;
    bool stopping = false;
    std::condition_variable workers_done;
    int active_workers = 0;

    std::atomic<int> live_connections{0};
};

void start_http_session(tcp::socket socket, ServiceContext& ctx);

/// Everything a frame depends on, captured when the client asked for it.
struct ViewState {
    SceneHandle scene;
    Camera camera;
    Eigen::Vector3d eye, target, up;
    double fov_deg = 45.0;
    std::optional<ClipPlane> plane;
    ClipMode mode = ClipMode::None;
    bool compare = false;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, ServiceContext& ctx);
    ~WsSession();

    void run(http::request<http::string_body> req);
    /// Thread-safe; closes the socket with "going away".
    void shutdown();

private:
    struct Job {
        enum Kind { Init, Render, Sweep } kind;
        std::string scene_name;
        int width = 0, height = 0;
        ViewState state;
        int frames = 0;
    };

    void on_accept(beast::error_code ec);
    void do_read();
    void on_read(beast::error_code ec, std::size_t bytes);
    void handle_message(const std::string& text);
    void handle_init(const nlohmann::json& msg);
    void handle_state_change(const nlohmann::json& msg, const std::string& type);
    void on_ready(SceneHandle scene, int width, int height);

    void enqueue(Job job);
    void worker_loop();
    void run_job(Job& job);
    void render_and_send(const ViewState& state, const std::optional<nlohmann::json>& sweep_info);

    // Strand-only.
    void send_text(const nlohmann::json& j);
    void send_error(const std::string& message, bool close_after = false);
    void queue_write(std::string data, bool binary);
    void do_write();
    void on_write(beast::error_code ec, std::size_t bytes);
    void begin_close(websocket::close_code code);
    void stop_worker();

    websocket::stream<beast::tcp_stream> ws_;
    ServiceContext& ctx_;
    beast::flat_buffer buffer_;

    // Strand-only state.
    std::optional<ViewState> view_;
    bool init_requested_ = false;
    std::vector<std::string> deferred_;
    struct Outgoing {
        std::string data;
        bool binary;
    };
    std::deque<Outgoing> writes_;
    bool writing_ = false;
    bool close_pending_ = false;
    websocket::close_code close_code_ = websocket::close_code::normal;
    bool closed_ = false;

    // Shared with the worker.
    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<Job> jobs_;
    bool stop_ = false;
    std::uint64_t next_frame_id_ = 1; // worker-only
};

} // namespace rara::service::detail
