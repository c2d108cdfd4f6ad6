#include "session.hpp"

#include "rara/errors.hpp"
#include "rara/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>

namespace rara::service::detail {
namespace {

nlohmann::json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec_from(const nlohmann::json& msg, const char* key) {
    const auto& v = msg.at(key);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](auto& e) { return e.is_number(); })) {
        throw ParameterError(std::string("'") + key + "' must be an array of 3 numbers");
    }
    const Eigen::Vector3d out(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    if (!out.allFinite()) {
        throw ParameterError(std::string("'") + key + "' must be finite");
    }
    return out;
}

nlohmann::json plane_json(const std::optional<ClipPlane>& p) {
    if (!p) {
        return nullptr;
    }
    return {{"normal", vec_json(p->normal())}, {"offset", p->offset()}};
}

ClipConfig clip_for(ClipMode mode, const ClipPlane& plane) {
    switch (mode) {
    case ClipMode::Hard:
        return ClipConfig::hard(plane);
    case ClipMode::RaRa:
        return ClipConfig::rara(plane);
    default:
        return ClipConfig::none();
    }
}

Camera camera_for(const ViewState& s, int width, int height) {
    const double dist = (s.eye - s.target).norm();
    return Camera::look_at(s.eye, s.target, s.up, s.fov_deg, width, height, std::max(1e-6, 0.01 * dist));
}

constexpr int kMaxSweepFrames = 1000;
constexpr int kDefaultResolution = 512;

} // namespace

WsSession::WsSession(tcp::socket&& socket, ServiceContext& ctx) : ws_(std::move(socket)), ctx_(ctx) {
    ++ctx_.live_connections;
}

WsSession::~WsSession() { --ctx_.live_connections; }

void WsSession::run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
}

void WsSession::on_accept(beast::error_code ec) {
    if (ec) {
        spdlog::warn("ws accept: {}", ec.message());
        return;
    }
    {
        std::lock_guard lk(ctx_.mutex);
        if (ctx_.stopping) {
            closed_ = true;
            ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
            return;
        }
        std::erase_if(ctx_.sessions, [](const auto& w) { return w.expired(); });
        ctx_.sessions.push_back(weak_from_this());
        ++ctx_.active_workers;
    }
    std::thread([self = shared_from_this(), &ctx = ctx_]() mutable {
        self->worker_loop();
        // Drop the session before signalling so stop() never outlives it.
        self.reset();
        {
            std::lock_guard lk(ctx.mutex);
            --ctx.active_workers;
        }
        ctx.workers_done.notify_all();
    }).detach();
    spdlog::info("ws session opened");
    do_read();
}

void WsSession::shutdown() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
        self->stop_worker();
        self->begin_close(websocket::close_code::going_away);
    });
}

void WsSession::do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
}

void WsSession::on_read(beast::error_code ec, std::size_t) {
    if (ec) {
        if (ec != websocket::error::closed && ec != net::error::operation_aborted) {
            spdlog::info("ws read: {}", ec.message());
        }
        closed_ = true;
        writes_.clear();
        stop_worker();
        return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!ws_.got_text()) {
        send_error("binary messages are not accepted");
    } else if (!close_pending_) {
        handle_message(text);
    }
    do_read();
}

void WsSession::handle_message(const std::string& text) {
    nlohmann::json msg;
    try {
        msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        send_error(std::string("malformed JSON: ") + e.what());
        return;
    }
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
        send_error("message must be an object with a string 'type'");
        return;
    }
    const std::string type = msg.at("type").get<std::string>();
    if (type == "init") {
        handle_init(msg);
    } else if (type == "set_camera" || type == "set_plane" || type == "set_mode" || type == "sweep") {
        if (!init_requested_) {
            send_error("send init before " + type);
        } else if (!view_) {
            deferred_.push_back(text); // applied once the scene is ready
        } else {
            handle_state_change(msg, type);
        }
    } else {
        send_error("unknown message type '" + type + "'");
    }
}

void WsSession::handle_init(const nlohmann::json& msg) {
    if (init_requested_) {
        send_error("session already initialized");
        return;
    }
    Job job{Job::Init, {}, kDefaultResolution, kDefaultResolution, {}, 0};
    try {
        job.scene_name = msg.at("scene").get<std::string>();
        if (msg.contains("resolution")) {
            const auto& r = msg.at("resolution");
            if (r.is_array()) {
                job.width = r.at(0).get<int>();
                job.height = r.at(1).get<int>();
            } else {
                job.width = job.height = r.get<int>();
            }
        }
    } catch (const nlohmann::json::exception&) {
        send_error("init needs {scene: string, resolution: int or [w, h]}");
        return;
    }
    const int cap = ctx_.options.max_resolution;
    job.width = std::clamp(job.width, 16, cap);
    job.height = std::clamp(job.height, 16, cap);
    init_requested_ = true;
    enqueue(std::move(job));
}

void WsSession::on_ready(SceneHandle scene, int width, int height) {
    if (closed_ || close_pending_) {
        return;
    }
    ViewState v;
    v.scene = scene;
    const Bounds& b = scene->bounds();
    v.camera = Camera::fit_bounds(b, width, height);
    v.eye = v.camera.position();
    v.target = b.center();
    v.up = Eigen::Vector3d::UnitY();
    v.fov_deg = 45.0;
    v.plane = ClipPlane(Eigen::Vector3d::UnitX(), -b.center().x());
    view_ = v;
    send_text({{"type", "ready"},
               {"scene", scene->name()},
               {"gaussians", scene->size()},
               {"bounds", {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}},
               {"resolution", {width, height}},
               {"camera", {{"eye", vec_json(v.eye)}, {"target", vec_json(v.target)}, {"up", vec_json(v.up)},
                           {"fov", v.fov_deg}}},
               {"plane", plane_json(v.plane)},
               {"mode", "none"},
               {"compare", false}});
    auto pending = std::move(deferred_);
    deferred_.clear();
    for (const auto& text : pending) {
        handle_message(text);
    }
}

void WsSession::handle_state_change(const nlohmann::json& msg, const std::string& type) {
    ViewState next = *view_;
    Job job{Job::Render, {}, 0, 0, {}, 0};
    try {
        if (type == "set_camera") {
            next.eye = vec_from(msg, "eye");
            next.target = vec_from(msg, "target");
            if (msg.contains("up")) {
                next.up = vec_from(msg, "up");
            }
            if (msg.contains("fov")) {
                next.fov_deg = msg.at("fov").get<double>();
            }
            next.camera = camera_for(next, view_->camera.width, view_->camera.height);
        } else if (type == "set_plane") {
            next.plane = ClipPlane::from_unnormalized(vec_from(msg, "normal"), msg.at("offset").get<double>());
        } else if (type == "set_mode") {
            if (!msg.contains("mode") && !msg.contains("compare")) {
                throw ParameterError("set_mode needs 'mode' and/or 'compare'");
            }
            if (msg.contains("mode")) {
                next.mode = clip_mode_from_string(msg.at("mode").get<std::string>());
            }
            if (msg.contains("compare")) {
                next.compare = msg.at("compare").get<bool>();
            }
        } else { // sweep
            job.kind = Job::Sweep;
            job.frames = msg.value("frames", 30);
            if (job.frames < 1 || job.frames > kMaxSweepFrames) {
                throw ParameterError("sweep frames must lie in [1, " + std::to_string(kMaxSweepFrames) + "]");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        send_error(type + ": " + e.what());
        return;
    } catch (const std::exception& e) {
        send_error(type + ": " + e.what());
        return;
    }
    view_ = next;
    job.state = next;
    enqueue(std::move(job));
}

void WsSession::enqueue(Job job) {
    {
        std::lock_guard lk(queue_mutex_);
        if (stop_) {
            return;
        }
        // Latest wins: a render still waiting is replaced, never stacked.
        if (job.kind == Job::Render && !jobs_.empty() && jobs_.back().kind == Job::Render) {
            jobs_.back() = std::move(job);
        } else {
            jobs_.push_back(std::move(job));
        }
    }
    queue_cv_.notify_one();
}

void WsSession::stop_worker() {
    {
        std::lock_guard lk(queue_mutex_);
        stop_ = true;
        jobs_.clear();
    }
    queue_cv_.notify_one();
}

void WsSession::worker_loop() {
    for (;;) {
        Job job;
        {
            std::unique_lock lk(queue_mutex_);
            queue_cv_.wait(lk, [&] { return stop_ || !jobs_.empty(); });
            if (stop_) {
                return;
            }
            job = std::move(jobs_.front());
            jobs_.pop_front();
        }
        try {
            run_job(job);
        } catch (const std::exception& e) {
            spdlog::error("session worker: {}", e.what());
            net::post(ws_.get_executor(),
                      [self = shared_from_this(), msg = std::string(e.what())] { self->send_error(msg); });
        }
    }
}

void WsSession::run_job(Job& job) {
    if (job.kind == Job::Init) {
        SceneHandle scene;
        std::string failure;
        try {
            scene = ctx_.cache.get(job.scene_name);
            if (!scene) {
                failure = "unknown scene '" + job.scene_name + "'";
            }
        } catch (const std::exception& e) {
            failure = "cannot load scene '" + job.scene_name + "': " + e.what();
        }
        net::post(ws_.get_executor(), [self = shared_from_this(), scene, failure, w = job.width, h = job.height] {
            if (!failure.empty()) {
                self->send_error(failure, true);
            } else {
                self->on_ready(scene, w, h);
            }
        });
        return;
    }
    if (job.kind == Job::Render) {
        render_and_send(job.state, std::nullopt);
        return;
    }
    const ClipPlane base = *job.state.plane;
    const auto offsets = sweep_offsets(job.state.scene->bounds(), base.normal(), job.frames);
    for (int i = 0; i < job.frames; ++i) {
        {
            std::lock_guard lk(queue_mutex_);
            if (stop_) {
                return;
            }
        }
        ViewState s = job.state;
        s.plane = base.with_offset(offsets[static_cast<std::size_t>(i)]);
        render_and_send(s, nlohmann::json{{"index", i}, {"frames", job.frames}});
    }
}

void WsSession::render_and_send(const ViewState& state, const std::optional<nlohmann::json>& sweep_info) {
    RenderOptions options;
    options.threads = ctx_.options.render_threads;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> labels;
    std::vector<Image> images;
    if (state.compare) {
        labels = {"hard", "rara"};
        images.push_back(render(*state.scene, state.camera, ClipConfig::hard(*state.plane), options));
        images.push_back(render(*state.scene, state.camera, ClipConfig::rara(*state.plane), options));
    } else {
        labels = {std::string(to_string(state.mode))};
        images.push_back(render(*state.scene, state.camera, clip_for(state.mode, *state.plane), options));
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const std::uint64_t id = next_frame_id_++;
    std::vector<std::string> payloads;
    for (const Image& img : images) {
        const auto png = encode_png(img);
        std::string bin(8 + png.size(), '\0');
        for (int b = 0; b < 8; ++b) {
            bin[static_cast<std::size_t>(b)] = static_cast<char>((id >> (8 * b)) & 0xff);
        }
        std::copy(png.begin(), png.end(), bin.begin() + 8);
        payloads.push_back(std::move(bin));
    }
    nlohmann::json meta{{"type", "frame"},
                        {"id", id},
                        {"render_ms", ms},
                        {"mode", state.compare ? "compare" : labels.front()},
                        {"labels", labels},
                        {"payloads", payloads.size()},
                        {"resolution", {state.camera.width, state.camera.height}},
                        {"plane", state.mode == ClipMode::None && !state.compare ? nlohmann::json(nullptr)
                                                                                  : plane_json(state.plane)}};
    if (sweep_info) {
        meta["sweep"] = *sweep_info;
    }
    net::post(ws_.get_executor(), [self = shared_from_this(), meta = std::move(meta),
                                   payloads = std::move(payloads)]() mutable {
        if (self->closed_ || self->close_pending_) {
            return;
        }
        self->send_text(meta);
        for (auto& p : payloads) {
            self->queue_write(std::move(p), true);
        }
    });
}

void WsSession::send_text(const nlohmann::json& j) { queue_write(j.dump(), false); }

void WsSession::send_error(const std::string& message, bool close_after) {
    spdlog::debug("ws error to client: {}", message);
    send_text({{"type", "error"}, {"message", message}});
    if (close_after) {
        stop_worker();
        begin_close(websocket::close_code::policy_error);
    }
}

void WsSession::queue_write(std::string data, bool binary) {
    if (closed_ || close_pending_) {
        return;
    }
    writes_.push_back({std::move(data), binary});
    if (!writing_) {
        do_write();
    }
}

void WsSession::do_write() {
    if (writes_.empty()) {
        writing_ = false;
        if (close_pending_ && !closed_) {
            closed_ = true;
            ws_.async_close(close_code_, [self = shared_from_this()](beast::error_code) {});
        }
        return;
    }
    writing_ = true;
    ws_.binary(writes_.front().binary);
    ws_.async_write(net::buffer(writes_.front().data),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
}

void WsSession::on_write(beast::error_code ec, std::size_t) {
    if (ec) {
        closed_ = true;
        writing_ = false;
        writes_.clear();
        stop_worker();
        return;
    }
    writes_.pop_front();
    do_write();
}

void WsSession::begin_close(websocket::close_code code) {
    if (closed_ || close_pending_) {
        return;
    }
    close_pending_ = true;
    close_code_ = code;
    if (!writing_) {
        do_write();
    }
}

} // namespace rara::service::detail
